#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hbprobit/brand_value.hpp"
#include "hbprobit/gibbs.hpp"
#include "hbprobit/stat_kernels.hpp"
#include "hbprobit/synth.hpp"
#include "oracles.hpp"

using namespace hbprobit;
namespace fs = std::filesystem;

namespace {

BrandAttributeMatrix line_attrs(std::initializer_list<double> xs) {
  Eigen::MatrixXd raw(static_cast<long>(xs.size()), 1);
  int j = 0;
  for (double x : xs) raw(j++, 0) = x;
  return BrandAttributeMatrix::from_raw(raw);
}

// Small synthetic world shared by the recovery-style tests. The true
// tangible level is placed where the sampler's intercept level settles
// (the common level is invisible to the choice likelihood).
GeneratorSpec mini_world() {
  GeneratorSpec spec;
  spec.n_households = 12;
  spec.n_brands = 3;
  spec.n_occasions = 400;
  spec.attributes = line_attrs({-0.75, 0.0, 0.75});
  spec.truth.beta_mean << 1.0, -2.5;
  spec.truth.beta_cov = 0.04 * Eigen::Matrix2d::Identity();
  spec.truth.delta_mean = Eigen::Vector2d(1.30, 0.4);
  spec.truth.delta_cov = 0.01 * Eigen::MatrixXd::Identity(2, 2);
  spec.truth.intangible_var = 0.04;
  spec.price_levels = Eigen::Vector3d(300.0, 310.0, 320.0);
  spec.price_jitter = 0.30;
  spec.display_prob = Eigen::VectorXd::Constant(3, 0.3);
  spec.seed = 501;
  return spec;
}

struct MiniRun {
  GeneratedPanel generated;
  ChainDraws chain;
};

// Priors sized for the mini world's modest heterogeneity; the estimator's
// wide defaults are tuned for the full 98-household problem.
PriorConfig mini_priors() {
  PriorConfig priors = PriorConfig::defaults(2);
  priors.delta_cov_scale = 0.05 * Eigen::MatrixXd::Identity(2, 2);
  priors.beta_cov_scale = 0.1 * Eigen::Matrix2d::Identity();
  priors.sigma_phi_scale = 0.1;
  return priors;
}

const MiniRun& mini_run() {
  static const MiniRun run = [] {
    const GeneratorSpec spec = mini_world();
    GeneratedPanel gen = generate_panel(spec, RngKey::root(spec.seed));
    McmcConfig config;
    config.n_iterations = 1200;
    config.n_burn_in = 400;
    ChainDraws chain =
        run_chain(gen.panel, spec.attributes, mini_priors(), config,
                  RngKey::root(77));
    return MiniRun{std::move(gen), std::move(chain)};
  }();
  return run;
}

PanelDataset tiny_panel() {
  GeneratorSpec spec = GeneratorSpec::defaults();
  spec.n_households = 6;
  spec.n_occasions = 5;
  return generate_panel(spec, RngKey::root(9)).panel;
}

bool snapshots_equal(const Snapshot& a, const Snapshot& b) {
  return a.alpha == b.alpha && a.beta == b.beta && a.delta == b.delta &&
         a.intangible == b.intangible && a.pop.beta_mean == b.pop.beta_mean &&
         a.pop.beta_cov == b.pop.beta_cov &&
         a.pop.delta_mean == b.pop.delta_mean &&
         a.pop.delta_cov == b.pop.delta_cov &&
         a.pop.intangible_var == b.pop.intangible_var;
}

bool chains_equal(const ChainDraws& a, const ChainDraws& b) {
  if (a.draws.size() != b.draws.size()) return false;
  for (std::size_t i = 0; i < a.draws.size(); ++i) {
    if (!snapshots_equal(a.draws[i], b.draws[i])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("snapshot count follows floor((iters - burn) / thin)") {
  const PanelDataset data = tiny_panel();
  const BrandAttributeMatrix attrs = default_attribute_matrix();
  const PriorConfig priors = PriorConfig::defaults(attrs.n_attributes());
  McmcConfig config;
  config.n_iterations = 10;
  config.n_burn_in = 5;
  for (int thin : {1, 2, 5}) {
    config.thin = thin;
    const ChainDraws out = run_chain(data, attrs, priors, config, RngKey::root(1));
    CHECK(static_cast<int>(out.draws.size()) == (10 - 5) / thin);
  }
}

TEST_CASE("identical seeds produce bitwise-identical chains") {
  const PanelDataset data = tiny_panel();
  const BrandAttributeMatrix attrs = default_attribute_matrix();
  const PriorConfig priors = PriorConfig::defaults(attrs.n_attributes());
  McmcConfig config;
  config.n_iterations = 12;
  config.n_burn_in = 2;
  const ChainDraws a = run_chain(data, attrs, priors, config, RngKey::root(5));
  const ChainDraws b = run_chain(data, attrs, priors, config, RngKey::root(5));
  const ChainDraws c = run_chain(data, attrs, priors, config, RngKey::root(6));
  CHECK(chains_equal(a, b));
  CHECK(!chains_equal(a, c));
}

TEST_CASE("chain output is invariant to household order and thread count") {
  const PanelDataset data = tiny_panel();
  const BrandAttributeMatrix attrs = default_attribute_matrix();
  const PriorConfig priors = PriorConfig::defaults(attrs.n_attributes());
  McmcConfig config;
  config.n_iterations = 12;
  config.n_burn_in = 2;
  const ChainDraws serial =
      run_chain(data, attrs, priors, config, RngKey::root(5), EngineOptions{1});
  EngineOptions reversed;
  reversed.reverse_households = true;
  const ChainDraws backwards =
      run_chain(data, attrs, priors, config, RngKey::root(5), reversed);
  const ChainDraws parallel =
      run_chain(data, attrs, priors, config, RngKey::root(5), EngineOptions{4});
  CHECK(chains_equal(serial, backwards));
  CHECK(chains_equal(serial, parallel));
}

TEST_CASE("truncation consistency holds after every conditional update") {
  const PanelDataset data = tiny_panel();
  const BrandAttributeMatrix attrs = default_attribute_matrix();
  const PriorConfig priors = PriorConfig::defaults(attrs.n_attributes());
  McmcConfig config;
  config.n_iterations = 50;
  config.n_burn_in = 10;
  int checks = 0;
  int violations = 0;
  RunHooks hooks;
  hooks.after_update = [&](int, Conditional, const SamplerState& state) {
    ++checks;
    if (!truncation_consistent(state, data)) ++violations;
  };
  (void)run_chain(data, attrs, priors, config, RngKey::root(3), {}, hooks);
  CHECK(checks == 50 * 5);
  CHECK(violations == 0);
}

TEST_CASE("initial latent utilities satisfy the truncation constraint") {
  const PanelDataset data = tiny_panel();
  const BrandAttributeMatrix attrs = default_attribute_matrix();
  const SamplerState state =
      init_state(data, attrs, PriorConfig::defaults(attrs.n_attributes()),
                 RngKey::root(2));
  CHECK(truncation_consistent(state, data));
}

TEST_CASE("degenerate one-occasion one-household panel runs") {
  GeneratorSpec spec = GeneratorSpec::defaults();
  spec.n_households = 1;
  spec.n_occasions = 1;
  const GeneratedPanel gen = generate_panel(spec, RngKey::root(4));
  McmcConfig config;
  config.n_iterations = 20;
  config.n_burn_in = 5;
  const ChainDraws out =
      run_chain(gen.panel, spec.attributes,
                PriorConfig::defaults(spec.attributes.n_attributes()), config,
                RngKey::root(8));
  CHECK(out.draws.size() == 15);
}

TEST_CASE("latent difference for a chosen brand matches the truncated moment") {
  // J = 2, alpha = beta = 0, one occasion choosing brand 0: across sweeps
  // U0 - U1 averages to the mean of N(0, 2) truncated to be positive.
  std::vector<ChoiceOccasion> raw(1);
  raw[0].household_id = "h";
  raw[0].occasion_index = 0;
  raw[0].chosen = 0;
  raw[0].prices = Eigen::Vector2d(1.0, 1.0);
  raw[0].displays = Eigen::Vector2d(0.0, 0.0);
  const PanelDataset data = PanelDataset::build(std::move(raw), 2);
  const BrandAttributeMatrix attrs = line_attrs({-0.5, 0.5});
  SamplerState state =
      init_state(data, attrs, PriorConfig::defaults(2), RngKey::root(11));
  const RngKey key = RngKey::root(12);
  double sum = 0.0;
  const int sweeps = 10000;
  const int warmup = 100;
  for (int i = 0; i < sweeps + warmup; ++i) {
    draw_latent_utilities(state, data, key.child(i), {});
    if (i >= warmup) sum += state.latent(0, 0) - state.latent(0, 1);
  }
  const double expected =
      std::sqrt(2.0) * oracle::truncated_normal_mean(0.0, 14.0);
  CHECK(expected == doctest::Approx(1.1284).epsilon(1e-3));
  CHECK(std::abs(sum / sweeps - expected) < 0.05);
}

TEST_CASE("marketing coefficients recover on a long single-household panel") {
  GeneratorSpec spec;
  spec.n_households = 1;
  spec.n_brands = 4;
  spec.n_occasions = 500;
  spec.attributes = line_attrs({-0.75, -0.25, 0.25, 0.75});
  spec.truth.beta_mean << 1.5, -4.0;
  spec.truth.beta_cov = 1e-6 * Eigen::Matrix2d::Identity();
  spec.truth.delta_mean = Eigen::Vector2d(2.5, 0.3);
  spec.truth.delta_cov = 1e-6 * Eigen::MatrixXd::Identity(2, 2);
  spec.truth.intangible_var = 1e-4;
  spec.price_levels = (Eigen::VectorXd(4) << 280.0, 300.0, 320.0, 340.0).finished();
  spec.price_jitter = 0.35;
  spec.display_prob = Eigen::VectorXd::Constant(4, 0.35);
  const GeneratedPanel gen = generate_panel(spec, RngKey::root(21));

  McmcConfig config;
  config.n_iterations = 1500;
  config.n_burn_in = 500;
  PriorConfig priors = PriorConfig::defaults(2);
  priors.beta_cov_scale = 0.1 * Eigen::Matrix2d::Identity();
  priors.delta_cov_scale = 0.1 * Eigen::MatrixXd::Identity(2, 2);
  const ChainDraws chain =
      run_chain(gen.panel, spec.attributes, priors, config, RngKey::root(22));
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& snap : chain.draws) mean += snap.beta.row(0).transpose();
  mean /= static_cast<double>(chain.draws.size());
  CHECK(std::abs(mean[0] - 1.5) < 0.3);
  CHECK(std::abs(mean[1] + 4.0) < 0.3);
}

TEST_CASE("intercepts recover within 0.4 rmse on a long synthetic panel") {
  const MiniRun& run = mini_run();
  const int h_count = run.chain.n_households;
  const int j_count = run.chain.n_brands;
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(h_count, j_count);
  for (const auto& snap : run.chain.draws) mean += snap.alpha;
  mean /= static_cast<double>(run.chain.draws.size());
  const double rmse = std::sqrt((mean - run.generated.truth.alpha).squaredNorm() /
                                static_cast<double>(mean.size()));
  CHECK(rmse < 0.4);
}

TEST_CASE("population heterogeneity sd is recovered within the sanity band") {
  GeneratorSpec spec = mini_world();
  spec.n_households = 50;
  spec.n_occasions = 60;
  spec.truth.beta_cov = 0.25 * Eigen::Matrix2d::Identity();  // het sd 0.5
  spec.seed = 502;
  const GeneratedPanel gen = generate_panel(spec, RngKey::root(spec.seed));
  McmcConfig config;
  config.n_iterations = 1500;
  config.n_burn_in = 500;
  const ChainDraws chain =
      run_chain(gen.panel, spec.attributes, PriorConfig::defaults(2), config,
                RngKey::root(31));
  double sd0 = 0.0;
  double sd1 = 0.0;
  for (const auto& snap : chain.draws) {
    sd0 += std::sqrt(snap.pop.beta_cov(0, 0));
    sd1 += std::sqrt(snap.pop.beta_cov(1, 1));
  }
  sd0 /= static_cast<double>(chain.draws.size());
  sd1 /= static_cast<double>(chain.draws.size());
  CHECK(sd0 > 0.3);
  CHECK(sd0 < 0.8);
  CHECK(sd1 > 0.3);
  CHECK(sd1 < 0.8);
  // The intangible variance posterior stays positive under the proper prior
  // even though J = R would be exactly identified with a flat prior.
  for (const auto& snap : chain.draws) REQUIRE(snap.pop.intangible_var > 0.0);
}

TEST_CASE("vanishing intangible variance pins intercepts at tangible values") {
  const MiniRun& run = mini_run();
  const GeneratorSpec spec = mini_world();
  SamplerState state = init_state(run.generated.panel, spec.attributes,
                                  PriorConfig::defaults(2), RngKey::root(41));
  for (int i = 0; i < 20; ++i) {
    draw_latent_utilities(state, run.generated.panel, RngKey::root(42).child(i), {});
    draw_household_intercepts(state, run.generated.panel,
                              RngKey::root(43).child(i), {});
    draw_engineering_params(state, spec.attributes, PriorConfig::defaults(2),
                            RngKey::root(44).child(i), {});
  }
  state.pop.intangible_var = 1e-12;
  const Eigen::MatrixXd tangible_before = state.alpha - state.intangible;
  draw_household_intercepts(state, run.generated.panel, RngKey::root(45), {});
  CHECK((state.alpha - tangible_before).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(state.intangible.cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("dogmatic delta prior pins coefficients at the population mean") {
  const MiniRun& run = mini_run();
  const GeneratorSpec spec = mini_world();
  SamplerState state = init_state(run.generated.panel, spec.attributes,
                                  PriorConfig::defaults(2), RngKey::root(51));
  state.alpha.setRandom();
  state.pop.delta_mean = Eigen::Vector2d(0.7, -0.2);
  state.pop.delta_cov = 1e-14 * Eigen::MatrixXd::Identity(2, 2);
  PriorConfig priors = PriorConfig::defaults(2);
  priors.delta_mean_precision = 1e14;  // hold the population mean fixed too
  priors.delta_mean_loc = state.pop.delta_mean;
  draw_engineering_params(state, spec.attributes, priors, RngKey::root(52), {});
  for (int h = 0; h < state.delta.rows(); ++h) {
    CHECK(std::abs(state.delta(h, 0) - 0.7) < 1e-5);
    CHECK(std::abs(state.delta(h, 1) + 0.2) < 1e-5);
    // Intangibles absorb all remaining variation: identity is exact.
    for (int j = 0; j < state.alpha.cols(); ++j) {
      const double tangible =
          tangible_value(state.delta.row(h), spec.attributes.row(j));
      CHECK(state.alpha(h, j) == doctest::Approx(tangible + state.intangible(h, j))
                                     .epsilon(1e-12));
    }
  }
}

TEST_CASE("decomposition identity holds in every stored snapshot") {
  const MiniRun& run = mini_run();
  const GeneratorSpec spec = mini_world();
  for (std::size_t d = 0; d < run.chain.draws.size(); d += 7) {
    const Snapshot& snap = run.chain.draws[d];
    for (int h = 0; h < snap.alpha.rows(); ++h) {
      for (int j = 0; j < snap.alpha.cols(); ++j) {
        const double tangible =
            tangible_value(snap.delta.row(h), spec.attributes.row(j));
        const double err =
            std::abs(snap.alpha(h, j) - (tangible + snap.intangible(h, j)));
        REQUIRE(err <= 1e-12 * std::max(1.0, std::abs(snap.alpha(h, j))));
      }
    }
  }
}

TEST_CASE("engineering-parameter means recover given the true intercepts") {
  // Conditioned on known intercepts the whole delta block, constant
  // included, is identified. Attribute columns are standardized to the unit
  // probit scale so no single column dominates the fit numerically.
  const int h_count = 98;
  const int r_count = 6;
  BrandAttributeMatrix attrs = default_attribute_matrix();
  Eigen::MatrixXd scaled = attrs.values.rightCols(r_count - 1);
  scaled.rowwise() -= scaled.colwise().mean();
  for (int c = 0; c < scaled.cols(); ++c) {
    scaled.col(c) /= std::sqrt(scaled.col(c).squaredNorm() / (scaled.rows() - 1));
  }
  attrs = BrandAttributeMatrix::from_raw(scaled);

  Eigen::VectorXd truth_mean(r_count);
  truth_mean << -13.87, 0.311, 0.759, 0.632, -0.009, 1.195;
  const PriorConfig priors = PriorConfig::defaults(r_count);

  SamplerState state;
  Philox rng(64);
  state.alpha.resize(h_count, attrs.n_brands());
  for (int h = 0; h < h_count; ++h) {
    Eigen::VectorXd delta_h(r_count);
    for (int r = 0; r < r_count; ++r) {
      delta_h[r] = truth_mean[r] + 0.5 * sample_standard_normal(rng);
    }
    for (int j = 0; j < attrs.n_brands(); ++j) {
      state.alpha(h, j) =
          tangible_value(delta_h, attrs.row(j)) + 0.5 * sample_standard_normal(rng);
    }
  }
  state.beta = Eigen::MatrixXd::Zero(h_count, 2);
  state.delta = Eigen::MatrixXd::Zero(h_count, r_count);
  state.intangible = state.alpha;
  state.pop.beta_mean.setZero();
  state.pop.beta_cov = Eigen::Matrix2d::Identity();
  state.pop.delta_mean = Eigen::VectorXd::Zero(r_count);
  state.pop.delta_cov = 0.5 * Eigen::MatrixXd::Identity(r_count, r_count);
  state.pop.intangible_var = 0.667;

  const RngKey root = RngKey::root(63);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(r_count);
  const int iters = 600;
  const int burn = 200;
  for (int it = 0; it < iters; ++it) {
    draw_engineering_params(state, attrs, priors, root.child(it).child(0), {});
    draw_population_hyperparams(state, priors, root.child(it).child(1));
    if (it >= burn) mean += state.pop.delta_mean;
  }
  mean /= static_cast<double>(iters - burn);
  for (int r = 0; r < r_count; ++r) {
    CHECK(std::abs(mean[r] - truth_mean[r]) < 0.5);
  }
}

TEST_CASE("hyper update stays proper with a single household") {
  const BrandAttributeMatrix attrs = line_attrs({-0.5, 0.5});
  SamplerState state;
  state.alpha = Eigen::MatrixXd::Zero(1, 2);
  state.beta = Eigen::MatrixXd::Zero(1, 2);
  state.delta = Eigen::MatrixXd::Zero(1, 2);
  state.intangible = Eigen::MatrixXd::Zero(1, 2);
  state.pop.beta_mean.setZero();
  state.pop.beta_cov = Eigen::Matrix2d::Identity();
  state.pop.delta_mean = Eigen::VectorXd::Zero(2);
  state.pop.delta_cov = Eigen::MatrixXd::Identity(2, 2);
  state.pop.intangible_var = 1.0;
  draw_population_hyperparams(state, PriorConfig::defaults(2), RngKey::root(61));
  CHECK_NOTHROW((void)factorize_spd(state.pop.beta_cov));
  CHECK_NOTHROW((void)factorize_spd(state.pop.delta_cov));
  CHECK(state.pop.intangible_var > 0.0);
}

TEST_CASE("zero dispersion in beta concentrates the covariance near the prior floor") {
  const int h_count = 30;
  SamplerState state;
  state.alpha = Eigen::MatrixXd::Zero(h_count, 2);
  state.beta = Eigen::MatrixXd::Zero(h_count, 2);
  for (int h = 0; h < h_count; ++h) state.beta.row(h) << 1.2, -2.0;
  state.delta = Eigen::MatrixXd::Zero(h_count, 2);
  state.intangible = Eigen::MatrixXd::Zero(h_count, 2);
  state.pop.beta_mean << 1.2, -2.0;
  state.pop.beta_cov = Eigen::Matrix2d::Identity();
  state.pop.delta_mean = Eigen::VectorXd::Zero(2);
  state.pop.delta_cov = Eigen::MatrixXd::Identity(2, 2);
  state.pop.intangible_var = 1.0;
  const PriorConfig priors = PriorConfig::defaults(2);
  double diag_sum = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    draw_population_hyperparams(state, priors, RngKey::root(70).child(rep));
    diag_sum += state.pop.beta_cov(0, 0) + state.pop.beta_cov(1, 1);
  }
  const double mean_diag = diag_sum / 400.0;
  // Inverse-Wishart floor: scale / (df0 + H - k - 1) = 1 / 32.
  CHECK(mean_diag > 0.0);
  CHECK(mean_diag < 0.1);
}

TEST_CASE("constant design columns are flagged, not fatal") {
  std::vector<ChoiceOccasion> raw;
  Philox rng(81);
  for (int t = 0; t < 6; ++t) {
    ChoiceOccasion occ;
    occ.household_id = "h1";
    occ.occasion_index = t;
    occ.chosen = t % 2;
    occ.prices = Eigen::Vector2d(200.0 + 10 * rng.next_double(),
                                 210.0 + 10 * rng.next_double());
    occ.displays = Eigen::Vector2d(1.0, 1.0);  // display never varies
    raw.push_back(occ);
  }
  const PanelDataset data = PanelDataset::build(std::move(raw), 2);
  const BrandAttributeMatrix attrs = line_attrs({-0.5, 0.5});
  McmcConfig config;
  config.n_iterations = 30;
  config.n_burn_in = 10;
  int warnings = 0;
  RunHooks hooks;
  hooks.warning = [&](const std::string& msg) {
    ++warnings;
    CHECK(msg.find("display") != std::string::npos);
  };
  const ChainDraws out = run_chain(data, attrs, PriorConfig::defaults(2), config,
                                   RngKey::root(82), {}, hooks);
  CHECK(out.collinearity_warnings == 1);
  CHECK(warnings == 1);
  for (const auto& snap : out.draws) {
    REQUIRE(snap.beta.allFinite());
  }
}

TEST_CASE("kernel failures abort with iteration and conditional named") {
  const PanelDataset data = tiny_panel();
  const BrandAttributeMatrix attrs = default_attribute_matrix();
  PriorConfig priors = PriorConfig::defaults(attrs.n_attributes());
  // A non-symmetric scale poisons the initial beta covariance, so the first
  // marketing update's factorization fails.
  priors.beta_cov_scale(0, 1) += 0.5;
  McmcConfig config;
  config.n_iterations = 5;
  config.n_burn_in = 1;
  try {
    (void)run_chain(data, attrs, priors, config, RngKey::root(91));
    FAIL("expected SamplerError");
  } catch (const SamplerError& e) {
    CHECK(e.iteration == 0);
    CHECK(e.conditional == Conditional::household_marketing);
    CHECK(std::string(e.what()).find("household_marketing") != std::string::npos);
    CHECK(std::string(e.what()).find("iteration 0") != std::string::npos);
  }
}

TEST_CASE("run_chain validates its preconditions") {
  const PanelDataset data = tiny_panel();
  const BrandAttributeMatrix attrs = default_attribute_matrix();
  const PriorConfig priors = PriorConfig::defaults(attrs.n_attributes());
  McmcConfig config;
  config.n_iterations = 10;
  config.n_burn_in = 10;  // burn must be < iterations
  CHECK_THROWS_AS((void)run_chain(data, attrs, priors, config, RngKey::root(1)),
                  std::invalid_argument);
  config.n_burn_in = 2;
  CHECK_THROWS_AS(
      (void)run_chain(data, line_attrs({-0.5, 0.5}), priors, config, RngKey::root(1)),
      std::invalid_argument);
}

TEST_CASE("rank-deficient attribute matrices are rejected") {
  Eigen::MatrixXd raw(3, 2);
  raw << 1.0, 2.0,
         2.0, 4.0,
         3.0, 6.0;  // second column is 2x the first
  const BrandAttributeMatrix attrs = BrandAttributeMatrix::from_raw(raw);
  SamplerState state;
  state.alpha = Eigen::MatrixXd::Zero(2, 3);
  state.beta = Eigen::MatrixXd::Zero(2, 2);
  state.delta = Eigen::MatrixXd::Zero(2, 3);
  state.intangible = Eigen::MatrixXd::Zero(2, 3);
  state.pop.delta_mean = Eigen::VectorXd::Zero(3);
  state.pop.delta_cov = Eigen::MatrixXd::Identity(3, 3);
  state.pop.intangible_var = 1.0;
  CHECK_THROWS_AS(draw_engineering_params(state, attrs, PriorConfig::defaults(3),
                                          RngKey::root(1), {}),
                  std::invalid_argument);
}

TEST_CASE("progress hook reports every hundredth iteration") {
  const PanelDataset data = tiny_panel();
  const BrandAttributeMatrix attrs = default_attribute_matrix();
  McmcConfig config;
  config.n_iterations = 200;
  config.n_burn_in = 50;
  std::vector<int> iterations;
  RunHooks hooks;
  hooks.progress = [&](int iter, double ssr) {
    iterations.push_back(iter);
    CHECK(std::isfinite(ssr));
    CHECK(ssr >= 0.0);
  };
  (void)run_chain(data, attrs, PriorConfig::defaults(attrs.n_attributes()), config,
                  RngKey::root(2), {}, hooks);
  CHECK(iterations == std::vector<int>{100, 200});
}

TEST_CASE("checkpoints are versioned state snapshots") {
  const PanelDataset data = tiny_panel();
  const BrandAttributeMatrix attrs = default_attribute_matrix();
  const auto path = fs::temp_directory_path() / "hbprobit_checkpoint.json";
  McmcConfig config;
  config.n_iterations = 10;
  config.n_burn_in = 2;
  config.checkpoint_every = 5;
  config.checkpoint_path = path.string();
  (void)run_chain(data, attrs, PriorConfig::defaults(attrs.n_attributes()), config,
                  RngKey::root(3));
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  CHECK(content.find("\"format\": \"hbprobit-checkpoint\"") != std::string::npos);
  CHECK(content.find("\"version\": 1") != std::string::npos);
  CHECK(content.find("\"iteration\": 10") != std::string::npos);
  fs::remove(path);
}

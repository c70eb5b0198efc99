#include "hbprobit/synth.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "hbprobit/brand_value.hpp"
#include "hbprobit/posterior.hpp"
#include "hbprobit/stat_kernels.hpp"

namespace hbprobit {

BrandAttributeMatrix default_attribute_matrix() {
  // Centered (per-column) deviations are mutually orthogonal, which keeps
  // the engineering parameters separately identified through brand
  // contrasts; column means are chosen so the implied tangible values are
  // of the same small magnitude as published intercept estimates.
  Eigen::MatrixXd raw(6, 5);
  // saa, bleach, package, g_per_30l, net_weight
  raw << 41.50, 1, 1, 25.00, 3.484,
         39.25, 0, 1, 26.25, 3.284,
         39.25, 1, 0, 26.25, 3.284,
         41.50, 0, 0, 25.00, 3.084,
         39.25, 1, 1, 23.75, 3.084,
         39.25, 0, 0, 23.75, 3.484;
  return BrandAttributeMatrix::from_raw(raw);
}

GeneratorSpec GeneratorSpec::defaults() {
  GeneratorSpec spec;
  spec.attributes = default_attribute_matrix();
  spec.truth.beta_mean << 1.523, -4.331;
  spec.truth.beta_cov = 0.25 * Eigen::Matrix2d::Identity();
  spec.truth.delta_mean.resize(6);
  spec.truth.delta_mean << -13.87, 0.311, 0.759, 0.632, -0.009, 1.195;
  spec.truth.delta_cov = 0.25 * Eigen::MatrixXd::Identity(6, 6);
  spec.truth.intangible_var = 0.25;
  spec.price_levels.resize(6);
  spec.price_levels << 328, 298, 341, 275, 306, 315;
  spec.display_prob = Eigen::VectorXd::Constant(6, 0.3);
  return spec;
}

std::vector<std::string> GeneratorSpec::validate() const {
  std::vector<std::string> issues;
  if (n_households < 1) issues.push_back("n_households must be >= 1");
  if (n_brands < 1) issues.push_back("n_brands must be >= 1");
  if (n_occasions < 1) issues.push_back("n_occasions must be >= 1");
  if (attributes.n_brands() != n_brands) {
    issues.push_back("attribute matrix rows differ from n_brands");
  }
  if (truth.delta_mean.size() != attributes.n_attributes() ||
      truth.delta_cov.rows() != attributes.n_attributes()) {
    issues.push_back("delta truth dimensions differ from attribute count");
  }
  if (price_levels.size() != n_brands) {
    issues.push_back("price_levels length differs from n_brands");
  }
  if (price_levels.size() == n_brands && (price_levels.array() <= 0.0).any()) {
    issues.push_back("price levels must be positive");
  }
  if (!(price_jitter >= 0.0 && price_jitter < 1.0)) {
    issues.push_back("price_jitter must lie in [0,1)");
  }
  if (display_prob.size() != n_brands) {
    issues.push_back("display_prob length differs from n_brands");
  }
  for (Eigen::Index j = 0; j < display_prob.size(); ++j) {
    if (!(display_prob[j] >= 0.0 && display_prob[j] <= 1.0)) {
      issues.push_back("display probabilities must lie in [0,1]");
      break;
    }
  }
  if (!(truth.intangible_var > 0.0)) {
    issues.push_back("intangible variance must be positive");
  }
  return issues;
}

GeneratedPanel generate_panel(const GeneratorSpec& spec, RngKey key) {
  {
    const auto issues = spec.validate();
    if (!issues.empty()) {
      std::string msg = "invalid generator spec:";
      for (const auto& s : issues) msg += "\n  - " + s;
      throw std::invalid_argument(msg);
    }
  }
  const int h_count = spec.n_households;
  const int j_count = spec.n_brands;
  const int t_count = spec.n_occasions;
  const int r_count = spec.attributes.n_attributes();
  const double phi_sd = std::sqrt(spec.truth.intangible_var);

  PanelTruth truth;
  truth.pop = spec.truth;
  truth.attributes = spec.attributes;
  truth.alpha.resize(h_count, j_count);
  truth.beta.resize(h_count, 2);
  truth.delta.resize(h_count, r_count);
  truth.intangible.resize(h_count, j_count);

  int id_width = 1;
  for (int v = h_count; v >= 10 && id_width < 9; v /= 10) ++id_width;

  std::vector<ChoiceOccasion> raw;
  raw.reserve(static_cast<std::size_t>(h_count) * t_count);
  double max_price = 0.0;
  for (int h = 0; h < h_count; ++h) {
    Philox rng = key.child(h).child(0).stream();
    truth.beta.row(h) = sample_mvn(spec.truth.beta_mean, spec.truth.beta_cov, rng);
    truth.delta.row(h) =
        sample_mvn(spec.truth.delta_mean, spec.truth.delta_cov, rng);
    const Eigen::VectorXd delta_h = truth.delta.row(h);
    for (int j = 0; j < j_count; ++j) {
      truth.intangible(h, j) = phi_sd * sample_standard_normal(rng);
      truth.alpha(h, j) =
          tangible_value(delta_h, spec.attributes.row(j)) + truth.intangible(h, j);
    }
    char id[32];
    std::snprintf(id, sizeof(id), "h%0*d", id_width, h + 1);
    for (int t = 0; t < t_count; ++t) {
      ChoiceOccasion occ;
      occ.household_id = id;
      occ.occasion_index = t;
      occ.prices.resize(j_count);
      occ.displays.resize(j_count);
      for (int j = 0; j < j_count; ++j) {
        const double jitter = spec.price_jitter * (2.0 * rng.next_double() - 1.0);
        occ.prices[j] = spec.price_levels[j] * (1.0 + jitter);
        occ.displays[j] = rng.next_double() < spec.display_prob[j] ? 1.0 : 0.0;
        max_price = std::max(max_price, occ.prices[j]);
      }
      raw.push_back(std::move(occ));
    }
  }

  // Utilities use the canonical price scale the estimator will see; the
  // builder below divides by the same panel-wide maximum.
  int ties = 0;
  for (int h = 0; h < h_count; ++h) {
    Philox rng = key.child(h).child(1).stream();
    for (int t = 0; t < t_count; ++t) {
      ChoiceOccasion& occ = raw[static_cast<std::size_t>(h) * t_count + t];
      int best = 0;
      double best_u = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < j_count; ++j) {
        const double u = truth.alpha(h, j) + truth.beta(h, 0) * occ.displays[j] +
                         truth.beta(h, 1) * (occ.prices[j] / max_price) +
                         sample_standard_normal(rng);
        if (u > best_u) {
          best_u = u;
          best = j;
        } else if (u == best_u) {
          ++ties;
        }
      }
      occ.chosen = best;
    }
  }

  GeneratedPanel out{PanelDataset::build(std::move(raw), j_count),
                     std::move(truth), ties};
  return out;
}

ChainEvidence extract_evidence(const ChainDraws& chain) {
  if (chain.draws.empty()) {
    throw std::invalid_argument("extract_evidence: empty chain");
  }
  const int h_count = chain.n_households;
  const int j_count = chain.n_brands;
  const int r_count = chain.n_attributes;
  const std::size_t n = chain.draws.size();

  ChainEvidence ev;
  ev.n_households = h_count;
  ev.n_brands = j_count;
  ev.n_attributes = r_count;
  ev.display_mean_draws.resize(n);
  ev.price_mean_draws.resize(n);
  ev.delta_mean_draws.resize(n, r_count);
  ev.delta_sd_draws.resize(n, r_count);
  ev.beta_sd_draws.resize(n, 2);
  ev.sigma_phi_draws.resize(n);
  ev.household_beta_mean = Eigen::MatrixXd::Zero(h_count, 2);
  ev.household_alpha_mean = Eigen::MatrixXd::Zero(h_count, j_count);
  ev.household_delta_mean = Eigen::MatrixXd::Zero(h_count, r_count);

  for (std::size_t d = 0; d < n; ++d) {
    const Snapshot& snap = chain.draws[d];
    ev.display_mean_draws[d] = snap.pop.beta_mean[0];
    ev.price_mean_draws[d] = snap.pop.beta_mean[1];
    for (int r = 0; r < r_count; ++r) {
      ev.delta_mean_draws(d, r) = snap.pop.delta_mean[r];
      ev.delta_sd_draws(d, r) = std::sqrt(snap.pop.delta_cov(r, r));
    }
    ev.beta_sd_draws(d, 0) = std::sqrt(snap.pop.beta_cov(0, 0));
    ev.beta_sd_draws(d, 1) = std::sqrt(snap.pop.beta_cov(1, 1));
    ev.sigma_phi_draws[d] = snap.pop.intangible_var;
    ev.household_beta_mean += snap.beta;
    ev.household_alpha_mean += snap.alpha;
    ev.household_delta_mean += snap.delta;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  ev.household_beta_mean *= inv_n;
  ev.household_alpha_mean *= inv_n;
  ev.household_delta_mean *= inv_n;
  return ev;
}

namespace {

ParamRecovery score_param(const std::string& name, double truth,
                          const std::vector<double>& draws, double level) {
  ParamRecovery out;
  out.name = name;
  out.truth = truth;
  double sum = 0.0;
  for (double v : draws) sum += v;
  out.posterior_mean = sum / static_cast<double>(draws.size());
  if (draws.size() >= 2) {
    const auto [lo, hi] = hpd_interval(draws, level);
    out.lo = lo;
    out.hi = hi;
  } else {
    out.lo = out.hi = draws.empty() ? 0.0 : draws[0];
  }
  out.degenerate = out.hi == out.lo;
  out.covered = out.lo <= truth && truth <= out.hi;
  out.abs_error = std::abs(out.posterior_mean - truth);
  out.sign_match = truth == 0.0 ? out.posterior_mean == 0.0
                                : (truth > 0.0) == (out.posterior_mean > 0.0);
  return out;
}

double matrix_rmse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace

RecoveryMetrics recovery_score(const PanelTruth& truth, const ChainEvidence& chain,
                               double level) {
  const int r_count = chain.n_attributes;
  const int j_count = chain.n_brands;
  if (truth.beta.rows() != chain.n_households ||
      truth.alpha.cols() != j_count || truth.delta.cols() != r_count ||
      truth.pop.delta_mean.size() != r_count ||
      truth.attributes.n_brands() != j_count ||
      truth.attributes.n_attributes() != r_count) {
    throw std::invalid_argument("recovery_score: truth/chain dimension mismatch");
  }

  RecoveryMetrics out;
  out.tracked.push_back(score_param("beta_mean:display", truth.pop.beta_mean[0],
                                    chain.display_mean_draws, level));
  out.tracked.push_back(score_param("beta_mean:price", truth.pop.beta_mean[1],
                                    chain.price_mean_draws, level));
  // Per-brand population tangible values, as deviations from the brand mean:
  // the common level of the intercepts is invisible to the choice likelihood
  // (only utility differences matter), so only the deviations are tracked.
  const std::size_t n = chain.display_mean_draws.size();
  std::vector<double> series(n);
  {
    Eigen::MatrixXd tangible_draws(n, j_count);
    Eigen::VectorXd tangible_truth(j_count);
    for (int j = 0; j < j_count; ++j) {
      const Eigen::VectorXd attr_row = truth.attributes.row(j);
      tangible_truth[j] = tangible_value(truth.pop.delta_mean, attr_row);
      for (std::size_t d = 0; d < n; ++d) {
        tangible_draws(d, j) = tangible_value(chain.delta_mean_draws.row(d), attr_row);
      }
    }
    const double truth_level = tangible_truth.mean();
    const Eigen::VectorXd draw_level = tangible_draws.rowwise().mean();
    for (int j = 0; j < j_count; ++j) {
      for (std::size_t d = 0; d < n; ++d) {
        series[d] = tangible_draws(d, j) - draw_level[d];
      }
      out.tracked.push_back(score_param("tangible_dev:brand" + std::to_string(j + 1),
                                        tangible_truth[j] - truth_level, series,
                                        level));
    }
  }
  for (int r = 0; r < r_count; ++r) {
    for (std::size_t d = 0; d < n; ++d) series[d] = chain.delta_mean_draws(d, r);
    out.tracked.push_back(score_param("delta_mean:" + std::to_string(r),
                                      truth.pop.delta_mean[r], series, level));
  }
  for (int r = 0; r < r_count; ++r) {
    for (std::size_t d = 0; d < n; ++d) series[d] = chain.delta_sd_draws(d, r);
    out.extras.push_back(score_param("delta_sd:" + std::to_string(r),
                                     std::sqrt(truth.pop.delta_cov(r, r)), series,
                                     level));
  }
  for (int k = 0; k < 2; ++k) {
    for (std::size_t d = 0; d < n; ++d) series[d] = chain.beta_sd_draws(d, k);
    out.extras.push_back(score_param(
        std::string("beta_sd:") + (k == 0 ? "display" : "price"),
        std::sqrt(truth.pop.beta_cov(k, k)), series, level));
  }
  out.extras.push_back(score_param("sigma_phi", truth.pop.intangible_var,
                                   chain.sigma_phi_draws, level));

  double se = 0.0;
  int signs = 0;
  for (const auto& p : out.tracked) {
    se += p.abs_error * p.abs_error;
    if (p.covered) ++out.coverage_count;
    if (p.sign_match) ++signs;
    out.degenerate = out.degenerate || p.degenerate;
  }
  out.tracked_rmse = std::sqrt(se / static_cast<double>(out.tracked.size()));
  out.sign_agreement =
      static_cast<double>(signs) / static_cast<double>(out.tracked.size());

  out.beta_display_rmse = std::sqrt(
      (chain.household_beta_mean.col(0) - truth.beta.col(0)).squaredNorm() /
      static_cast<double>(truth.beta.rows()));
  out.beta_price_rmse = std::sqrt(
      (chain.household_beta_mean.col(1) - truth.beta.col(1)).squaredNorm() /
      static_cast<double>(truth.beta.rows()));
  out.alpha_rmse = matrix_rmse(chain.household_alpha_mean, truth.alpha);
  out.delta_rmse = matrix_rmse(chain.household_delta_mean, truth.delta);

  int negative = 0;
  for (int h = 0; h < chain.n_households; ++h) {
    if (chain.household_beta_mean(h, 1) < 0.0) ++negative;
  }
  out.price_negative_share =
      static_cast<double>(negative) / static_cast<double>(chain.n_households);
  return out;
}

}  // namespace hbprobit

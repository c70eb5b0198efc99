#include "hbprobit/gibbs.hpp"

#include <cmath>
#include <exception>
#include <fstream>

#include "hbprobit/brand_value.hpp"
#include "hbprobit/stat_kernels.hpp"
#include "json_util.hpp"

namespace hbprobit {

namespace {

// Stream ids inside one iteration key.
enum StreamId : std::uint64_t {
  kLatentStream = 0,
  kBetaStream = 1,
  kAlphaStream = 2,
  kDeltaStream = 3,
  kHyperStream = 4,
};

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd chol = factorize_spd(a);
  Eigen::MatrixXd inv = chol.transpose().triangularView<Eigen::Upper>().solve(
      chol.triangularView<Eigen::Lower>().solve(
          Eigen::MatrixXd::Identity(n, n)));
  return 0.5 * (inv + inv.transpose());
}

// Runs fn(h) for every household. Households own independent rng streams,
// so the serial, reversed, and OpenMP paths produce identical states.
template <typename F>
void for_each_household(int n_households, const EngineOptions& opts, F&& fn) {
  if (opts.n_threads > 1) {
    std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(static) num_threads(opts.n_threads)
    for (int h = 0; h < n_households; ++h) {
      try {
        fn(h);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
  } else if (opts.reverse_households) {
    for (int h = n_households - 1; h >= 0; --h) fn(h);
  } else {
    for (int h = 0; h < n_households; ++h) fn(h);
  }
}

int global_row_offset(const PanelDataset& data, int household) {
  return static_cast<int>(data.household_occasions(household).data() -
                          data.occasions().data());
}

}  // namespace

const char* conditional_name(Conditional c) {
  switch (c) {
    case Conditional::latent_utilities: return "latent_utilities";
    case Conditional::household_marketing: return "household_marketing";
    case Conditional::household_intercepts: return "household_intercepts";
    case Conditional::engineering_params: return "engineering_params";
    case Conditional::population_hyperparams: return "population_hyperparams";
  }
  return "unknown";
}

SamplerError::SamplerError(int iteration_, Conditional conditional_,
                           const std::string& what_)
    : std::runtime_error("iteration " + std::to_string(iteration_) +
                         ", conditional " + conditional_name(conditional_) +
                         ": " + what_),
      iteration(iteration_),
      conditional(conditional_) {}

HouseholdParams Snapshot::household(int h) const {
  HouseholdParams out;
  out.alpha = alpha.row(h);
  out.beta = beta.row(h);
  out.delta = delta.row(h);
  out.intangible = intangible.row(h);
  return out;
}

SamplerState init_state(const PanelDataset& data, const BrandAttributeMatrix& attrs,
                        const PriorConfig& priors, RngKey key,
                        const EngineOptions& opts) {
  const int h_count = data.n_households();
  const int j_count = data.n_brands();
  const int r_count = attrs.n_attributes();

  SamplerState s;
  s.alpha = Eigen::MatrixXd::Zero(h_count, j_count);
  s.beta = Eigen::MatrixXd::Zero(h_count, 2);
  s.delta = Eigen::MatrixXd::Zero(h_count, r_count);
  s.intangible = Eigen::MatrixXd::Zero(h_count, j_count);

  s.pop.beta_mean = priors.beta_mean_loc;
  s.pop.beta_cov = priors.beta_cov_df > 3.0
                       ? Eigen::Matrix2d(priors.beta_cov_scale /
                                         (priors.beta_cov_df - 3.0))
                       : priors.beta_cov_scale;
  s.pop.delta_mean = priors.delta_mean_loc;
  s.pop.delta_cov = priors.delta_cov_df > r_count + 1.0
                        ? Eigen::MatrixXd(priors.delta_cov_scale /
                                          (priors.delta_cov_df - r_count - 1.0))
                        : priors.delta_cov_scale;
  s.pop.intangible_var = priors.sigma_phi_shape > 1.0
                             ? priors.sigma_phi_scale / (priors.sigma_phi_shape - 1.0)
                             : priors.sigma_phi_scale;

  // One consistent draw of the latent utilities around zero means: the
  // chosen brand from the positive half-line, the rest from the negative.
  s.latent.resize(data.n_occasions(), j_count);
  for_each_household(h_count, opts, [&](int h) {
    Philox rng = key.child(h).stream();
    const auto occs = data.household_occasions(h);
    const int row0 = global_row_offset(data, h);
    for (std::size_t t = 0; t < occs.size(); ++t) {
      const int row = row0 + static_cast<int>(t);
      for (int j = 0; j < j_count; ++j) {
        const TruncationBounds b = (j == occs[t].chosen)
                                       ? TruncationBounds::at_least(0.0)
                                       : TruncationBounds::at_most(0.0);
        s.latent(row, j) = sample_truncated_normal(0.0, 1.0, b, rng);
      }
    }
  });
  return s;
}

void draw_latent_utilities(SamplerState& state, const PanelDataset& data,
                           RngKey key, const EngineOptions& opts) {
  const int j_count = data.n_brands();
  for_each_household(data.n_households(), opts, [&](int h) {
    Philox rng = key.child(h).stream();
    const auto occs = data.household_occasions(h);
    const int row0 = global_row_offset(data, h);
    const double b_display = state.beta(h, 0);
    const double b_price = state.beta(h, 1);
    for (std::size_t t = 0; t < occs.size(); ++t) {
      const auto& occ = occs[t];
      const int row = row0 + static_cast<int>(t);
      const int chosen = occ.chosen;
      // One brand at a time; bounds use the current values of the others,
      // so the chosen brand stays the argmax after every single draw.
      for (int j = 0; j < j_count; ++j) {
        const double mean = state.alpha(h, j) + b_display * occ.displays[j] +
                            b_price * occ.prices[j];
        if (j == chosen) {
          double lb = -std::numeric_limits<double>::infinity();
          for (int k = 0; k < j_count; ++k) {
            if (k != chosen) lb = std::max(lb, state.latent(row, k));
          }
          state.latent(row, j) = sample_truncated_normal(
              mean, 1.0, TruncationBounds{lb, std::numeric_limits<double>::infinity()},
              rng);
        } else {
          state.latent(row, j) = sample_truncated_normal(
              mean, 1.0, TruncationBounds::at_most(state.latent(row, chosen)), rng);
        }
      }
    }
  });
}

void draw_household_marketing(SamplerState& state, const PanelDataset& data,
                              const PriorConfig& priors, RngKey key,
                              const EngineOptions& opts) {
  const int h_count = data.n_households();
  const int j_count = data.n_brands();
  const Eigen::Matrix2d cov_inv = spd_inverse(state.pop.beta_cov);

  // Per-household regression moments against the current latent utilities.
  std::vector<Eigen::Matrix2d> xtx(h_count);
  std::vector<Eigen::Vector2d> xty(h_count);
  for_each_household(h_count, opts, [&](int h) {
    Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
    Eigen::Vector2d t_vec = Eigen::Vector2d::Zero();
    const auto occs = data.household_occasions(h);
    const int row0 = global_row_offset(data, h);
    for (std::size_t t = 0; t < occs.size(); ++t) {
      const auto& occ = occs[t];
      const int row = row0 + static_cast<int>(t);
      for (int j = 0; j < j_count; ++j) {
        const Eigen::Vector2d x(occ.displays[j], occ.prices[j]);
        const double resid = state.latent(row, j) - state.alpha(h, j);
        s.noalias() += x * x.transpose();
        t_vec.noalias() += x * resid;
      }
    }
    xtx[h] = s;
    xty[h] = t_vec;
  });

  // Blocked update: beta_mean is drawn first from its conditional with the
  // household coefficients integrated out (Woodbury on the per-household
  // regressions), then each beta_h given the fresh mean. Sampling the pair
  // as one block removes the slow random walk a mean-given-coefficients
  // update would induce.
  {
    Eigen::Matrix2d prec =
        priors.beta_mean_precision * Eigen::Matrix2d::Identity();
    Eigen::Vector2d info = prec * priors.beta_mean_loc;
    for (int h = 0; h < h_count; ++h) {
      const Eigen::Matrix2d m = cov_inv + xtx[h];
      const Eigen::Matrix2d m_inv = spd_inverse(m);
      prec.noalias() += xtx[h] - xtx[h] * m_inv * xtx[h];
      info.noalias() += xty[h] - xtx[h] * m_inv * xty[h];
    }
    const Eigen::Matrix2d cov = spd_inverse(prec);
    Philox rng = key.child(h_count).stream();
    state.pop.beta_mean = sample_mvn(cov * info, cov, rng);
  }

  for_each_household(h_count, opts, [&](int h) {
    Philox rng = key.child(h).stream();
    const LinearUpdate up = bayes_linear_update_moments(
        state.pop.beta_mean, cov_inv, xtx[h], xty[h], 1.0);
    state.beta.row(h) = sample_mvn(up.mean, up.cov, rng);
  });
}

void draw_household_intercepts(SamplerState& state, const PanelDataset& data,
                               RngKey key, const EngineOptions& opts) {
  const int j_count = data.n_brands();
  const double sigma_phi = state.pop.intangible_var;
  for_each_household(data.n_households(), opts, [&](int h) {
    Philox rng = key.child(h).stream();
    const auto occs = data.household_occasions(h);
    const int row0 = global_row_offset(data, h);
    const double t_count = static_cast<double>(occs.size());
    for (int j = 0; j < j_count; ++j) {
      // Current tangible value via the decomposition identity; the prior for
      // alpha_hj is N(tangible, sigma^2_phi).
      const double tangible = state.alpha(h, j) - state.intangible(h, j);
      double resid_sum = 0.0;
      for (std::size_t t = 0; t < occs.size(); ++t) {
        const auto& occ = occs[t];
        const int row = row0 + static_cast<int>(t);
        resid_sum += state.latent(row, j) - state.beta(h, 0) * occ.displays[j] -
                     state.beta(h, 1) * occ.prices[j];
      }
      const double precision = t_count + 1.0 / sigma_phi;
      const double variance = 1.0 / precision;
      const double mean = (tangible / sigma_phi + resid_sum) * variance;
      state.alpha(h, j) = mean + std::sqrt(variance) * sample_standard_normal(rng);
      state.intangible(h, j) = state.alpha(h, j) - tangible;
    }
  });
}

void draw_engineering_params(SamplerState& state, const BrandAttributeMatrix& attrs,
                             const PriorConfig& priors, RngKey key,
                             const EngineOptions& opts) {
  const int h_count = static_cast<int>(state.alpha.rows());
  const int j_count = attrs.n_brands();
  const int r_count = attrs.n_attributes();
  if (r_count > j_count) {
    throw std::invalid_argument("attribute matrix needs R <= J");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(attrs.values);
  if (qr.rank() < r_count) {
    throw std::invalid_argument("attribute matrix is rank-deficient");
  }
  const Eigen::MatrixXd cov_inv = spd_inverse(state.pop.delta_cov);
  const Eigen::MatrixXd dtd = attrs.values.transpose() * attrs.values;
  const double sigma_phi = state.pop.intangible_var;

  // Blocked update, same structure as the marketing stage: delta_mean first
  // with the household delta_h integrated out. Marginally each alpha_h is
  // N(D delta_mean, D delta_cov D' + sigma_phi I).
  {
    const Eigen::MatrixXd v =
        attrs.values * state.pop.delta_cov * attrs.values.transpose() +
        sigma_phi * Eigen::MatrixXd::Identity(j_count, j_count);
    const Eigen::MatrixXd v_inv = spd_inverse(v);
    const Eigen::MatrixXd dtv = attrs.values.transpose() * v_inv;
    Eigen::MatrixXd prec = priors.delta_mean_precision *
                           Eigen::MatrixXd::Identity(r_count, r_count);
    prec.noalias() += static_cast<double>(h_count) * dtv * attrs.values;
    Eigen::VectorXd info = priors.delta_mean_precision * priors.delta_mean_loc;
    info.noalias() += dtv * state.alpha.colwise().sum().transpose();
    const Eigen::MatrixXd cov = spd_inverse(prec);
    Philox rng = key.child(h_count).stream();
    state.pop.delta_mean = sample_mvn(cov * info, cov, rng);
  }

  for_each_household(h_count, opts, [&](int h) {
    Philox rng = key.child(h).stream();
    const Eigen::VectorXd xty = attrs.values.transpose() * state.alpha.row(h).transpose();
    const LinearUpdate up = bayes_linear_update_moments(
        state.pop.delta_mean, cov_inv, dtd, xty, sigma_phi);
    state.delta.row(h) = sample_mvn(up.mean, up.cov, rng);
    const Eigen::VectorXd delta_h = state.delta.row(h);
    for (int j = 0; j < j_count; ++j) {
      state.intangible(h, j) =
          state.alpha(h, j) - tangible_value(delta_h, attrs.row(j));
    }
  });
}

void draw_population_hyperparams(SamplerState& state, const PriorConfig& priors,
                                 RngKey key) {
  Philox rng = key.stream();
  const int h_count = static_cast<int>(state.alpha.rows());
  const int j_count = static_cast<int>(state.alpha.cols());
  const double n = static_cast<double>(h_count);

  // The population means are drawn inside the beta and delta stages as part
  // of their blocked updates; this stage handles the spreads.
  // beta_cov | {beta_h}, beta_mean
  {
    Eigen::Matrix2d scatter = priors.beta_cov_scale;
    for (int h = 0; h < h_count; ++h) {
      const Eigen::Vector2d d =
          state.beta.row(h).transpose() - state.pop.beta_mean;
      scatter.noalias() += d * d.transpose();
    }
    state.pop.beta_cov =
        sample_inverse_wishart(priors.beta_cov_df + n, scatter, rng);
  }
  // delta_cov | {delta_h}, delta_mean
  {
    Eigen::MatrixXd scatter = priors.delta_cov_scale;
    for (int h = 0; h < h_count; ++h) {
      const Eigen::VectorXd d =
          state.delta.row(h).transpose() - state.pop.delta_mean;
      scatter.noalias() += d * d.transpose();
    }
    state.pop.delta_cov =
        sample_inverse_wishart(priors.delta_cov_df + n, scatter, rng);
  }
  // sigma^2_phi | residuals alpha - D delta, pooled over households and brands
  {
    const double shape = priors.sigma_phi_shape + 0.5 * n * j_count;
    const double scale =
        priors.sigma_phi_scale + 0.5 * state.intangible.squaredNorm();
    state.pop.intangible_var = sample_inverse_gamma(shape, scale, rng);
  }
}

double utility_residual_ss(const SamplerState& state, const PanelDataset& data) {
  double ss = 0.0;
  const int j_count = data.n_brands();
  const auto& occs = data.occasions();
  for (std::size_t row = 0; row < occs.size(); ++row) {
    const auto& occ = occs[row];
    const int h = occ.household;
    for (int j = 0; j < j_count; ++j) {
      const double mean = state.alpha(h, j) + state.beta(h, 0) * occ.displays[j] +
                          state.beta(h, 1) * occ.prices[j];
      const double r = state.latent(static_cast<int>(row), j) - mean;
      ss += r * r;
    }
  }
  return ss;
}

bool truncation_consistent(const SamplerState& state, const PanelDataset& data) {
  const int j_count = data.n_brands();
  const auto& occs = data.occasions();
  for (std::size_t row = 0; row < occs.size(); ++row) {
    const double chosen_u = state.latent(static_cast<int>(row), occs[row].chosen);
    for (int j = 0; j < j_count; ++j) {
      if (state.latent(static_cast<int>(row), j) > chosen_u) return false;
    }
  }
  return true;
}

ChainDraws run_chain(const PanelDataset& data, const BrandAttributeMatrix& attrs,
                     const PriorConfig& priors, const McmcConfig& config,
                     RngKey root, const EngineOptions& opts,
                     const RunHooks& hooks) {
  {
    auto issues = config.validate();
    const auto prior_issues = priors.validate(attrs.n_attributes());
    issues.insert(issues.end(), prior_issues.begin(), prior_issues.end());
    const auto data_issues = validate_panel(data, attrs);
    issues.insert(issues.end(), data_issues.begin(), data_issues.end());
    if (!issues.empty()) {
      std::string msg = "run_chain preconditions violated:";
      for (const auto& s : issues) msg += "\n  - " + s;
      throw std::invalid_argument(msg);
    }
  }

  ChainDraws out;
  out.n_households = data.n_households();
  out.n_brands = data.n_brands();
  out.n_attributes = attrs.n_attributes();
  out.config = config;

  // Constant design columns make the marketing update prior-dominated;
  // flag them once up front.
  for (int h = 0; h < data.n_households(); ++h) {
    const auto occs = data.household_occasions(h);
    double d_min = 1.0, d_max = 0.0, p_min = 0.0, p_max = 0.0;
    bool first = true;
    for (const auto& occ : occs) {
      for (int j = 0; j < data.n_brands(); ++j) {
        if (first) {
          d_min = d_max = occ.displays[j];
          p_min = p_max = occ.prices[j];
          first = false;
        } else {
          d_min = std::min(d_min, occ.displays[j]);
          d_max = std::max(d_max, occ.displays[j]);
          p_min = std::min(p_min, occ.prices[j]);
          p_max = std::max(p_max, occ.prices[j]);
        }
      }
    }
    if (d_min == d_max || p_min == p_max) {
      ++out.collinearity_warnings;
      if (hooks.warning) {
        hooks.warning("household '" + data.household_ids()[h] +
                      "': constant " + (d_min == d_max ? "display" : "price") +
                      " column, marketing draw is prior-dominated");
      }
    }
  }

  SamplerState state = init_state(data, attrs, priors, root.child(0), opts);

  const auto guarded = [&](int iter, Conditional which, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      throw SamplerError(iter, which, e.what());
    }
    if (hooks.after_update) hooks.after_update(iter, which, state);
  };

  const int expected =
      (config.n_iterations - config.n_burn_in) / config.thin;
  out.draws.reserve(static_cast<std::size_t>(std::max(expected, 0)));

  for (int iter = 0; iter < config.n_iterations; ++iter) {
    const RngKey it = root.child(static_cast<std::uint64_t>(iter) + 1);
    guarded(iter, Conditional::latent_utilities,
            [&] { draw_latent_utilities(state, data, it.child(kLatentStream), opts); });
    guarded(iter, Conditional::household_marketing, [&] {
      draw_household_marketing(state, data, priors, it.child(kBetaStream), opts);
    });
    guarded(iter, Conditional::household_intercepts,
            [&] { draw_household_intercepts(state, data, it.child(kAlphaStream), opts); });
    guarded(iter, Conditional::engineering_params, [&] {
      draw_engineering_params(state, attrs, priors, it.child(kDeltaStream), opts);
    });
    guarded(iter, Conditional::population_hyperparams,
            [&] { draw_population_hyperparams(state, priors, it.child(kHyperStream)); });

    if (hooks.progress && (iter + 1) % 100 == 0) {
      hooks.progress(iter + 1, utility_residual_ss(state, data));
    }
    if (iter >= config.n_burn_in &&
        (iter - config.n_burn_in + 1) % config.thin == 0) {
      out.draws.push_back(Snapshot{state.alpha, state.beta, state.delta,
                                   state.intangible, state.pop});
    }
    if (config.checkpoint_every > 0 &&
        (iter + 1) % config.checkpoint_every == 0) {
      write_checkpoint(config.checkpoint_path, iter + 1, state);
    }
  }
  return out;
}

void write_checkpoint(const std::string& path, int iteration,
                      const SamplerState& state) {
  nlohmann::ordered_json j;
  j["format"] = "hbprobit-checkpoint";
  j["version"] = 1;
  j["iteration"] = iteration;
  j["latent"] = detail::matrix_json(state.latent);
  j["alpha"] = detail::matrix_json(state.alpha);
  j["beta"] = detail::matrix_json(state.beta);
  j["delta"] = detail::matrix_json(state.delta);
  j["intangible"] = detail::matrix_json(state.intangible);
  j["pop"] = {{"beta_mean", detail::vector_json(state.pop.beta_mean)},
              {"beta_cov", detail::matrix_json(state.pop.beta_cov)},
              {"delta_mean", detail::vector_json(state.pop.delta_mean)},
              {"delta_cov", detail::matrix_json(state.pop.delta_cov)},
              {"intangible_var", state.pop.intangible_var}};
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write checkpoint: " + path);
  out << j.dump(1) << "\n";
}

}  // namespace hbprobit

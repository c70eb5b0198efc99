#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hbprobit/panel.hpp"
#include "hbprobit/params.hpp"
#include "hbprobit/rng.hpp"

namespace hbprobit {

enum class Conditional {
  latent_utilities,
  household_marketing,
  household_intercepts,
  engineering_params,
  population_hyperparams,
};

const char* conditional_name(Conditional c);

// Full sampler state: latent utilities for every (household, occasion,
// brand), current household-level parameters, current population layer.
struct SamplerState {
  Eigen::MatrixXd latent;      // n_occasions x J, row order of PanelDataset
  Eigen::MatrixXd alpha;       // H x J
  Eigen::MatrixXd beta;        // H x 2 (display, price)
  Eigen::MatrixXd delta;       // H x R
  Eigen::MatrixXd intangible;  // H x J
  PopulationParams pop;
};

struct Snapshot {
  Eigen::MatrixXd alpha, beta, delta, intangible;
  PopulationParams pop;

  HouseholdParams household(int h) const;
};

// Post-burn-in, thinned draws. Draw count is
// floor((n_iterations - n_burn_in) / thin).
struct ChainDraws {
  int n_households = 0;
  int n_brands = 0;
  int n_attributes = 0;
  McmcConfig config;  // echo of the run configuration
  std::vector<Snapshot> draws;
  int collinearity_warnings = 0;
};

// A kernel failure aborts the chain with the iteration index and the
// offending conditional named.
struct SamplerError : std::runtime_error {
  SamplerError(int iteration_, Conditional conditional_, const std::string& what_);
  int iteration;
  Conditional conditional;
};

struct EngineOptions {
  int n_threads = 1;               // 1 = serial reference path
  bool reverse_households = false; // testing aid: household order invariance
};

struct RunHooks {
  // One call per 100 iterations: (iteration, sum of squared utility residuals).
  std::function<void(int, double)> progress;
  // Called after every conditional update; used by instrumented tests.
  std::function<void(int, Conditional, const SamplerState&)> after_update;
  std::function<void(const std::string&)> warning;
};

// Zero-start initialization: household parameters at zero, population layer
// at prior means, latent utilities drawn once from truncated normals at zero
// mean so the truncation constraint holds from the first sweep.
SamplerState init_state(const PanelDataset& data, const BrandAttributeMatrix& attrs,
                        const PriorConfig& priors, RngKey key,
                        const EngineOptions& opts = {});

// Full-conditional updates. Each household draws from its own rng stream
// derived from `key` (the population-mean block uses stream H), so results
// do not depend on household processing order or thread count.
//
// The marketing and engineering stages are blocked updates: the population
// mean is drawn first from its conditional with the household coefficients
// integrated out, then the household coefficients given the fresh mean.
// Sampling the pair as one exact block keeps the population means mixing at
// the spec'd chain lengths; a mean-given-coefficients update would random
// walk through the household shrinkage.
void draw_latent_utilities(SamplerState& state, const PanelDataset& data,
                           RngKey key, const EngineOptions& opts = {});
void draw_household_marketing(SamplerState& state, const PanelDataset& data,
                              const PriorConfig& priors, RngKey key,
                              const EngineOptions& opts = {});
void draw_household_intercepts(SamplerState& state, const PanelDataset& data,
                               RngKey key, const EngineOptions& opts = {});
void draw_engineering_params(SamplerState& state, const BrandAttributeMatrix& attrs,
                             const PriorConfig& priors, RngKey key,
                             const EngineOptions& opts = {});
void draw_population_hyperparams(SamplerState& state, const PriorConfig& priors,
                                 RngKey key);

// Sweep order: latent utilities -> beta -> alpha -> delta/intangibles ->
// hyperparameters, repeated n_iterations times. Deterministic given the key.
ChainDraws run_chain(const PanelDataset& data, const BrandAttributeMatrix& attrs,
                     const PriorConfig& priors, const McmcConfig& config,
                     RngKey root, const EngineOptions& opts = {},
                     const RunHooks& hooks = {});

// Sum of squared utility residuals (the progress-stream fit proxy).
double utility_residual_ss(const SamplerState& state, const PanelDataset& data);

// True when the chosen brand's latent utility is the maximum at every
// occasion.
bool truncation_consistent(const SamplerState& state, const PanelDataset& data);

// Versioned structured-text snapshot of the full sampler state.
void write_checkpoint(const std::string& path, int iteration,
                      const SamplerState& state);

}  // namespace hbprobit

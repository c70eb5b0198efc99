#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace hbprobit {

// One household's parameters. The brand value decomposition is an identity:
// alpha[j] == dot(delta, D_j) + intangible[j] in every stored draw.
struct HouseholdParams {
  Eigen::VectorXd alpha;       // length J, brand intercepts (utility units)
  Eigen::Vector2d beta;        // (display, price) coefficients
  Eigen::VectorXd delta;       // length R, engineering parameters
  Eigen::VectorXd intangible;  // length J, residual brand value
};

// Population layer governing household heterogeneity: continuous random
// coefficients rather than discrete segments.
struct PopulationParams {
  Eigen::Vector2d beta_mean;
  Eigen::Matrix2d beta_cov;
  Eigen::VectorXd delta_mean;
  Eigen::MatrixXd delta_cov;
  double intangible_var = 1.0;  // sigma^2_phi
};

// Hyper-priors for the population layer. The defaults are weakly
// informative: zero hyper-means with small precision, inverse-Wishart
// scales at the identity with dimension+3 degrees of freedom, and
// inverse-gamma(2.5, 1) on the intangible variance.
struct PriorConfig {
  Eigen::Vector2d beta_mean_loc = Eigen::Vector2d::Zero();
  double beta_mean_precision = 0.01;
  Eigen::VectorXd delta_mean_loc;
  double delta_mean_precision = 0.01;
  double beta_cov_df = 5.0;
  Eigen::Matrix2d beta_cov_scale = Eigen::Matrix2d::Identity();
  double delta_cov_df = 0.0;
  Eigen::MatrixXd delta_cov_scale;
  double sigma_phi_shape = 2.5;
  double sigma_phi_scale = 1.0;

  static PriorConfig defaults(int n_attributes);

  std::vector<std::string> validate(int n_attributes) const;
};

struct McmcConfig {
  int n_iterations = 4000;
  int n_burn_in = 1000;
  int thin = 1;
  std::uint64_t rng_seed = 1;
  double hpd_level = 0.95;
  int checkpoint_every = 0;  // 0 disables checkpointing
  std::string checkpoint_path;

  std::vector<std::string> validate() const;
};

}  // namespace hbprobit

#include "hbprobit/params.hpp"

namespace hbprobit {

PriorConfig PriorConfig::defaults(int n_attributes) {
  PriorConfig out;
  out.delta_mean_loc = Eigen::VectorXd::Zero(n_attributes);
  out.delta_cov_df = n_attributes + 3.0;
  out.delta_cov_scale = Eigen::MatrixXd::Identity(n_attributes, n_attributes);
  return out;
}

std::vector<std::string> PriorConfig::validate(int n_attributes) const {
  std::vector<std::string> issues;
  if (delta_mean_loc.size() != n_attributes) {
    issues.push_back("delta hyper-mean length differs from attribute count");
  }
  if (beta_mean_precision < 0.0 || delta_mean_precision < 0.0) {
    issues.push_back("hyper-mean precisions must be non-negative");
  }
  if (!(beta_cov_df > 1.0)) {
    issues.push_back("beta_cov_df must exceed dimension - 1 = 1");
  }
  if (!(delta_cov_df > n_attributes - 1.0)) {
    issues.push_back("delta_cov_df must exceed dimension - 1");
  }
  if (delta_cov_scale.rows() != n_attributes ||
      delta_cov_scale.cols() != n_attributes) {
    issues.push_back("delta_cov_scale has wrong dimensions");
  }
  if (!(sigma_phi_shape > 0.0) || !(sigma_phi_scale > 0.0)) {
    issues.push_back("inverse-gamma shape and scale must be positive");
  }
  return issues;
}

std::vector<std::string> McmcConfig::validate() const {
  std::vector<std::string> issues;
  if (n_iterations < 1) issues.push_back("n_iterations must be at least 1");
  if (n_burn_in < 0) issues.push_back("n_burn_in must be non-negative");
  if (n_burn_in >= n_iterations) {
    issues.push_back("n_burn_in must be smaller than n_iterations");
  }
  if (thin < 1) issues.push_back("thin must be at least 1");
  if (!(hpd_level > 0.0 && hpd_level < 1.0)) {
    issues.push_back("hpd_level must lie in (0,1)");
  }
  if (checkpoint_every < 0) issues.push_back("checkpoint_every must be >= 0");
  if (checkpoint_every > 0 && checkpoint_path.empty()) {
    issues.push_back("checkpoint_every set but checkpoint_path empty");
  }
  return issues;
}

}  // namespace hbprobit

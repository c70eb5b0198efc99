#pragma once

#include <Eigen/Dense>
#include <limits>

#include "hbprobit/rng.hpp"

namespace hbprobit {

// Truncation region for a univariate normal draw. Infinite endpoints mean
// no truncation on that side.
struct TruncationBounds {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  static TruncationBounds none() { return {}; }
  static TruncationBounds at_least(double a) {
    return {a, std::numeric_limits<double>::infinity()};
  }
  static TruncationBounds at_most(double b) {
    return {-std::numeric_limits<double>::infinity(), b};
  }
  static TruncationBounds between(double a, double b) { return {a, b}; }

  bool valid() const { return lower < upper; }
};

// Standard normal cdf, accurate in both tails.
double standard_normal_cdf(double x);

// Standard normal quantile. Rational initial guess refined by one Halley
// step against the erfc-based cdf; absolute error is below 1e-13 across
// (0, 1). Throws std::invalid_argument outside the open unit interval.
double standard_normal_quantile(double p);

double sample_standard_normal(Philox& rng);

// Gamma(shape, scale 1) via Marsaglia-Tsang squeeze; shape < 1 handled by
// the boost-and-power trick. Throws on non-positive shape.
double sample_gamma(double shape, Philox& rng);

// Normal(mean, sd^2) restricted to bounds. Inversion in the central region;
// exponential-proposal rejection once the standardized region lies beyond
// four standard deviations, where inversion loses precision. The returned
// value is strictly inside the bounds.
double sample_truncated_normal(double mean, double sd,
                               const TruncationBounds& bounds, Philox& rng);

// Multivariate normal draw via Cholesky. Throws on dimension mismatch or a
// factorization failure.
Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov, Philox& rng);

// Inverse-Wishart(df, scale) draw (mean scale/(df-p-1) for df > p+1),
// sampled through a Bartlett factor of the Wishart on scale^{-1}. Requires
// df > p - 1 and a symmetric positive-definite scale.
Eigen::MatrixXd sample_inverse_wishart(double df, const Eigen::MatrixXd& scale,
                                       Philox& rng);

// Inverse-gamma(shape, scale) draw, mean scale/(shape-1).
double sample_inverse_gamma(double shape, double scale, Philox& rng);

// Lower Cholesky factor of a symmetric positive-definite matrix. Throws
// std::invalid_argument when the input is not symmetric or not positive
// definite (which inside the sampler signals a numerically broken state).
Eigen::MatrixXd factorize_spd(const Eigen::MatrixXd& a);

struct LinearUpdate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Conjugate normal regression update with known noise variance:
//   cov  = (prior_precision + X'X / noise_var)^{-1}
//   mean = cov (prior_precision prior_mean + X'y / noise_var)
// The moments overload takes X'X and X'y directly so hot loops can
// accumulate them without materializing X.
LinearUpdate bayes_linear_update(const Eigen::VectorXd& prior_mean,
                                 const Eigen::MatrixXd& prior_precision,
                                 const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& y, double noise_var);

LinearUpdate bayes_linear_update_moments(const Eigen::VectorXd& prior_mean,
                                         const Eigen::MatrixXd& prior_precision,
                                         const Eigen::MatrixXd& xtx,
                                         const Eigen::VectorXd& xty,
                                         double noise_var);

}  // namespace hbprobit

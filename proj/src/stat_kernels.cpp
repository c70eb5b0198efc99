#include "hbprobit/stat_kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace hbprobit {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;

// Acklam's rational approximation to the normal quantile, |rel err| < 1.2e-9.
double quantile_seed(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// One-sided rejection sampler for the standard normal restricted to
// [a, b) with a >= 4: shifted exponential proposal (Robert 1995).
double sample_tail(double a, double b, Philox& rng) {
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log(rng.next_double()) / alpha;
    if (z >= b) continue;
    const double diff = z - alpha;
    if (rng.next_double() <= std::exp(-0.5 * diff * diff)) return z;
  }
}

double sample_std_truncated(double lo, double hi, Philox& rng) {
  constexpr double kTail = 4.0;
  if (lo > kTail) return sample_tail(lo, hi, rng);
  if (hi < -kTail) return -sample_tail(-hi, -lo, rng);
  const double f_lo = std::isinf(lo) ? 0.0 : standard_normal_cdf(lo);
  const double f_hi = std::isinf(hi) ? 1.0 : standard_normal_cdf(hi);
  const double u = f_lo + (f_hi - f_lo) * rng.next_double();
  return standard_normal_quantile(u);
}

void require_square_symmetric(const Eigen::MatrixXd& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix is not square");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
  }
}

}  // namespace

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double standard_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("standard_normal_quantile: p outside (0,1)");
  }
  double x = quantile_seed(p);
  // Halley refinement against the erfc-based cdf.
  const double err = standard_normal_cdf(x) - p;
  const double u = err * kSqrt2Pi * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double sample_standard_normal(Philox& rng) {
  return standard_normal_quantile(rng.next_double());
}

double sample_gamma(double shape, Philox& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw std::invalid_argument("sample_gamma: shape must be positive");
  }
  if (shape < 1.0) {
    const double u = rng.next_double();
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = sample_standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_double();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_truncated_normal(double mean, double sd,
                               const TruncationBounds& bounds, Philox& rng) {
  if (!std::isfinite(mean) || !(sd > 0.0) || !std::isfinite(sd)) {
    throw std::invalid_argument("sample_truncated_normal: bad mean or sd");
  }
  if (!bounds.valid()) {
    throw std::invalid_argument("sample_truncated_normal: lower >= upper");
  }
  const double lo = (bounds.lower - mean) / sd;
  const double hi = (bounds.upper - mean) / sd;
  const double z = sample_std_truncated(lo, hi, rng);
  double x = mean + sd * z;
  // Inversion can round onto an endpoint; keep the draw strictly inside.
  if (std::isfinite(bounds.lower) && x <= bounds.lower) {
    x = std::nextafter(bounds.lower, bounds.upper);
  }
  if (std::isfinite(bounds.upper) && x >= bounds.upper) {
    x = std::nextafter(bounds.upper, bounds.lower);
  }
  return x;
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov, Philox& rng) {
  if (cov.rows() != cov.cols() || mean.size() != cov.rows()) {
    throw std::invalid_argument("sample_mvn: dimension mismatch");
  }
  const Eigen::MatrixXd chol = factorize_spd(cov);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = sample_standard_normal(rng);
  return mean + chol * z;
}

Eigen::MatrixXd sample_inverse_wishart(double df, const Eigen::MatrixXd& scale,
                                       Philox& rng) {
  require_square_symmetric(scale, "sample_inverse_wishart");
  const Eigen::Index p = scale.rows();
  if (!(df > static_cast<double>(p) - 1.0)) {
    throw std::invalid_argument("sample_inverse_wishart: df too small");
  }
  const Eigen::MatrixXd scale_chol = factorize_spd(scale);
  const Eigen::MatrixXd scale_inv =
      scale_chol.transpose()
          .triangularView<Eigen::Upper>()
          .solve(scale_chol.triangularView<Eigen::Lower>().solve(
              Eigen::MatrixXd::Identity(p, p)));
  const Eigen::MatrixXd l = factorize_spd(
      Eigen::MatrixXd(0.5 * (scale_inv + scale_inv.transpose())));
  // Bartlett factor of W ~ Wishart(df, scale^{-1}); the draw is W^{-1}.
  Eigen::MatrixXd bart = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    bart(i, i) = std::sqrt(2.0 * sample_gamma(0.5 * (df - static_cast<double>(i)), rng));
    for (Eigen::Index j = 0; j < i; ++j) bart(i, j) = sample_standard_normal(rng);
  }
  const Eigen::MatrixXd t = l * bart;  // W = t t'
  const Eigen::MatrixXd t_inv =
      t.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd draw = t_inv.transpose() * t_inv;
  return 0.5 * (draw + draw.transpose());
}

double sample_inverse_gamma(double shape, double scale, Philox& rng) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw std::invalid_argument("sample_inverse_gamma: non-positive parameter");
  }
  return scale / sample_gamma(shape, rng);
}

Eigen::MatrixXd factorize_spd(const Eigen::MatrixXd& a) {
  require_square_symmetric(a, "factorize_spd");
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("factorize_spd: matrix is not positive definite");
  }
  return llt.matrixL();
}

LinearUpdate bayes_linear_update(const Eigen::VectorXd& prior_mean,
                                 const Eigen::MatrixXd& prior_precision,
                                 const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& y, double noise_var) {
  if (X.rows() != y.size() || X.cols() != prior_mean.size()) {
    throw std::invalid_argument("bayes_linear_update: dimension mismatch");
  }
  return bayes_linear_update_moments(prior_mean, prior_precision,
                                     X.transpose() * X, X.transpose() * y,
                                     noise_var);
}

LinearUpdate bayes_linear_update_moments(const Eigen::VectorXd& prior_mean,
                                         const Eigen::MatrixXd& prior_precision,
                                         const Eigen::MatrixXd& xtx,
                                         const Eigen::VectorXd& xty,
                                         double noise_var) {
  const Eigen::Index k = prior_mean.size();
  if (prior_precision.rows() != k || prior_precision.cols() != k ||
      xtx.rows() != k || xtx.cols() != k || xty.size() != k) {
    throw std::invalid_argument("bayes_linear_update: dimension mismatch");
  }
  if (!(noise_var > 0.0)) {
    throw std::invalid_argument("bayes_linear_update: noise_var must be positive");
  }
  const Eigen::MatrixXd precision = prior_precision + xtx / noise_var;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("bayes_linear_update: singular combined precision");
  }
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(k, k));
  cov = 0.5 * (cov + cov.transpose());
  LinearUpdate out;
  out.mean = cov * (prior_precision * prior_mean + xty / noise_var);
  out.cov = std::move(cov);
  return out;
}

}  // namespace hbprobit

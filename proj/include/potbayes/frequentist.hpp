#pragma once

// MLE-based confidence regions: the ellipsoid for (gamma, sigma), marginal
// intervals, and the extreme-quantile estimate with its interval.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "potbayes/error.hpp"
#include "potbayes/gpd.hpp"
#include "potbayes/likelihood.hpp"
#include "potbayes/random.hpp"
#include "potbayes/serial_covariance.hpp"
#include "potbayes/special.hpp"

namespace potbayes {

struct Interval {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double v) const { return lower <= v && v <= upper; }
  double width() const { return upper - lower; }
};

inline void check_alpha(double alpha, const char* fn) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream os;
    os << fn << ": alpha must lie in (0,1), got " << alpha;
    throw InvalidArgument(os.str());
  }
}

/// {v : (v - center)^T shape^{-1} (v - center) <= radius2}. A singular shape
/// gives a flat region; directions with zero variance admit no movement.
struct EllipsoidRegion {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Matrix2d shape = Eigen::Matrix2d::Zero();
  double radius2 = 0.0;
  double alpha = 0.05;

  double quadratic_form(const Eigen::Vector2d& v) const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(shape);
    const Eigen::Vector2d d = es.eigenvectors().transpose() * (v - center);
    const double scale = std::max(shape.cwiseAbs().maxCoeff(), 1e-300);
    double q = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double ev = es.eigenvalues()(i);
      if (ev > 1e-14 * scale) {
        q += d(i) * d(i) / ev;
      } else if (std::abs(d(i)) > 1e-12 * (1.0 + center.cwiseAbs().maxCoeff())) {
        return kPosInf;
      }
    }
    return q;
  }

  bool contains(const Eigen::Vector2d& v) const { return quadratic_form(v) <= radius2; }
};

inline bool membership(const EllipsoidRegion& r, const Eigen::Vector2d& v) { return r.contains(v); }

/// Frequentist region centred at the MLE with shape Omega and radius
/// chi2_{2,1-alpha} / k.
inline EllipsoidRegion confidence_ellipsoid(const MleFit& fit, const SerialCovariance& cov,
                                            std::size_t k, double alpha) {
  check_alpha(alpha, "confidence_ellipsoid");
  if (k == 0) throw InvalidArgument("confidence_ellipsoid: k must be positive");
  EllipsoidRegion r;
  r.center = Eigen::Vector2d(fit.params.gamma, fit.params.sigma);
  r.shape = cov.omega_hat;
  r.radius2 = chi2_2df_quantile(1.0 - alpha) / static_cast<double>(k);
  r.alpha = alpha;
  return r;
}

struct ParamIntervals {
  Interval gamma;
  Interval sigma;
};

inline Interval symmetric_interval(double center, double half) {
  return {center, center - half, center + half};
}

/// Equi-tailed Wald intervals for gamma and sigma from the diagonal of Omega.
inline ParamIntervals param_intervals(const MleFit& fit, const Eigen::Matrix2d& omega_hat,
                                      std::size_t k, double alpha) {
  check_alpha(alpha, "param_intervals");
  if (k == 0) throw InvalidArgument("param_intervals: k must be positive");
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double sk = 1.0 / std::sqrt(static_cast<double>(k));
  return {symmetric_interval(fit.params.gamma, sk * z * std::sqrt(std::max(omega_hat(0, 0), 0.0))),
          symmetric_interval(fit.params.sigma, sk * z * std::sqrt(std::max(omega_hat(1, 1), 0.0)))};
}

inline ParamIntervals param_intervals(const MleFit& fit, const SerialCovariance& cov,
                                      std::size_t k, double alpha) {
  return param_intervals(fit, cov.omega_hat, k, alpha);
}

/// Extreme level tau_E, in-sample level tau_I = 1 - k/n and their tail ratio
/// p = (1 - tau_E) / (1 - tau_I).
struct QuantileTarget {
  double tau_e = 0.0;
  double tau_i = 0.0;
  double p = 1.0;
};

inline QuantileTarget make_quantile_target(double tau_e, std::size_t n, std::size_t k) {
  if (!(tau_e > 0.0 && tau_e < 1.0)) throw InvalidArgument("quantile target: tau_E must lie in (0,1)");
  if (k == 0 || k >= n) throw InvalidArgument("quantile target: need 0 < k < n");
  QuantileTarget t;
  t.tau_e = tau_e;
  t.tau_i = 1.0 - static_cast<double>(k) / static_cast<double>(n);
  t.p = (1.0 - tau_e) / (static_cast<double>(k) / static_cast<double>(n));
  return t;
}

/// Warnings about how far the target reaches beyond the data.
inline std::vector<std::string> target_warnings(const QuantileTarget& t, std::size_t k) {
  std::vector<std::string> w;
  if (t.p >= 1.0) w.push_back("tau_E is not beyond the threshold level (p >= 1); no extrapolation");
  if (-std::log(t.p) > 0.5 * std::sqrt(static_cast<double>(k))) {
    w.push_back("extrapolation ratio large relative to k (-log p > sqrt(k)/2)");
  }
  return w;
}

/// X_{n-k,n} + sigma ((p^-gamma) - 1) / gamma.
inline double quantile_point(const GpParams& params, double threshold, double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidArgument("quantile_point: p must be > 0");
  return threshold + params.sigma * detail::expm1_div(params.gamma, -std::log(p));
}

inline double quantile_point(const MleFit& fit, const ExceedanceSet& exc, const QuantileTarget& t) {
  return quantile_point(fit.params, exc.threshold, t.p);
}

enum class VarianceMethod { kDelta, kIndependence, kMonteCarlo };

inline const char* to_string(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::kDelta: return "delta";
    case VarianceMethod::kIndependence: return "independence";
    case VarianceMethod::kMonteCarlo: return "mc";
  }
  return "delta";
}

inline VarianceMethod variance_method_from_string(const std::string& s) {
  if (s == "delta") return VarianceMethod::kDelta;
  if (s == "independence") return VarianceMethod::kIndependence;
  if (s == "mc") return VarianceMethod::kMonteCarlo;
  throw InvalidArgument("unknown variance method '" + s + "' (expected delta|independence|mc)");
}

struct QuantileVarianceOptions {
  VarianceMethod method = VarianceMethod::kDelta;
  std::size_t mc_draws = 20000;
  std::uint64_t mc_seed = 20240101;
};

/// Asymptotic variance of sqrt(k) (Q_hat - Q) / (a q_gamma(1/p)).
///
/// With D = (d^gamma - 1)/gamma and q = q_gamma(d), d = 1/p, the estimator
/// error splits into a threshold term T ~ N(0, r11) and the parameter block
/// (S_gamma, S_sigma) ~ N(0, Sigma):
///   (T + D S_sigma + q S_gamma) / q.
/// Threshold and parameter errors are taken as uncorrelated.
inline double quantile_variance(double gamma, const Eigen::Matrix2d& sigma_hat, double r11,
                                std::size_t k, double p, const QuantileVarianceOptions& opts = {}) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("quantile_variance: needs 0 < p < 1");
  const double d = 1.0 / p;
  const double dd = gp_extrapolation_factor(gamma, d);
  const double q = q_integral(gamma, d);
  if (!(q > 0.0)) throw InvalidArgument("quantile_variance: q_gamma(1/p) must be > 0");

  Eigen::Matrix2d s = sigma_hat;
  double r = r11;
  if (opts.method == VarianceMethod::kIndependence) {
    s = detail::sigma_matrix_raw(gamma, 1.0, 1.0);
    r = 1.0;
  }
  if (opts.method != VarianceMethod::kMonteCarlo) {
    const Eigen::Vector2d w(1.0, dd / q);
    return w.dot(s * w) + r / (q * q);
  }

  // Gaussian limit pushed through the nonlinear quantile map at the given k
  const double sk = std::sqrt(static_cast<double>(k));
  const Eigen::Matrix2d l = cholesky_lower(s, "quantile_variance");
  Rng rng = make_rng(opts.mc_seed);
  double mean = 0.0, m2 = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < opts.mc_draws; ++i) {
    const Eigen::Vector2d z(standard_normal(rng), standard_normal(rng));
    const double t = std::sqrt(r) * standard_normal(rng);
    const Eigen::Vector2d e = l * z;
    const double g = gamma + e(0) / sk;
    if (!(g > -1.0)) continue;
    const double qq = t / sk + (1.0 + e(1) / sk) * gp_extrapolation_factor(g, d) - dd;
    const double v = qq * sk / q;
    ++cnt;
    const double delta = v - mean;
    mean += delta / static_cast<double>(cnt);
    m2 += delta * (v - mean);
  }
  if (cnt < 2) throw InternalError("quantile_variance: Monte-Carlo draws all infeasible");
  return m2 / static_cast<double>(cnt - 1);
}

inline double quantile_variance(const MleFit& fit, const SerialCovariance& cov, std::size_t k,
                                const QuantileTarget& t, const QuantileVarianceOptions& opts = {}) {
  return quantile_variance(fit.params.gamma, cov.sigma_hat, cov.r11, k, t.p, opts);
}

/// Q_hat +- k^{-1/2} sigma_hat q_gamma(1/p) z_{1-alpha/2} Sigma_Q^{1/2}.
inline Interval quantile_interval_from_variance(const GpParams& params, double threshold,
                                                std::size_t k, double p, double alpha,
                                                double sigma_q) {
  check_alpha(alpha, "quantile_interval");
  const double center = quantile_point(params, threshold, p);
  const double half = params.sigma * q_integral(params.gamma, 1.0 / p) *
                      normal_quantile(1.0 - alpha / 2.0) * std::sqrt(std::max(sigma_q, 0.0)) /
                      std::sqrt(static_cast<double>(k));
  return symmetric_interval(center, half);
}

inline Interval quantile_interval(const MleFit& fit, const SerialCovariance& cov,
                                  const ExceedanceSet& exc, const QuantileTarget& t, double alpha,
                                  const QuantileVarianceOptions& opts = {}) {
  const double sq = quantile_variance(fit, cov, exc.k, t, opts);
  return quantile_interval_from_variance(fit.params, exc.threshold, exc.k, t.p, alpha, sq);
}

}  // namespace potbayes

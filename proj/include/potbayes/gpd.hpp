#pragma once

// Generalized Pareto primitives: log-density, cdf, quantile and the
// q_gamma integral that scales extreme-quantile uncertainty.
//
// H(x; gamma, sigma) = 1 - (1 + gamma x / sigma)_+^(-1/gamma), x >= 0.

#include <cmath>
#include <limits>
#include <sstream>

#include "potbayes/error.hpp"

namespace potbayes {

/// Below this |gamma| the functions switch to series expansions around the
/// exponential limit; at gamma == 0 they reduce to it exactly.
inline constexpr double kGammaEps = 1e-6;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// Shape gamma and scale sigma of a GP distribution.
struct GpParams {
  double gamma = 0.0;
  double sigma = 1.0;

  friend bool operator==(const GpParams&, const GpParams&) = default;
};

/// Support [lower, upper) of a GP law; upper is finite iff gamma < 0.
struct Support {
  double lower = 0.0;
  double upper = kPosInf;
};

inline Support gp_support(const GpParams& p) {
  if (p.gamma < 0.0) return {0.0, p.sigma / -p.gamma};
  return {};
}

/// True when `p` lies in the likelihood parameter space (-1, inf) x (0, inf).
inline bool in_parameter_space(const GpParams& p) {
  return p.gamma > -1.0 && p.sigma > 0.0 && std::isfinite(p.gamma) && std::isfinite(p.sigma);
}

namespace detail {

// log1p(g z) / g, continuous through g = 0 where it equals z.
inline double log1p_div(double g, double z) {
  const double u = g * z;
  if (std::abs(g) < kGammaEps || std::abs(u) < 0.1) {
    // z * sum_{n>=1} (-u)^{n-1} / n
    double term = 1.0;
    double sum = 1.0;
    for (int n = 2; n < 40; ++n) {
      term *= -u;
      const double add = term / n;
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return z * sum;
  }
  return std::log1p(u) / g;
}

// expm1(g w) / g, continuous through g = 0 where it equals w.
inline double expm1_div(double g, double w) {
  const double u = g * w;
  if (std::abs(g) < kGammaEps || std::abs(u) < 0.1) {
    // w * sum_{n>=0} u^n / (n+1)!
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n < 40; ++n) {
      term *= u / (n + 1);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return w * sum;
  }
  return std::expm1(u) / g;
}

inline void check_scale(double sigma, const char* fn) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    std::ostringstream os;
    os << fn << ": scale must be finite and > 0, got " << sigma;
    throw InvalidArgument(os.str());
  }
}

}  // namespace detail

/// Log-density of GP(gamma, sigma) at x. Returns -inf outside the support;
/// that is a value, not an error, so optimizers and samplers can probe
/// infeasible points.
inline double gp_logpdf(double x, const GpParams& p) {
  if (!std::isfinite(x)) throw InvalidArgument("gp_logpdf: x must be finite");
  if (!std::isfinite(p.gamma)) throw InvalidArgument("gp_logpdf: gamma must be finite");
  detail::check_scale(p.sigma, "gp_logpdf");
  if (x < 0.0) return kNegInf;
  const double z = x / p.sigma;
  const double u = p.gamma * z;
  if (!(1.0 + u > 0.0)) return kNegInf;
  // -(1 + 1/g) log1p(u) = -log1p(u)/g - log1p(u)
  return -std::log(p.sigma) - detail::log1p_div(p.gamma, z) - std::log1p(u);
}

inline double gp_cdf(double x, const GpParams& p) {
  if (std::isnan(x)) throw InvalidArgument("gp_cdf: x is NaN");
  detail::check_scale(p.sigma, "gp_cdf");
  if (x <= 0.0) return 0.0;
  if (x == kPosInf) return 1.0;
  const double z = x / p.sigma;
  if (!(1.0 + p.gamma * z > 0.0)) return 1.0;
  return -std::expm1(-detail::log1p_div(p.gamma, z));
}

/// GP quantile sigma * ((1-p)^(-gamma) - 1) / gamma.
inline double gp_quantile(double prob, const GpParams& p) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw InvalidArgument("gp_quantile: probability must lie in (0,1)");
  }
  detail::check_scale(p.sigma, "gp_quantile");
  const double w = -std::log1p(-prob);  // log(1 / (1 - prob))
  return p.sigma * detail::expm1_div(p.gamma, w);
}

/// (x^g - 1) / g with the log x limit at g = 0; the GP extrapolation factor.
inline double gp_extrapolation_factor(double gamma, double x) {
  if (!(x > 0.0)) throw InvalidArgument("gp_extrapolation_factor: x must be > 0");
  return detail::expm1_div(gamma, std::log(x));
}

/// q_gamma(x) = int_1^x v^(gamma-1) log v dv, the derivative of
/// (x^gamma - 1)/gamma with respect to gamma.
inline double q_integral(double gamma, double x) {
  if (!(x >= 1.0) || !std::isfinite(x)) {
    throw InvalidArgument("q_integral: x must be finite and >= 1");
  }
  const double lx = std::log(x);
  const double u = gamma * lx;
  if (std::abs(gamma) < kGammaEps || std::abs(u) < 0.1) {
    // lx^2 * sum_{n>=2} u^(n-2) (n-1) / n!
    double fact = 2.0;  // n!
    double upow = 1.0;  // u^(n-2)
    double sum = 0.5;
    for (int n = 3; n < 40; ++n) {
      fact *= n;
      upow *= u;
      const double add = upow * (n - 1) / fact;
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return lx * lx * sum;
  }
  // (e^u (u - 1) + 1) / gamma^2
  return (std::exp(u) * (u - 1.0) + 1.0) / (gamma * gamma);
}

}  // namespace potbayes

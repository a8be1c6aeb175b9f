#pragma once

// Peaks-over-threshold pseudo log-likelihood: exceedance extraction, the
// averaged GP log-likelihood, its analytic derivatives, and the MLE over
// the open parameter space (-1, inf) x (0, inf).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "potbayes/error.hpp"
#include "potbayes/gpd.hpp"
#include "potbayes/optimize.hpp"

namespace potbayes {

/// Top-k excesses over the order statistic X_{n-k,n}, sorted ascending.
struct ExceedanceSet {
  double threshold = 0.0;
  std::vector<double> excesses;
  std::size_t n = 0;
  std::size_t k = 0;              // excesses.size()
  std::size_t ties_dropped = 0;   // excesses equal to zero that were removed

  double max_excess() const { return excesses.back(); }
};

/// Builds the exceedance set for the top `k` values of `data`. Excesses
/// tied with the threshold are dropped and k is reduced accordingly.
inline ExceedanceSet make_exceedances(std::span<const double> data, std::size_t k) {
  const std::size_t n = data.size();
  if (k < 1 || k >= n) {
    std::ostringstream os;
    os << "make_exceedances: need 1 <= k < n, got k=" << k << " n=" << n;
    throw InvalidArgument(os.str());
  }
  std::vector<double> sorted(data.begin(), data.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw DataError("make_exceedances: non-finite observation");
  }
  // only the top k+1 need ordering
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n - k - 1),
                   sorted.end());
  ExceedanceSet out;
  out.n = n;
  out.threshold = sorted[n - k - 1];
  out.excesses.reserve(k);
  for (std::size_t i = n - k; i < n; ++i) {
    const double e = sorted[i] - out.threshold;
    if (e > 0.0) {
      out.excesses.push_back(e);
    } else {
      ++out.ties_dropped;
    }
  }
  std::sort(out.excesses.begin(), out.excesses.end());
  out.k = out.excesses.size();
  if (out.k == 0) throw DegenerateSample("make_exceedances: every excess ties with the threshold");
  return out;
}

/// Builds an exceedance set directly from positive excesses (threshold
/// given), e.g. for synthetic checks.
inline ExceedanceSet exceedances_from_excesses(std::vector<double> excesses, double threshold,
                                               std::size_t n) {
  ExceedanceSet out;
  out.threshold = threshold;
  for (double e : excesses) {
    if (!std::isfinite(e)) throw DataError("exceedances_from_excesses: non-finite excess");
    if (e > 0.0) {
      out.excesses.push_back(e);
    } else {
      ++out.ties_dropped;
    }
  }
  std::sort(out.excesses.begin(), out.excesses.end());
  out.k = out.excesses.size();
  out.n = std::max(n, out.k + 1);
  if (out.k == 0) throw DegenerateSample("exceedances_from_excesses: no positive excess");
  return out;
}

/// Mean GP log-likelihood of the excesses; -inf iff some excess is outside
/// the support of `p`.
inline double empirical_loglik(const ExceedanceSet& exc, const GpParams& p) {
  if (exc.excesses.empty()) throw InvalidArgument("empirical_loglik: empty exceedance set");
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) {
    throw InvalidArgument("empirical_loglik: scale must be finite and > 0");
  }
  if (!std::isfinite(p.gamma)) return kNegInf;
  const double inv_sigma = 1.0 / p.sigma;
  const double g = p.gamma;
  if (g < 0.0 && !(1.0 + g * exc.max_excess() * inv_sigma > 0.0)) return kNegInf;
  double acc = 0.0;
  if (std::abs(g) >= 1e-4) {
    for (double x : exc.excesses) acc += std::log1p(g * x * inv_sigma);
    acc *= (1.0 + 1.0 / g);
  } else {
    for (double x : exc.excesses) {
      const double z = x * inv_sigma;
      acc += detail::log1p_div(g, z) + std::log1p(g * z);
    }
  }
  return -std::log(p.sigma) - acc / static_cast<double>(exc.k);
}

struct ScoreInfo {
  Eigen::Vector2d score;          // gradient of the mean log-likelihood in (gamma, sigma)
  Eigen::Matrix2d observed_info;  // minus its Hessian
};

namespace detail {

struct PointDerivs {
  double dg, ds, dgg, dgs, dss;
};

// Derivatives of log h(x; gamma, sigma) for one excess.
inline PointDerivs gp_point_derivs(double x, double g, double sigma) {
  const double z = x / sigma;
  const double u = g * z;
  const double t = 1.0 + u;
  if (!(t > 0.0)) throw BoundaryError("score_and_info: excess on or beyond the support boundary");
  double a, b;  // a = log1p(u)/g^2 - z/(g t), b = da/dg
  if (std::abs(g) < kGammaEps || std::abs(u) < 0.1) {
    // a = sum_{n>=2} (-1)^n (n-1)/n g^{n-2} z^n
    // b = sum_{n>=3} (-1)^n (n-2)(n-1)/n g^{n-3} z^n
    double zn = z * z;  // z^n
    double gp = 1.0;    // g^{n-2}
    a = 0.5 * zn;
    b = 0.0;
    double gpb = 1.0;  // g^{n-3}
    double sgn = 1.0;
    for (int n = 3; n < 60; ++n) {
      zn *= z;
      sgn = -sgn;
      gp *= g;
      const double ta = sgn * (n - 1.0) / n * gp * zn;
      const double tb = sgn * (n - 2.0) * (n - 1.0) / n * gpb * zn;
      gpb *= g;
      a += ta;
      b += tb;
      if (std::abs(tb) <= 1e-18 * std::abs(b) && std::abs(ta) <= 1e-18 * std::abs(a)) break;
    }
  } else {
    const double l = std::log1p(u);
    a = l / (g * g) - z / (g * t);
    b = 2.0 * z / (g * g * t) - 2.0 * l / (g * g * g) + z * z / (g * t * t);
  }
  PointDerivs d;
  d.dg = a - z / t;
  d.ds = (-1.0 + (1.0 + g) * z / t) / sigma;
  d.dgg = b + z * z / (t * t);
  d.dgs = z * (1.0 - z) / (sigma * t * t);
  d.dss = (1.0 - (1.0 + g) * z * (2.0 + u) / (t * t)) / (sigma * sigma);
  return d;
}

}  // namespace detail

/// Score and observed information of the mean log-likelihood at `p`.
inline ScoreInfo score_and_info(const ExceedanceSet& exc, const GpParams& p) {
  if (exc.excesses.empty()) throw InvalidArgument("score_and_info: empty exceedance set");
  if (!(p.sigma > 0.0)) throw InvalidArgument("score_and_info: scale must be > 0");
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  for (double x : exc.excesses) {
    const auto d = detail::gp_point_derivs(x, p.gamma, p.sigma);
    s(0) += d.dg;
    s(1) += d.ds;
    h(0, 0) += d.dgg;
    h(0, 1) += d.dgs;
    h(1, 1) += d.dss;
  }
  h(1, 0) = h(0, 1);
  const double kk = static_cast<double>(exc.k);
  return {s / kk, -h / kk};
}

/// Per-observation Fisher information of GP(gamma, 1) in (gamma, sigma).
/// Positive definite for gamma > -1/2.
inline Eigen::Matrix2d fisher_info(double gamma) {
  if (!(gamma > -0.5) || !std::isfinite(gamma)) {
    throw InvalidArgument("fisher_info: requires gamma > -1/2");
  }
  const double c = 1.0 / ((1.0 + gamma) * (1.0 + 2.0 * gamma));
  Eigen::Matrix2d m;
  m << 2.0 * c, c, c, 1.0 / (1.0 + 2.0 * gamma);
  return m;
}

struct MleOptions {
  std::size_t min_k = 5;
  SimplexOptions simplex{4000, 1e-14, 1e-11};
  int newton_iterations = 50;
  double score_tolerance = 1e-9;
};

struct MleFit {
  GpParams params;
  double loglik = kNegInf;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline GpParams feasible_start(GpParams p, double max_excess) {
  p.gamma = std::clamp(p.gamma, -0.9, 5.0);
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) p.sigma = max_excess;
  if (p.gamma < 0.0 && !(p.sigma > -p.gamma * max_excess)) p.sigma = -1.05 * p.gamma * max_excess;
  return p;
}

}  // namespace detail

/// Maximum likelihood fit of GP(gamma, sigma) to the excesses. Multistart
/// Nelder-Mead in (gamma, log sigma), polished by Newton steps on the
/// analytic score and observed information.
inline MleFit mle_fit(const ExceedanceSet& exc, const MleOptions& opts = {}) {
  if (exc.k < opts.min_k) {
    std::ostringstream os;
    os << "mle_fit: need at least " << opts.min_k << " excesses, got " << exc.k;
    throw InvalidArgument(os.str());
  }
  const auto& xs = exc.excesses;
  if (xs.front() == xs.back()) throw DegenerateSample("mle_fit: all excesses are equal");

  const double kk = static_cast<double>(exc.k);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / kk;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= (kk - 1.0);
  const double median = exc.k % 2 ? xs[exc.k / 2] : 0.5 * (xs[exc.k / 2 - 1] + xs[exc.k / 2]);
  const double r = mean * mean / var;

  const GpParams starts[] = {
      {0.5 * (1.0 - r), 0.5 * mean * (1.0 + r)},
      {0.1, mean},
      {-0.3, mean},
      {1.0, median},
  };

  auto objective = [&](const std::vector<double>& v) {
    if (!(v[0] > -1.0) || !std::isfinite(v[1])) return kPosInf;
    const double ll = empirical_loglik(exc, {v[0], std::exp(v[1])});
    return std::isfinite(ll) ? -ll : kPosInf;
  };

  MleFit fit;
  double best = kPosInf;
  std::vector<double> best_x;
  for (const auto& s0 : starts) {
    const GpParams s = detail::feasible_start(s0, exc.max_excess());
    const double start_value = objective({s.gamma, std::log(s.sigma)});
    auto res = nelder_mead(objective, {s.gamma, std::log(s.sigma)}, {0.1, 0.1}, opts.simplex);
    fit.iterations += res.iterations;
    if (start_value < res.value) {  // never end below the start
      res.value = start_value;
      res.x = {s.gamma, std::log(s.sigma)};
    }
    if (res.value < best) {
      best = res.value;
      best_x = res.x;
    }
  }
  if (!std::isfinite(best)) {
    throw NonConvergence("mle_fit: no feasible point found");
  }

  GpParams p{best_x[0], std::exp(best_x[1])};
  double ll = -best;
  bool converged = false;
  for (int it = 0; it < opts.newton_iterations; ++it) {
    ScoreInfo si;
    try {
      si = score_and_info(exc, p);
    } catch (const BoundaryError&) {
      break;
    }
    const double scale = std::max(1.0, p.sigma);
    if (std::abs(si.score(0)) < opts.score_tolerance &&
        std::abs(si.score(1)) * p.sigma < opts.score_tolerance * scale) {
      converged = true;
      break;
    }
    Eigen::LLT<Eigen::Matrix2d> llt(si.observed_info);
    if (llt.info() != Eigen::Success) break;
    const Eigen::Vector2d step = llt.solve(si.score);
    double lambda = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt, lambda *= 0.5) {
      GpParams q{p.gamma + lambda * step(0), p.sigma + lambda * step(1)};
      if (!in_parameter_space(q)) continue;
      const double lq = empirical_loglik(exc, q);
      if (std::isfinite(lq) && lq >= ll - 1e-15 * std::abs(ll)) {
        p = q;
        ll = lq;
        moved = true;
        break;
      }
    }
    ++fit.iterations;
    if (!moved) break;
  }
  if (!converged) {
    // accept a polished simplex optimum whose score is already negligible
    try {
      const auto si = score_and_info(exc, p);
      converged = std::abs(si.score(0)) < 1e-6 && std::abs(si.score(1)) * p.sigma < 1e-6;
    } catch (const BoundaryError&) {
      converged = false;
    }
  }
  if (!converged || !(p.gamma > -1.0 + 1e-6)) {
    std::ostringstream os;
    os << "mle_fit: no interior maximum found (best gamma=" << p.gamma << ", sigma=" << p.sigma
       << ")";
    throw NonConvergence(os.str(), {p.gamma, p.sigma}, ll);
  }
  fit.params = p;
  fit.loglik = ll;
  fit.converged = true;
  if (p.gamma <= -0.5) {
    fit.warnings.push_back("gamma estimate <= -1/2: asymptotic covariance theory does not apply");
  }
  if (exc.ties_dropped > 0) {
    fit.warnings.push_back(std::to_string(exc.ties_dropped) +
                           " excess(es) tied with the threshold were dropped");
  }
  return fit;
}

}  // namespace potbayes

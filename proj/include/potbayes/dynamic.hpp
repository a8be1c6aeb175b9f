#pragma once

// Regression residuals for the location model Y_i = v(Z_i) + X_i with an
// ARMAX conditional mean fitted by conditional least squares, and dynamic
// (conditional) extreme-quantile posteriors built on those residuals.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "potbayes/bayes.hpp"
#include "potbayes/error.hpp"
#include "potbayes/frequentist.hpp"
#include "potbayes/likelihood.hpp"
#include "potbayes/optimize.hpp"
#include "potbayes/serial_covariance.hpp"

namespace potbayes {

inline constexpr int kMaxHorizon = 24;

struct ArmaSpec {
  int p = 1;
  int q = 0;
  bool include_mean = true;
  int exog_dim = 0;

  int n_params() const { return (include_mean ? 1 : 0) + p + q + exog_dim; }

  void validate() const {
    if (p < 0 || q < 0 || exog_dim < 0) throw InvalidArgument("arma spec: orders must be >= 0");
    if (p + q < 1) throw InvalidArgument("arma spec: need p + q >= 1");
  }
};

/// v_i = mean + sum phi_j Y_{i-j} + sum psi_j X_{i-j} + beta' z_i.
struct ArmaCoefficients {
  double mean = 0.0;
  std::vector<double> phi;
  std::vector<double> psi;
  std::vector<double> beta;
};

/// Rows of `exog` align with the series; empty when there are no regressors.
using ExogMatrix = Eigen::MatrixXd;

namespace detail {

inline void check_exog(const ArmaSpec& spec, const ExogMatrix* exog, std::size_t n) {
  if (spec.exog_dim == 0) return;
  if (exog == nullptr || exog->cols() != spec.exog_dim || static_cast<std::size_t>(exog->rows()) < n) {
    std::ostringstream os;
    os << "arma: exogenous matrix must have " << spec.exog_dim << " columns and " << n << " rows";
    throw InvalidArgument(os.str());
  }
}

// Conditional mean at position i from the lagged values supplied by
// accessors; shared by the innovation recursion and the forecasts so that
// one-step results agree bit for bit.
template <class YAt, class EAt>
double predict_at(const ArmaCoefficients& c, std::size_t i, YAt&& y_at, EAt&& e_at,
                  const ExogMatrix* exog) {
  double v = c.mean;
  for (std::size_t j = 0; j < c.phi.size(); ++j) v += c.phi[j] * y_at(i - j - 1);
  for (std::size_t j = 0; j < c.psi.size(); ++j) {
    if (i >= j + 1) v += c.psi[j] * e_at(i - j - 1);
  }
  for (std::size_t j = 0; j < c.beta.size(); ++j) v += c.beta[j] * (*exog)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return v;
}

inline ArmaCoefficients unpack(const ArmaSpec& spec, const std::vector<double>& th) {
  ArmaCoefficients c;
  std::size_t at = 0;
  if (spec.include_mean) c.mean = th[at++];
  c.phi.assign(th.begin() + static_cast<std::ptrdiff_t>(at), th.begin() + static_cast<std::ptrdiff_t>(at + spec.p));
  at += spec.p;
  c.psi.assign(th.begin() + static_cast<std::ptrdiff_t>(at), th.begin() + static_cast<std::ptrdiff_t>(at + spec.q));
  at += spec.q;
  c.beta.assign(th.begin() + static_cast<std::ptrdiff_t>(at), th.end());
  return c;
}

inline std::vector<double> pack(const ArmaCoefficients& c) {
  std::vector<double> th;
  th.push_back(c.mean);
  th.insert(th.end(), c.phi.begin(), c.phi.end());
  th.insert(th.end(), c.psi.begin(), c.psi.end());
  th.insert(th.end(), c.beta.begin(), c.beta.end());
  return th;
}

}  // namespace detail

/// Roots of 1 + psi_1 z + ... + psi_q z^q all lie outside the closed unit disk.
inline bool ma_invertible(const std::vector<double>& psi) {
  std::size_t q = psi.size();
  while (q > 0 && psi[q - 1] == 0.0) --q;
  if (q == 0) return true;
  // reciprocal roots are the eigenvalues of the companion of z^q + psi_1 z^{q-1} + ...
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
  for (std::size_t j = 0; j < q; ++j) comp(0, static_cast<Eigen::Index>(j)) = -psi[j];
  for (std::size_t j = 1; j < q; ++j) comp(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j - 1)) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
    if (std::abs(es.eigenvalues()(j)) >= 1.0 - 1e-10) return false;
  }
  return true;
}

/// One-step innovations with zero auxiliary residuals for the first p
/// positions.
inline std::vector<double> arma_innovations(const std::vector<double>& y, const ArmaSpec& spec,
                                            const ArmaCoefficients& c, const ExogMatrix* exog = nullptr) {
  detail::check_exog(spec, exog, y.size());
  std::vector<double> e(y.size(), 0.0);
  const std::size_t p = static_cast<std::size_t>(spec.p);
  auto ya = [&](std::size_t j) { return y[j]; };
  auto ea = [&](std::size_t j) { return e[j]; };
  for (std::size_t i = p; i < y.size(); ++i) e[i] = y[i] - detail::predict_at(c, i, ya, ea, exog);
  return e;
}

struct ArmaFit {
  ArmaCoefficients coef;
  std::vector<double> innovations;
  double sse = 0.0;
  int iterations = 0;
  bool used_simplex = false;
};

/// Conditional least squares. With q = 0 this is ordinary least squares on
/// the lagged values; otherwise Gauss-Newton with a simplex fallback.
inline ArmaFit arma_cls_fit(const std::vector<double>& y, const ArmaSpec& spec,
                            const ExogMatrix* exog = nullptr) {
  spec.validate();
  detail::check_exog(spec, exog, y.size());
  const std::size_t nb = y.size();
  if (nb <= static_cast<std::size_t>(10 * (spec.p + spec.q + 1 + spec.exog_dim))) {
    throw InvalidArgument("arma_cls_fit: series too short for the requested orders");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw DataError("arma_cls_fit: non-finite observation");
  }
  const std::size_t p = static_cast<std::size_t>(spec.p);
  const std::size_t rows = nb - p;

  // linear part: regress y_i on (1, y_{i-1..i-p}, z_i)
  const int lin = (spec.include_mean ? 1 : 0) + spec.p + spec.exog_dim;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), lin);
  Eigen::VectorXd yy(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t i = r + p;
    Eigen::Index col = 0;
    const auto ri = static_cast<Eigen::Index>(r);
    if (spec.include_mean) x(ri, col++) = 1.0;
    for (std::size_t j = 0; j < p; ++j) x(ri, col++) = y[i - j - 1];
    for (int j = 0; j < spec.exog_dim; ++j) x(ri, col++) = (*exog)(static_cast<Eigen::Index>(i), j);
    yy(ri) = y[i];
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(lin);
  if (lin > 0) {
    const Eigen::MatrixXd xtx = x.transpose() * x;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) {
      throw DegenerateSample("arma_cls_fit: regressors are collinear");
    }
    b = ldlt.solve(x.transpose() * yy);
  }

  ArmaCoefficients c;
  {
    Eigen::Index col = 0;
    if (spec.include_mean) c.mean = b(col++);
    for (std::size_t j = 0; j < p; ++j) c.phi.push_back(b(col++));
    c.psi.assign(static_cast<std::size_t>(spec.q), 0.0);
    for (int j = 0; j < spec.exog_dim; ++j) c.beta.push_back(b(col++));
  }

  auto sse_of = [&](const ArmaCoefficients& cc) {
    const auto e = arma_innovations(y, spec, cc, exog);
    double s = 0.0;
    for (std::size_t i = p; i < nb; ++i) s += e[i] * e[i];
    return s;
  };

  ArmaFit out;
  if (spec.q == 0) {
    out.coef = c;
    out.innovations = arma_innovations(y, spec, c, exog);
    out.sse = sse_of(c);
    return out;
  }

  // parameter vector without the mean slot when it is not estimated
  auto to_theta = [&](const ArmaCoefficients& cc) {
    auto th = detail::pack(cc);
    if (!spec.include_mean) th.erase(th.begin());
    return th;
  };
  auto from_theta = [&](const std::vector<double>& th) {
    if (spec.include_mean) return detail::unpack(spec, th);
    std::vector<double> full = th;
    full.insert(full.begin(), 0.0);
    ArmaSpec s2 = spec;
    s2.include_mean = true;
    return detail::unpack(s2, full);
  };
  auto residual_vec = [&](const std::vector<double>& th) {
    const auto e = arma_innovations(y, spec, from_theta(th), exog);
    Eigen::VectorXd r(static_cast<Eigen::Index>(rows));
    for (std::size_t i = p; i < nb; ++i) r(static_cast<Eigen::Index>(i - p)) = e[i];
    return r;
  };

  std::vector<double> th = to_theta(c);
  const std::size_t dim = th.size();
  const std::size_t psi_at = (spec.include_mean ? 1 : 0) + p;
  Eigen::VectorXd r = residual_vec(th);
  double sse = r.squaredNorm();
  bool ok = false;
  int it = 0;
  for (; it < 200; ++it) {
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(th[j]));
      auto tp = th, tm = th;
      tp[j] += h;
      tm[j] -= h;
      jac.col(static_cast<Eigen::Index>(j)) = (residual_vec(tp) - residual_vec(tm)) / (2.0 * h);
    }
    const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-r);
    bool moved = false;
    for (double lam = 1.0; lam > 1e-8; lam *= 0.5) {
      std::vector<double> cand = th;
      for (std::size_t j = 0; j < dim; ++j) cand[j] += lam * step(static_cast<Eigen::Index>(j));
      std::vector<double> psi(cand.begin() + static_cast<std::ptrdiff_t>(psi_at),
                              cand.begin() + static_cast<std::ptrdiff_t>(psi_at + spec.q));
      if (!ma_invertible(psi)) continue;
      const Eigen::VectorXd rc = residual_vec(cand);
      const double sc = rc.squaredNorm();
      if (std::isfinite(sc) && sc <= sse) {
        const double rel = (sse - sc) / std::max(sse, 1e-300);
        th = cand;
        r = rc;
        sse = sc;
        moved = true;
        if (rel < 1e-12) ok = true;
        break;
      }
    }
    if (!moved) {
      ok = step.norm() < 1e-6 * (1.0 + Eigen::Map<const Eigen::VectorXd>(th.data(), static_cast<Eigen::Index>(dim)).norm());
      break;
    }
    if (ok) break;
  }
  out.iterations = it;

  if (!ok) {
    auto f = [&](const std::vector<double>& t) {
      std::vector<double> psi(t.begin() + static_cast<std::ptrdiff_t>(psi_at),
                              t.begin() + static_cast<std::ptrdiff_t>(psi_at + spec.q));
      if (!ma_invertible(psi)) return kPosInf;
      const double s = residual_vec(t).squaredNorm();
      return std::isfinite(s) ? s : kPosInf;
    };
    std::vector<double> step(dim, 0.05);
    const auto nm = nelder_mead(f, th, step, SimplexOptions{20000, 1e-14, 1e-10});
    if (!std::isfinite(nm.value)) {
      throw NonConvergence("arma_cls_fit: no invertible parameter point found");
    }
    if (nm.value < sse) {
      th = nm.x;
      sse = nm.value;
    }
    out.used_simplex = true;
    if (!nm.converged) {
      throw NonConvergence("arma_cls_fit: conditional least squares did not converge", {0.0, 0.0}, sse);
    }
  }
  out.coef = from_theta(th);
  out.innovations = arma_innovations(y, spec, out.coef, exog);
  out.sse = sse;
  return out;
}

/// h-step forecast of Y_{origin + h} from information up to index origin
/// (inclusive), future innovations set to zero. Exogenous rows beyond the
/// data are read from `exog` as well, so it must extend to origin + h.
inline double arma_forecast(const std::vector<double>& y, const std::vector<double>& e,
                            const ArmaCoefficients& c, std::size_t origin, int h,
                            const ExogMatrix* exog = nullptr) {
  if (h < 1) throw InvalidArgument("arma_forecast: h must be >= 1");
  const std::size_t hh = static_cast<std::size_t>(h);
  std::vector<double> fut(hh, 0.0);
  auto ya = [&](std::size_t j) { return j <= origin ? y[j] : fut[j - origin - 1]; };
  auto ea = [&](std::size_t j) { return j <= origin ? e[j] : 0.0; };
  for (std::size_t s = 1; s <= hh; ++s) fut[s - 1] = detail::predict_at(c, origin + s, ya, ea, exog);
  return fut.back();
}

/// Warm-up s with n + ceil(sqrt n) = n_bar for the largest feasible n.
inline std::size_t default_warmup(std::size_t n_bar) {
  std::size_t n = n_bar;
  while (n > 0 && n + static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)))) > n_bar) --n;
  return n_bar - n;
}

struct ResidualSet {
  std::vector<double> residuals;
  std::size_t discarded = 0;
  ArmaSpec spec;
  ArmaCoefficients coef;
  double one_step_pred = 0.0;  // v_hat at n_bar + 1
  int horizon = 1;
  std::vector<std::string> warnings;
};

struct ResidualOptions {
  std::optional<std::size_t> warmup;  // defaults to default_warmup(n_bar)
  std::optional<ArmaCoefficients> fixed_coefficients;
  int horizon = 1;
  int max_horizon = kMaxHorizon;
};

/// Last n = n_bar - s residuals Y_i - v_hat_{i,h}, plus the forecast of
/// Y_{n_bar + h}. With h = 1 these are the one-step innovations.
inline ResidualSet make_residuals(const std::vector<double>& y, const ArmaSpec& spec,
                                  const ExogMatrix* exog = nullptr, const ResidualOptions& opts = {}) {
  spec.validate();
  if (opts.horizon < 1 || opts.horizon > opts.max_horizon) {
    std::ostringstream os;
    os << "make_residuals: horizon must lie in [1, " << opts.max_horizon << "], got " << opts.horizon;
    throw InvalidArgument(os.str());
  }
  const std::size_t nb = y.size();
  const std::size_t s = opts.warmup.value_or(default_warmup(nb));
  if (s >= nb) throw InvalidArgument("make_residuals: warm-up must be shorter than the series");
  const std::size_t h = static_cast<std::size_t>(opts.horizon);
  if (s < static_cast<std::size_t>(spec.p) + h - 1) {
    throw InvalidArgument("make_residuals: warm-up must cover the AR order and the horizon");
  }
  if (spec.exog_dim > 0) detail::check_exog(spec, exog, nb + h);

  ResidualSet out;
  out.spec = spec;
  out.discarded = s;
  out.horizon = opts.horizon;
  std::vector<double> e;
  if (opts.fixed_coefficients) {
    out.coef = *opts.fixed_coefficients;
    if (out.coef.phi.size() != static_cast<std::size_t>(spec.p) ||
        out.coef.psi.size() != static_cast<std::size_t>(spec.q) ||
        out.coef.beta.size() != static_cast<std::size_t>(spec.exog_dim)) {
      throw InvalidArgument("make_residuals: fixed coefficients do not match the spec");
    }
    e = arma_innovations(y, spec, out.coef, exog);
  } else {
    auto fit = arma_cls_fit(y, spec, exog);
    out.coef = fit.coef;
    e = std::move(fit.innovations);
    if (fit.used_simplex) out.warnings.push_back("arma fit fell back to the simplex search");
  }
  out.residuals.resize(nb - s);
  for (std::size_t i = s; i < nb; ++i) {
    out.residuals[i - s] =
        h == 1 ? e[i] : y[i] - arma_forecast(y, e, out.coef, i - h, opts.horizon, exog);
  }
  out.one_step_pred = arma_forecast(y, e, out.coef, nb - 1, opts.horizon, exog);
  return out;
}

/// sqrt(k) max_i |Xhat_{n-k+i,n} - X_{n-k+i,n}| / sigma_hat over the top
/// k + 1 order statistics of residuals and true innovations.
inline double residual_gap_statistic(const std::vector<double>& residuals,
                                     const std::vector<double>& truth, std::size_t k, double sigma_hat) {
  if (residuals.size() != truth.size()) throw InvalidArgument("gap statistic: length mismatch");
  if (k + 1 > residuals.size()) throw InvalidArgument("gap statistic: k too large");
  if (!(sigma_hat > 0.0)) throw InvalidArgument("gap statistic: sigma_hat must be > 0");
  std::vector<double> a = residuals, b = truth;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double gap = 0.0;
  const std::size_t n = a.size();
  for (std::size_t i = n - k - 1; i < n; ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
  return std::sqrt(static_cast<double>(k)) * gap / sigma_hat;
}

struct DynamicOptions {
  std::size_t k = 50;
  PriorSpec prior;
  TailCopulaOptions copula;
  McmcOptions mcmc;
  QuantilePosteriorOptions quantile;
  bool adjusted = true;
  std::optional<double> force_shift;
};

struct DynamicQuantile {
  ExceedanceSet exc;
  MleFit fit;
  SerialCovariance cov;
  PosteriorDraws draws;
  QuantilePosterior marginal;
  double shift = 0.0;
  std::vector<double> draws_shifted;

  Interval interval(double alpha) const {
    Interval iv = marginal.interval(alpha);
    return {iv.point + shift, iv.lower + shift, iv.upper + shift};
  }
  Interval unrefined_interval(double alpha) const {
    Interval iv = marginal.unrefined_interval(alpha);
    return {iv.point + shift, iv.lower + shift, iv.upper + shift};
  }
  double q_hat() const { return marginal.q_hat + shift; }
};

/// Posterior of Q_{Y | Z}(tau_E) = v_hat + Q_X(tau_E) from the residuals.
inline DynamicQuantile dynamic_quantile_posterior(const ResidualSet& res, double tau_e,
                                                  const DynamicOptions& opts) {
  DynamicQuantile out;
  const std::size_t n = res.residuals.size();
  const auto target = make_quantile_target(tau_e, n, opts.k);
  out.exc = make_exceedances(res.residuals, opts.k);
  out.fit = mle_fit(out.exc);
  out.cov = assemble(res.residuals, opts.k, opts.copula, out.fit);
  out.draws = sample_posterior(out.exc, out.fit, out.cov, opts.prior, opts.mcmc, opts.adjusted);
  out.marginal = quantile_posterior(out.draws, out.fit, out.exc, out.cov, target, opts.quantile);
  out.shift = opts.force_shift.value_or(res.one_step_pred);
  out.draws_shifted.resize(out.marginal.q_draws.size());
  for (std::size_t i = 0; i < out.draws_shifted.size(); ++i) {
    out.draws_shifted[i] = out.marginal.q_draws[i] + out.shift;
  }
  return out;
}

/// Per-horizon posteriors for h = 1..h_max from h-step residuals.
inline std::vector<DynamicQuantile> h_step_quantile(const std::vector<double>& y, const ArmaSpec& spec,
                                                    const ExogMatrix* exog, int h_max, double tau_e,
                                                    const DynamicOptions& opts,
                                                    ResidualOptions ropts = {}) {
  if (h_max < 1 || h_max > ropts.max_horizon) {
    std::ostringstream os;
    os << "h_step_quantile: horizon must lie in [1, " << ropts.max_horizon << "], got " << h_max;
    throw InvalidArgument(os.str());
  }
  // fit once; every horizon reuses the coefficients
  if (!ropts.fixed_coefficients) {
    ropts.fixed_coefficients = make_residuals(y, spec, exog, ropts).coef;
  }
  std::vector<DynamicQuantile> out;
  for (int h = 1; h <= h_max; ++h) {
    ropts.horizon = h;
    out.push_back(dynamic_quantile_posterior(make_residuals(y, spec, exog, ropts), tau_e, opts));
  }
  return out;
}

}  // namespace potbayes

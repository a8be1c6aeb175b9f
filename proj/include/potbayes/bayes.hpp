#pragma once

// Priors, the Cholesky-adjusted pseudo-likelihood, an adaptive random-walk
// Metropolis sampler, credible summaries and the refined extreme-quantile
// posterior.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "potbayes/error.hpp"
#include "potbayes/frequentist.hpp"
#include "potbayes/gpd.hpp"
#include "potbayes/likelihood.hpp"
#include "potbayes/random.hpp"
#include "potbayes/serial_covariance.hpp"
#include "potbayes/special.hpp"

namespace potbayes {

enum class GammaPriorKind { kNormal, kFlat, kFixed };
enum class SigmaPriorKind { kLogNormal, kVague, kFlat };

/// Prior on (gamma*, sigma*). Normal gamma priors are truncated to gamma > -1.
/// Sigma priors are empirical: centred or bounded through the MLE sigma_hat.
struct PriorSpec {
  GammaPriorKind gamma_kind = GammaPriorKind::kNormal;
  double gamma_mean = 0.0;
  double gamma_sd = 0.4;
  double gamma_max = 10.0;  // upper end of the flat prior
  double gamma_fixed = 0.0;

  SigmaPriorKind sigma_kind = SigmaPriorKind::kLogNormal;
  double sigma_log_sd = 1.0;
  double sigma_vague_factor = 100.0;  // 1/sigma on (sigma_hat/c, sigma_hat c)

  static PriorSpec flat() {
    PriorSpec p;
    p.gamma_kind = GammaPriorKind::kFlat;
    p.sigma_kind = SigmaPriorKind::kFlat;
    return p;
  }

  /// Log prior density up to a constant; -inf outside the prior support.
  double log_density(const GpParams& v, double sigma_hat) const {
    double lp = 0.0;
    switch (gamma_kind) {
      case GammaPriorKind::kNormal: {
        if (!(v.gamma > -1.0)) return kNegInf;
        const double z = (v.gamma - gamma_mean) / gamma_sd;
        lp += -0.5 * z * z;
        break;
      }
      case GammaPriorKind::kFlat:
        if (!(v.gamma > -1.0 && v.gamma < gamma_max)) return kNegInf;
        break;
      case GammaPriorKind::kFixed:
        break;
    }
    if (!(v.sigma > 0.0)) return kNegInf;
    switch (sigma_kind) {
      case SigmaPriorKind::kLogNormal: {
        const double z = (std::log(v.sigma) - std::log(sigma_hat)) / sigma_log_sd;
        lp += -0.5 * z * z - std::log(v.sigma);
        break;
      }
      case SigmaPriorKind::kVague:
        if (!(v.sigma > sigma_hat / sigma_vague_factor && v.sigma < sigma_hat * sigma_vague_factor)) {
          return kNegInf;
        }
        lp += -std::log(v.sigma);
        break;
      case SigmaPriorKind::kFlat:
        break;
    }
    return lp;
  }

  void validate() const {
    if (gamma_kind == GammaPriorKind::kNormal && !(gamma_sd > 0.0)) {
      throw InvalidArgument("prior: gamma sd must be > 0");
    }
    if (gamma_kind == GammaPriorKind::kFlat && !(gamma_max > -1.0)) {
      throw InvalidArgument("prior: flat gamma upper bound must exceed -1");
    }
    if (sigma_kind == SigmaPriorKind::kLogNormal && !(sigma_log_sd > 0.0)) {
      throw InvalidArgument("prior: sigma log-sd must be > 0");
    }
    if (sigma_kind == SigmaPriorKind::kVague && !(sigma_vague_factor > 1.0)) {
      throw InvalidArgument("prior: vague sigma factor must be > 1");
    }
  }
};

/// Parses "normal:MEAN:SD", "flat[:MAX]" or "fixed:VALUE".
inline void parse_gamma_prior(const std::string& s, PriorSpec& p) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
  auto num = [&](std::size_t i) {
    try {
      return std::stod(parts.at(i));
    } catch (const std::exception&) {
      throw InvalidArgument("bad gamma prior '" + s + "'");
    }
  };
  if (parts.empty()) throw InvalidArgument("empty gamma prior");
  if (parts[0] == "normal" && parts.size() == 3) {
    p.gamma_kind = GammaPriorKind::kNormal;
    p.gamma_mean = num(1);
    p.gamma_sd = num(2);
  } else if (parts[0] == "flat" && parts.size() <= 2) {
    p.gamma_kind = GammaPriorKind::kFlat;
    if (parts.size() == 2) p.gamma_max = num(1);
  } else if (parts[0] == "fixed" && parts.size() == 2) {
    p.gamma_kind = GammaPriorKind::kFixed;
    p.gamma_fixed = num(1);
  } else {
    throw InvalidArgument("bad gamma prior '" + s + "' (normal:MEAN:SD | flat[:MAX] | fixed:VALUE)");
  }
  p.validate();
}

/// Parses "lognormal:SD", "vague[:FACTOR]" or "flat".
inline void parse_sigma_prior(const std::string& s, PriorSpec& p) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
  auto num = [&](std::size_t i) {
    try {
      return std::stod(parts.at(i));
    } catch (const std::exception&) {
      throw InvalidArgument("bad sigma prior '" + s + "'");
    }
  };
  if (parts.empty()) throw InvalidArgument("empty sigma prior");
  if (parts[0] == "lognormal" && parts.size() <= 2) {
    p.sigma_kind = SigmaPriorKind::kLogNormal;
    if (parts.size() == 2) p.sigma_log_sd = num(1);
  } else if (parts[0] == "vague" && parts.size() <= 2) {
    p.sigma_kind = SigmaPriorKind::kVague;
    if (parts.size() == 2) p.sigma_vague_factor = num(1);
  } else if (parts[0] == "flat" && parts.size() == 1) {
    p.sigma_kind = SigmaPriorKind::kFlat;
  } else {
    throw InvalidArgument("bad sigma prior '" + s + "' (lognormal[:SD] | vague[:FACTOR] | flat)");
  }
  p.validate();
}

inline std::string describe(const PriorSpec& p) {
  std::ostringstream os;
  switch (p.gamma_kind) {
    case GammaPriorKind::kNormal: os << "normal:" << p.gamma_mean << ':' << p.gamma_sd; break;
    case GammaPriorKind::kFlat: os << "flat:" << p.gamma_max; break;
    case GammaPriorKind::kFixed: os << "fixed:" << p.gamma_fixed; break;
  }
  os << ' ';
  switch (p.sigma_kind) {
    case SigmaPriorKind::kLogNormal: os << "lognormal:" << p.sigma_log_sd; break;
    case SigmaPriorKind::kVague: os << "vague:" << p.sigma_vague_factor; break;
    case SigmaPriorKind::kFlat: os << "flat"; break;
  }
  return os.str();
}

/// L_n evaluated at theta_hat + D (vstar - theta_hat); -inf off Theta or the
/// data support.
inline double adjusted_loglik(const GpParams& vstar, const GpParams& theta_hat,
                              const Eigen::Matrix2d& d_hat, const ExceedanceSet& exc) {
  const Eigen::Vector2d c(theta_hat.gamma, theta_hat.sigma);
  const Eigen::Vector2d m = c + d_hat * (Eigen::Vector2d(vstar.gamma, vstar.sigma) - c);
  const GpParams mp{m(0), m(1)};
  if (!in_parameter_space(mp)) return kNegInf;
  return empirical_loglik(exc, mp);
}

inline double adjusted_loglik(const GpParams& vstar, const MleFit& fit,
                              const Eigen::Matrix2d& d_hat, const ExceedanceSet& exc) {
  return adjusted_loglik(vstar, fit.params, d_hat, exc);
}

struct McmcOptions {
  std::size_t chains = 2;
  std::size_t iterations = 20000;  // per chain, burn-in included
  double burn_in_fraction = 0.5;
  double target_acceptance = 0.234;
  std::uint64_t seed = 1;
  double rhat_error = 1.05;
  double rhat_clean = 1.01;
  bool throw_on_rhat = true;
};

struct PosteriorDraws {
  std::vector<double> gamma;
  std::vector<double> sigma;
  double acceptance_rate = 0.0;
  std::size_t chains = 0;
  std::size_t chain_length = 0;  // kept draws per chain
  std::size_t burn_in = 0;       // per chain
  bool adjusted = false;
  double rhat = 1.0;
  std::vector<std::string> warnings;

  std::size_t size() const { return gamma.size(); }
};

/// Split-chain potential scale reduction: each chain is halved and the
/// halves are compared as separate sequences.
inline double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> seqs;
  for (const auto& c : chains) {
    const std::size_t h = c.size() / 2;
    if (h < 2) throw InvalidArgument("split_rhat: chains too short");
    seqs.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(h));
    seqs.emplace_back(c.end() - static_cast<std::ptrdiff_t>(h), c.end());
  }
  const double n = static_cast<double>(seqs.front().size());
  const double m = static_cast<double>(seqs.size());
  std::vector<double> means, vars;
  for (const auto& s : seqs) {
    const double mu = std::accumulate(s.begin(), s.end(), 0.0) / n;
    double v = 0.0;
    for (double x : s) v += (x - mu) * (x - mu);
    means.push_back(mu);
    vars.push_back(v / (n - 1.0));
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= n / (m - 1.0);
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
  if (!(w > 0.0)) return b > 0.0 ? kPosInf : 1.0;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

namespace detail {

/// Adaptive random-walk Metropolis on R^d, d in {1, 2}. The proposal
/// covariance is learned from the chain history during burn-in and frozen
/// afterwards.
struct RwmResult {
  std::vector<Eigen::Vector2d> kept;
  std::size_t accepted = 0;  // after burn-in
  std::size_t proposals = 0;
};

template <class LogTarget>
RwmResult run_rwm(LogTarget&& log_target, Eigen::Vector2d x, const Eigen::Matrix2d& cov0,
                             int dim, std::size_t iterations, std::size_t burn_in, double target_acc,
                             Rng& rng) {
  RwmResult out;
  const double d = static_cast<double>(dim);
  double log_scale = std::log(2.38 * 2.38 / d);
  Eigen::Matrix2d cov = cov0;
  if (dim == 1) {
    cov(0, 0) = 0.0;
    cov(0, 1) = cov(1, 0) = 0.0;
  }
  auto factor = [&](const Eigen::Matrix2d& c) {
    Eigen::Matrix2d reg = c;
    const double tr = std::max(c.trace(), 1e-300);
    reg += 1e-10 * tr * Eigen::Matrix2d::Identity();
    if (dim == 1) {
      Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
      l(1, 1) = std::sqrt(std::max(c(1, 1), 1e-300));
      return l;
    }
    Eigen::LLT<Eigen::Matrix2d> llt(reg);
    if (llt.info() != Eigen::Success) {
      Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
      l(0, 0) = std::sqrt(std::max(c(0, 0), 1e-300));
      l(1, 1) = std::sqrt(std::max(c(1, 1), 1e-300));
      return Eigen::Matrix2d(l);
    }
    return Eigen::Matrix2d(llt.matrixL());
  };
  Eigen::Matrix2d chol = factor(cov);

  double lp = log_target(x);
  Eigen::Vector2d run_mean = x;
  Eigen::Matrix2d run_m2 = Eigen::Matrix2d::Zero();
  std::size_t run_n = 1;
  std::size_t window_acc = 0, window_n = 0;

  out.kept.reserve(iterations - burn_in);
  for (std::size_t it = 0; it < iterations; ++it) {
    Eigen::Vector2d z(standard_normal(rng), standard_normal(rng));
    if (dim == 1) z(0) = 0.0;
    const Eigen::Vector2d y = x + std::exp(0.5 * log_scale) * (chol * z);
    const double ly = log_target(y);
    const double u = uniform_open(rng);
    const bool accept = std::isfinite(ly) && std::log(u) < ly - lp;
    if (accept) {
      x = y;
      lp = ly;
    }
    if (it < burn_in) {
      ++window_n;
      window_acc += accept ? 1 : 0;
      ++run_n;
      const Eigen::Vector2d delta = x - run_mean;
      run_mean += delta / static_cast<double>(run_n);
      run_m2 += delta * (x - run_mean).transpose();
      // Robbins-Monro on the global scale, diminishing step
      const double gain = 1.0 / std::pow(static_cast<double>(it + 1), 0.6);
      log_scale += gain * ((accept ? 1.0 : 0.0) - target_acc);
      log_scale = std::clamp(log_scale, -12.0, 6.0);
      if (it >= 500 && it % 100 == 0 && run_n > 50) {
        Eigen::Matrix2d emp = run_m2 / static_cast<double>(run_n - 1);
        if (dim == 1) {
          emp(0, 0) = 0.0;
          emp(0, 1) = emp(1, 0) = 0.0;
        }
        if (emp.trace() > 0.0) {
          cov = emp;
          chol = factor(cov);
        }
      }
    } else {
      ++out.proposals;
      out.accepted += accept ? 1 : 0;
      out.kept.push_back(x);
    }
  }
  return out;
}

}  // namespace detail

/// Inputs that pin down the posterior target.
struct PosteriorProblem {
  const ExceedanceSet* exc = nullptr;
  GpParams theta_hat;
  Eigen::Matrix2d d_hat = Eigen::Matrix2d::Identity();
  /// Starting proposal covariance for (gamma*, sigma*); typically Omega/k.
  Eigen::Matrix2d proposal_cov = Eigen::Matrix2d::Identity();
  PriorSpec prior;
  bool adjusted = false;
};

/// Samples exp(k L*(v)) lambda(v) by adaptive random-walk Metropolis on
/// (gamma*, log sigma*), with the log-scale Jacobian included.
inline PosteriorDraws sample_posterior(const PosteriorProblem& prob, const McmcOptions& mcmc) {
  if (prob.exc == nullptr || prob.exc->k == 0) throw InvalidArgument("sample_posterior: no exceedances");
  if (mcmc.chains < 1) throw InvalidArgument("sample_posterior: need at least one chain");
  if (!(mcmc.burn_in_fraction >= 0.0 && mcmc.burn_in_fraction < 1.0)) {
    throw InvalidArgument("sample_posterior: burn-in fraction must lie in [0,1)");
  }
  const std::size_t burn = static_cast<std::size_t>(
      std::floor(mcmc.burn_in_fraction * static_cast<double>(mcmc.iterations)));
  if (mcmc.iterations - burn < 4) throw InvalidArgument("sample_posterior: too few iterations");
  if (std::abs(prob.d_hat.determinant()) < 1e-300) {
    throw InvalidArgument("sample_posterior: adjustment matrix is singular");
  }
  prob.prior.validate();

  const ExceedanceSet& exc = *prob.exc;
  const double kk = static_cast<double>(exc.k);
  const GpParams th = prob.theta_hat;
  const bool fixed = prob.prior.gamma_kind == GammaPriorKind::kFixed;
  const Eigen::Matrix2d d = prob.adjusted ? prob.d_hat : Eigen::Matrix2d::Identity();

  auto log_target = [&](const Eigen::Vector2d& v) {
    const GpParams p{fixed ? prob.prior.gamma_fixed : v(0), std::exp(v(1))};
    const double lpr = prob.prior.log_density(p, th.sigma);
    if (!std::isfinite(lpr)) return kNegInf;
    const double ll = adjusted_loglik(p, th, d, exc);
    if (!std::isfinite(ll)) return kNegInf;
    return kk * ll + lpr + v(1);  // + log sigma: Jacobian of sigma = exp(v1)
  };

  // proposal covariance mapped to (gamma, log sigma)
  const Eigen::Matrix2d jac = Eigen::Vector2d(1.0, 1.0 / th.sigma).asDiagonal();
  Eigen::Matrix2d cov0 = jac * prob.proposal_cov * jac;
  cov0 = 0.5 * (cov0 + cov0.transpose());
  {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov0);
    if (!(es.eigenvalues()(0) > 0.0)) cov0 = Eigen::Vector2d(cov0(0, 0) > 0 ? cov0(0, 0) : 1e-2 / kk,
                                                             cov0(1, 1) > 0 ? cov0(1, 1) : 1e-2 / kk)
                                                 .asDiagonal();
  }
  const Eigen::Matrix2d l0 = Eigen::LLT<Eigen::Matrix2d>(cov0).matrixL();

  PosteriorDraws out;
  out.adjusted = prob.adjusted;
  out.chains = mcmc.chains;
  out.burn_in = burn;
  out.chain_length = mcmc.iterations - burn;
  std::vector<std::vector<double>> trace_g, trace_s;
  std::size_t acc = 0, props = 0;

  for (std::size_t c = 0; c < mcmc.chains; ++c) {
    Rng rng = make_rng(mcmc.seed, {0xB4E5ULL, c});
    // dispersed start around the centre, redrawn until it has finite target
    Eigen::Vector2d x0(fixed ? prob.prior.gamma_fixed : th.gamma, std::log(th.sigma));
    const Eigen::Vector2d centre = x0;
    for (int attempt = 0; attempt < 200; ++attempt) {
      Eigen::Vector2d z(standard_normal(rng), standard_normal(rng));
      if (fixed) z(0) = 0.0;
      const double spread = attempt < 100 ? 1.5 : 0.1;
      const Eigen::Vector2d cand = centre + spread * (l0 * z);
      if (std::isfinite(log_target(cand))) {
        x0 = cand;
        break;
      }
      x0 = centre;
    }
    if (!std::isfinite(log_target(x0))) {
      throw NonConvergence("sample_posterior: no starting point with finite posterior density",
                           {th.gamma, th.sigma});
    }
    auto res = detail::run_rwm(log_target, x0, cov0, fixed ? 1 : 2, mcmc.iterations, burn,
                               mcmc.target_acceptance, rng);
    acc += res.accepted;
    props += res.proposals;
    std::vector<double> g, ls;
    g.reserve(res.kept.size());
    ls.reserve(res.kept.size());
    for (const auto& v : res.kept) {
      g.push_back(fixed ? prob.prior.gamma_fixed : v(0));
      ls.push_back(v(1));
      out.gamma.push_back(g.back());
      out.sigma.push_back(std::exp(v(1)));
    }
    trace_g.push_back(std::move(g));
    trace_s.push_back(std::move(ls));
  }
  out.acceptance_rate = props ? static_cast<double>(acc) / static_cast<double>(props) : 0.0;
  out.rhat = split_rhat(trace_s);
  if (!fixed) out.rhat = std::max(out.rhat, split_rhat(trace_g));

  if (out.acceptance_rate < 0.1 || out.acceptance_rate > 0.5) {
    std::ostringstream os;
    os << "acceptance rate " << out.acceptance_rate << " outside [0.1, 0.5]";
    out.warnings.push_back(os.str());
  }
  if (!(out.rhat <= mcmc.rhat_error)) {
    std::ostringstream os;
    os << "sample_posterior: rhat " << out.rhat << " exceeds " << mcmc.rhat_error
       << " (acceptance " << out.acceptance_rate << ")";
    if (mcmc.throw_on_rhat) throw NonConvergence(os.str(), {out.rhat, out.acceptance_rate});
    out.warnings.push_back(os.str());
  } else if (out.rhat > mcmc.rhat_clean) {
    std::ostringstream os;
    os << "rhat " << out.rhat << " above " << mcmc.rhat_clean;
    out.warnings.push_back(os.str());
  }
  return out;
}

/// Builds the posterior problem from a fit and its serial covariance. The
/// naive posterior ignores `cov.d_hat` but still uses Omega/k for the
/// initial proposal.
inline PosteriorProblem make_posterior_problem(const ExceedanceSet& exc, const MleFit& fit,
                                               const SerialCovariance& cov, const PriorSpec& prior,
                                               bool adjusted) {
  if (!fit.converged) throw InvalidArgument("posterior: fit did not converge");
  PosteriorProblem p;
  p.exc = &exc;
  p.theta_hat = fit.params;
  p.d_hat = cov.d_hat;
  p.prior = prior;
  p.adjusted = adjusted;
  const double kk = static_cast<double>(exc.k);
  if (adjusted) {
    p.proposal_cov = cov.omega_hat / kk;
  } else {
    p.proposal_cov = cov.a_hat * fisher_info(fit.params.gamma).inverse() * cov.a_hat / kk;
  }
  return p;
}

inline PosteriorDraws sample_posterior(const ExceedanceSet& exc, const MleFit& fit,
                                       const SerialCovariance& cov, const PriorSpec& prior,
                                       const McmcOptions& mcmc, bool adjusted) {
  return sample_posterior(make_posterior_problem(exc, fit, cov, prior, adjusted), mcmc);
}

/// Type-7 (linear interpolation) empirical quantile.
inline double empirical_quantile(std::vector<double> v, double prob) {
  if (v.empty()) throw InvalidArgument("empirical_quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline Interval equi_tailed(const std::vector<double>& v, double alpha) {
  check_alpha(alpha, "credible interval");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return {mean, empirical_quantile(v, alpha / 2.0), empirical_quantile(v, 1.0 - alpha / 2.0)};
}

struct CredibleSummary {
  EllipsoidRegion region;
  Interval gamma;
  Interval sigma;
};

/// Region centred at the draw mean with the draw covariance as shape and
/// radius chi2_{2,1-alpha}; equi-tailed marginal intervals.
inline CredibleSummary credible_summaries(const std::vector<double>& g, const std::vector<double>& s,
                                          double alpha) {
  check_alpha(alpha, "credible_summaries");
  if (g.size() != s.size()) throw InvalidArgument("credible_summaries: mismatched draws");
  if (g.size() < 1000) throw InvalidArgument("credible_summaries: need at least 1000 draws");
  const double n = static_cast<double>(g.size());
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < g.size(); ++i) mean += Eigen::Vector2d(g[i], s[i]);
  mean /= n;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Eigen::Vector2d d = Eigen::Vector2d(g[i], s[i]) - mean;
    cov += d * d.transpose();
  }
  cov /= (n - 1.0);
  CredibleSummary out;
  out.region.center = mean;
  out.region.shape = cov;
  out.region.radius2 = chi2_2df_quantile(1.0 - alpha);
  out.region.alpha = alpha;
  out.gamma = equi_tailed(g, alpha);
  out.sigma = equi_tailed(s, alpha);
  return out;
}

inline CredibleSummary credible_summaries(const PosteriorDraws& d, double alpha) {
  return credible_summaries(d.gamma, d.sigma, alpha);
}

/// How V_hat, the normalized spread of the induced quantile draws, is
/// measured. The sample variance is dominated by the far right tail of the
/// draws when gamma is large and p small.
enum class PosteriorSpread { kSample, kLinearized, kQuantileRange };

inline const char* to_string(PosteriorSpread s) {
  switch (s) {
    case PosteriorSpread::kSample: return "sample";
    case PosteriorSpread::kLinearized: return "linearized";
    case PosteriorSpread::kQuantileRange: return "quantile-range";
  }
  return "?";
}

inline PosteriorSpread posterior_spread_from_string(const std::string& s) {
  if (s == "sample") return PosteriorSpread::kSample;
  if (s == "linearized") return PosteriorSpread::kLinearized;
  if (s == "quantile-range") return PosteriorSpread::kQuantileRange;
  throw InvalidArgument("unknown posterior spread '" + s + "' (sample|linearized|quantile-range)");
}

struct QuantilePosteriorOptions {
  QuantileVarianceOptions variance;
  PosteriorSpread spread = PosteriorSpread::kLinearized;
  std::optional<double> force_c_tilde;
};

struct QuantilePosterior {
  std::vector<double> q_tilde;  // unrefined draws X_{n-k,n} + sigma~ D(gamma~)
  std::vector<double> q_draws;  // refined draws Q_hat + C~ (Q~ - Q_hat)
  double c_tilde = 1.0;
  double q_hat = 0.0;
  double v_hat = 0.0;
  double sigma_hat_q = 0.0;
  std::vector<std::string> warnings;

  Interval interval(double alpha) const { return equi_tailed(q_draws, alpha); }
  Interval unrefined_interval(double alpha) const { return equi_tailed(q_tilde, alpha); }
};

inline std::vector<double> quantile_draws(const std::vector<double>& g, const std::vector<double>& s,
                                          double threshold, double p) {
  std::vector<double> out(g.size());
  const double w = -std::log(p);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = threshold + s[i] * detail::expm1_div(g[i], w);
  return out;
}

/// Refined posterior of the extreme quantile: the induced draws are
/// rescaled about Q_hat so that their normalized spread matches the
/// frequentist variance Sigma_Q.
inline QuantilePosterior quantile_posterior(const std::vector<double>& g, const std::vector<double>& s,
                                            const MleFit& fit, const ExceedanceSet& exc,
                                            const SerialCovariance& cov, const QuantileTarget& target,
                                            const QuantilePosteriorOptions& opts = {}) {
  if (g.empty() || g.size() != s.size()) throw InvalidArgument("quantile_posterior: no draws");
  QuantilePosterior out;
  out.q_tilde = quantile_draws(g, s, exc.threshold, target.p);
  out.q_hat = quantile_point(fit, exc, target);
  const double kk = static_cast<double>(exc.k);
  const double norm = fit.params.sigma * q_integral(fit.params.gamma, 1.0 / target.p);

  const double n = static_cast<double>(out.q_tilde.size());
  double var = 0.0;
  switch (opts.spread) {
    case PosteriorSpread::kSample: {
      const double mean = std::accumulate(out.q_tilde.begin(), out.q_tilde.end(), 0.0) / n;
      for (double q : out.q_tilde) var += (q - mean) * (q - mean);
      var = n > 1.0 ? var / (n - 1.0) : 0.0;
      break;
    }
    case PosteriorSpread::kLinearized: {
      // gradient of the quantile map at the MLE against the draw covariance
      const double mg = std::accumulate(g.begin(), g.end(), 0.0) / n;
      const double ms = std::accumulate(s.begin(), s.end(), 0.0) / n;
      double vgg = 0.0, vgs = 0.0, vss = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        vgg += (g[i] - mg) * (g[i] - mg);
        vgs += (g[i] - mg) * (s[i] - ms);
        vss += (s[i] - ms) * (s[i] - ms);
      }
      const double dn = n > 1.0 ? n - 1.0 : 1.0;
      const double dg = norm;
      const double ds = detail::expm1_div(fit.params.gamma, -std::log(target.p));
      var = (dg * dg * vgg + 2.0 * dg * ds * vgs + ds * ds * vss) / dn;
      break;
    }
    case PosteriorSpread::kQuantileRange: {
      // central 50% range of a normal is 2 * 0.6744897502 sd
      const double r = empirical_quantile(out.q_tilde, 0.75) - empirical_quantile(out.q_tilde, 0.25);
      var = (r / 1.3489795003921634) * (r / 1.3489795003921634);
      break;
    }
  }
  out.v_hat = kk * var / (norm * norm);
  out.sigma_hat_q = quantile_variance(fit, cov, exc.k, target, opts.variance);

  const auto [qmin, qmax] = std::minmax_element(out.q_tilde.begin(), out.q_tilde.end());
  const bool constant = *qmin == *qmax;
  if (opts.force_c_tilde) {
    out.c_tilde = *opts.force_c_tilde;
  } else if (!constant && out.v_hat > 0.0 && std::isfinite(out.v_hat)) {
    out.c_tilde = std::sqrt(out.sigma_hat_q / out.v_hat);
  } else {
    if (!constant) throw InternalError("quantile_posterior: posterior variance V_hat is not positive");
    out.v_hat = 0.0;
    out.c_tilde = 1.0;
    out.warnings.push_back("degenerate posterior: all quantile draws are identical");
  }
  if (!(out.c_tilde > 0.0) || !std::isfinite(out.c_tilde)) {
    throw InternalError("quantile_posterior: rescaling factor is not positive");
  }
  out.q_draws.resize(out.q_tilde.size());
  for (std::size_t i = 0; i < out.q_tilde.size(); ++i) {
    out.q_draws[i] = out.c_tilde == 1.0 ? out.q_tilde[i]
                                        : out.q_hat + out.c_tilde * (out.q_tilde[i] - out.q_hat);
  }
  return out;
}

inline QuantilePosterior quantile_posterior(const PosteriorDraws& d, const MleFit& fit,
                                            const ExceedanceSet& exc, const SerialCovariance& cov,
                                            const QuantileTarget& target,
                                            const QuantilePosteriorOptions& opts = {}) {
  return quantile_posterior(d.gamma, d.sigma, fit, exc, cov, target, opts);
}

inline void write_draws_csv(const PosteriorDraws& d, const std::vector<double>* q, std::ostream& os) {
  os << "gamma,sigma,q_tauE\n";
  os.precision(17);
  for (std::size_t i = 0; i < d.size(); ++i) {
    os << d.gamma[i] << ',' << d.sigma[i] << ',';
    if (q && i < q->size()) os << (*q)[i];
    os << '\n';
  }
}

}  // namespace potbayes

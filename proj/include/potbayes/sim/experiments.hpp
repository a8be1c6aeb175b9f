#pragma once

// Replication harnesses: the covariance-estimator experiment across block
// lengths and the coverage grid.

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "potbayes/bayes.hpp"
#include "potbayes/dynamic.hpp"
#include "potbayes/frequentist.hpp"
#include "potbayes/likelihood.hpp"
#include "potbayes/serial_covariance.hpp"
#include "potbayes/sim/models.hpp"
#include "potbayes/sim/truth.hpp"
#include "potbayes/sim/truth_table.hpp"

namespace potbayes::sim {

// ---------------------------------------------------------------- truths

inline bool same_ratio(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

/// Q0(1 - 1/n) of the marginal (innovation law for the regression models).
inline double true_quantile(Model m, std::size_t n) {
  const double tau = 1.0 - 1.0 / static_cast<double>(n);
  if (auto q = closed_form_quantile(m, tau)) return *q;
  for (const auto& t : kQuantileTruth) {
    if (t.model == model_name(m) && t.n == n) return t.q;
  }
  throw InvalidArgument("no quantile truth for " + std::string(model_name(m)) + " at n = " +
                        std::to_string(n) + "; regenerate the table with potbayes_truthgen");
}

/// a0(n/k) under the mean-of-fits convention.
inline double true_scale(Model m, double ratio) {
  if (auto a = closed_form_scale(m, ratio)) return *a;
  for (const auto& t : kScaleTruth) {
    if (t.model == model_name(m) && same_ratio(t.ratio, ratio)) return t.a0;
  }
  throw InvalidArgument("no scale truth for " + std::string(model_name(m)) + " at k/n = " +
                        std::to_string(ratio) + "; regenerate the table with potbayes_truthgen");
}

inline std::optional<Eigen::Matrix2d> tabulated_sigma(Model m, double ratio) {
  for (const auto& t : kSigmaTruth) {
    if (t.model == model_name(m) && same_ratio(t.ratio, ratio)) {
      Eigen::Matrix2d s;
      s << t.s11, t.s12, t.s12, t.s22;
      return s;
    }
  }
  return std::nullopt;
}

// ------------------------------------------------------------ thread pool

/// Runs body(i) for i in [0, count) on `threads` workers. Each index writes
/// only its own slot, so results do not depend on scheduling.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ------------------------------------------------ covariance experiment

struct SigmaExperimentConfig {
  Model model = Model::kAr1T1;
  std::size_t n = 2000;
  std::size_t k = 100;
  std::vector<std::size_t> m_list = {50};
  std::vector<BlockMode> modes = {BlockMode::kSliding, BlockMode::kDisjoint};
  std::size_t replications = 500;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Replace every series by a thinned long path (control_series): same
  /// marginal, no serial dependence, so the truth is the independence form.
  bool iid_control = false;
  bool keep_draws = false;
};

struct ComponentSummary {
  double mean = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
};

struct SigmaRow {
  std::size_t m = 0;
  BlockMode mode = BlockMode::kSliding;
  std::size_t valid = 0;
  std::size_t failures = 0;
  std::string first_error;
  ComponentSummary s11, s12, s22;
  std::vector<Eigen::Vector3d> draws;  // (s11, s12, s22) per replication when kept
};

struct SigmaExperimentResult {
  SigmaExperimentConfig config;
  Eigen::Matrix2d truth = Eigen::Matrix2d::Zero();
  std::string truth_source;
  std::vector<SigmaRow> rows;
};

inline ComponentSummary summarize_component(std::vector<double> v) {
  ComponentSummary s;
  if (v.empty()) return s;
  double acc = 0.0;
  for (double x : v) acc += x;
  s.mean = acc / static_cast<double>(v.size());
  s.q05 = empirical_quantile(v, 0.05);
  s.q95 = empirical_quantile(std::move(v), 0.95);
  return s;
}

/// Control draws keep the marginal law but not the dependence. Permuting a
/// single path is not enough: its top order statistics still come in
/// clusters, which biases gamma_hat. Every kControlStride-th value of a
/// long path is used instead.
inline constexpr std::size_t kControlStride = 100;

inline std::vector<double> control_series(Model m, std::size_t n, std::uint64_t seed, bool iid) {
  if (!iid) return target_series(m, n, seed);
  const auto path = target_series(m, n * kControlStride, derive_seed(seed, {0x5EF1ULL}));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = path[i * kControlStride];
  return y;
}

/// Raw (unrepaired) Sigma_hat for each m and block mode over N series.
inline SigmaExperimentResult sigma_experiment(const SigmaExperimentConfig& cfg) {
  if (cfg.model != Model::kAr1T1 && cfg.model != Model::kArma11T2 && cfg.model != Model::kArch1) {
    throw InvalidArgument("sigma_experiment: model must be ar1_t1, arma11_t2 or arch1");
  }
  if (cfg.k == 0 || cfg.k >= cfg.n) throw InvalidArgument("sigma_experiment: need 0 < k < n");
  if (cfg.m_list.empty() || cfg.modes.empty()) throw InvalidArgument("sigma_experiment: empty m or mode list");

  SigmaExperimentResult out;
  out.config = cfg;
  const double g0 = true_gamma(cfg.model);
  const double ratio = static_cast<double>(cfg.k) / static_cast<double>(cfg.n);
  if (cfg.iid_control) {
    out.truth = sigma_matrix(g0, 1.0, 1.0);
    out.truth_source = "independence closed form";
  } else if (auto s = tabulated_sigma(cfg.model, ratio)) {
    out.truth = *s;
    out.truth_source = "monte carlo table";
  } else {
    out.truth = mc_sigma(cfg.model, ratio, 200'000, 1000, 4, derive_seed(cfg.seed, {0x7A0ULL}));
    out.truth_source = "monte carlo (computed on demand)";
  }

  const std::size_t nm = cfg.m_list.size() * cfg.modes.size();
  const std::size_t total = cfg.replications;
  // [rep][cell] -> estimate or failure message
  std::vector<std::vector<std::optional<Eigen::Vector3d>>> est(total, std::vector<std::optional<Eigen::Vector3d>>(nm));
  std::vector<std::vector<std::string>> err(total, std::vector<std::string>(nm));

  parallel_for(total, cfg.threads, [&](std::size_t r) {
    const std::uint64_t s = derive_seed(cfg.seed, {hash_name(model_name(cfg.model)), cfg.n, cfg.k, r});
    const auto y = control_series(cfg.model, cfg.n, s, cfg.iid_control);
    MleFit fit;
    try {
      fit = mle_fit(make_exceedances(y, cfg.k));
    } catch (const std::exception& e) {
      for (std::size_t c = 0; c < nm; ++c) err[r][c] = e.what();
      return;
    }
    std::size_t c = 0;
    for (std::size_t m : cfg.m_list) {
      for (BlockMode mode : cfg.modes) {
        try {
          TailCopulaOptions o;
          o.m = m;
          o.mode = mode;
          const auto t = estimate_tail_copula(y, cfg.k, o);
          const auto sm = detail::sigma_matrix_raw(fit.params.gamma, t.r11, r_integral(t));
          est[r][c] = Eigen::Vector3d(sm(0, 0), sm(0, 1), sm(1, 1));
        } catch (const std::exception& e) {
          err[r][c] = e.what();
        }
        ++c;
      }
    }
  });

  std::size_t c = 0;
  for (std::size_t m : cfg.m_list) {
    for (BlockMode mode : cfg.modes) {
      SigmaRow row;
      row.m = m;
      row.mode = mode;
      std::vector<double> a, b, d;
      for (std::size_t r = 0; r < total; ++r) {
        if (est[r][c]) {
          a.push_back((*est[r][c])(0));
          b.push_back((*est[r][c])(1));
          d.push_back((*est[r][c])(2));
          if (cfg.keep_draws) row.draws.push_back(*est[r][c]);
        } else {
          ++row.failures;
          if (row.first_error.empty()) row.first_error = err[r][c];
        }
      }
      row.valid = a.size();
      row.s11 = summarize_component(std::move(a));
      row.s12 = summarize_component(std::move(b));
      row.s22 = summarize_component(std::move(d));
      out.rows.push_back(std::move(row));
      ++c;
    }
  }
  return out;
}

inline void write_sigma_csv(const SigmaExperimentResult& r, std::ostream& os) {
  os << "model,n,k,m,mode,valid,failures,component,truth,mean,q05,q95\n";
  os.precision(10);
  for (const auto& row : r.rows) {
    const ComponentSummary* cs[3] = {&row.s11, &row.s12, &row.s22};
    const char* names[3] = {"s11", "s12", "s22"};
    const double truth[3] = {r.truth(0, 0), r.truth(0, 1), r.truth(1, 1)};
    for (int j = 0; j < 3; ++j) {
      os << model_name(r.config.model) << ',' << r.config.n << ',' << r.config.k << ',' << row.m << ','
         << to_string(row.mode) << ',' << row.valid << ',' << row.failures << ',' << names[j] << ','
         << truth[j] << ',' << cs[j]->mean << ',' << cs[j]->q05 << ',' << cs[j]->q95 << '\n';
    }
  }
}

/// Long format, one row per replication and component.
inline void write_sigma_plot_data(const SigmaExperimentResult& r, std::ostream& os) {
  os << "model,m,mode,replication,component,value\n";
  os.precision(10);
  const char* names[3] = {"s11", "s12", "s22"};
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.draws.size(); ++i) {
      for (int j = 0; j < 3; ++j) {
        os << model_name(r.config.model) << ',' << row.m << ',' << to_string(row.mode) << ',' << i << ','
           << names[j] << ',' << row.draws[i](j) << '\n';
      }
    }
  }
}

// ------------------------------------------------------- coverage grid

enum class Estimator { kBCI, kBACI, kFCI, kBCR, kBACR, kFCR };
enum class Target { kGamma, kScale, kTheta, kQuantile };

inline const char* to_string(Estimator e) {
  switch (e) {
    case Estimator::kBCI: return "BCI";
    case Estimator::kBACI: return "BACI";
    case Estimator::kFCI: return "FCI";
    case Estimator::kBCR: return "BCR";
    case Estimator::kBACR: return "BACR";
    case Estimator::kFCR: return "FCR";
  }
  return "?";
}

inline const char* to_string(Target t) {
  switch (t) {
    case Target::kGamma: return "gamma";
    case Target::kScale: return "a0";
    case Target::kTheta: return "theta";
    case Target::kQuantile: return "Q";
  }
  return "?";
}

struct CellKey {
  Estimator est;
  Target target;
};

/// The twelve reported cells: intervals for gamma, a0 and Q, regions for theta.
inline const std::vector<CellKey>& coverage_cells() {
  static const std::vector<CellKey> cells = [] {
    std::vector<CellKey> c;
    for (Target t : {Target::kGamma, Target::kScale, Target::kQuantile}) {
      for (Estimator e : {Estimator::kBCI, Estimator::kBACI, Estimator::kFCI}) c.push_back({e, t});
    }
    for (Estimator e : {Estimator::kBCR, Estimator::kBACR, Estimator::kFCR}) c.push_back({e, Target::kTheta});
    return c;
  }();
  return cells;
}

struct GridPoint {
  Model model = Model::kAr1T1;
  std::size_t n = 2000;
  std::size_t k = 100;
};

/// Default regression spec fitted in the dynamic variant.
inline ArmaSpec default_arma_spec(Model m) {
  if (m == Model::kArma21T5) return {2, 1, false, 0};
  return {1, 0, false, 0};
}

inline PriorSpec coverage_default_prior() {
  PriorSpec p;
  p.gamma_kind = GammaPriorKind::kFlat;
  return p;
}

struct CoverageConfig {
  std::vector<GridPoint> grid;
  std::size_t replications = 500;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  PriorSpec prior = coverage_default_prior();
  McmcOptions mcmc = [] {
    McmcOptions o;
    o.chains = 2;
    o.iterations = 6000;
    o.throw_on_rhat = false;
    return o;
  }();
  TailCopulaOptions copula;  // m = 50, sliding
  QuantileVarianceOptions variance;
  PosteriorSpread spread = PosteriorSpread::kLinearized;
  std::optional<ArmaSpec> arma;  // per-model default when empty
  double flag_failure_rate = 0.05;
};

struct CoverageCell {
  GridPoint point;
  CellKey key;
  std::size_t hits = 0;
  std::size_t replications = 0;  // configured N
  std::size_t failures = 0;
  double coverage = 0.0;  // hits / (replications - failures)
  bool flagged = false;
};

struct GridSummary {
  GridPoint point;
  double gamma0 = 0.0;
  double a0 = 0.0;
  double q0 = 0.0;  // marginal truth; the dynamic target adds the true mean
  std::size_t failures = 0;
  std::map<std::string, std::size_t> failure_kinds;
  std::size_t nesting_violations = 0;  // 50% set not inside the 95% set
  bool flagged = false;
};

struct CoverageReport {
  CoverageConfig config;
  std::vector<GridSummary> grid;
  std::vector<CoverageCell> cells;

  const CoverageCell* find(Model m, std::size_t n, std::size_t k, Estimator e, Target t) const {
    for (const auto& c : cells) {
      if (c.point.model == m && c.point.n == n && c.point.k == k && c.key.est == e && c.key.target == t) {
        return &c;
      }
    }
    return nullptr;
  }
};

namespace detail {

struct RepOutcome {
  bool ok = false;
  std::string error_kind;
  std::vector<char> hit;  // parallel to coverage_cells()
  bool nested = true;
};

inline bool interval_nested(const Interval& inner, const Interval& outer) {
  return outer.lower <= inner.lower && inner.upper <= outer.upper;
}

/// Every point of the inner ellipsoid (same centre and shape) lies in the outer.
inline bool region_nested(const EllipsoidRegion& inner, const EllipsoidRegion& outer) {
  return inner.radius2 <= outer.radius2;
}

struct RepContext {
  const CoverageConfig* cfg;
  GridPoint pt;
  double gamma0, a0, q0;
};

inline RepOutcome run_replication(const RepContext& ctx, std::size_t rep) {
  const CoverageConfig& cfg = *ctx.cfg;
  const GridPoint& pt = ctx.pt;
  RepOutcome out;
  const std::uint64_t s = derive_seed(cfg.seed, {hash_name(model_name(pt.model)), pt.n, pt.k, rep});
  try {
    const bool dyn = is_dynamic(pt.model);
    const std::size_t n_bar = dyn ? pt.n + static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(pt.n))))
                                  : pt.n;
    // one extra point supplies the realised conditional mean at n_bar + 1
    const auto series = simulate({pt.model, n_bar, s, 1000});
    std::vector<double> data;
    double shift = 0.0, q_truth = ctx.q0;
    ResidualSet res;
    if (dyn) {
      const ArmaSpec spec = cfg.arma.value_or(default_arma_spec(pt.model));
      res = make_residuals(series.y, spec);
      data = res.residuals;
      shift = res.one_step_pred;
      const auto& y = series.y;
      const auto& x = series.innovations;
      const std::size_t t = n_bar - 1;
      const double v_true = pt.model == Model::kArma21T5 ? 0.5 * y[t] + 0.1875 * y[t - 1] + 0.8 * x[t]
                                                         : 0.8 * y[t];
      q_truth = v_true + ctx.q0;
    } else {
      data = series.y;
    }
    const std::size_t n = data.size();
    const auto exc = make_exceedances(data, pt.k);
    const auto fit = mle_fit(exc);
    const auto cov = assemble(data, pt.k, cfg.copula, fit);
    const auto target = make_quantile_target(1.0 - 1.0 / static_cast<double>(n), n, pt.k);

    McmcOptions mc = cfg.mcmc;
    mc.seed = derive_seed(s, {0xB1ULL});
    const auto naive = sample_posterior(exc, fit, cov, cfg.prior, mc, false);
    mc.seed = derive_seed(s, {0xB2ULL});
    const auto adj = sample_posterior(exc, fit, cov, cfg.prior, mc, true);

    QuantilePosteriorOptions qo;
    qo.variance = cfg.variance;
    qo.spread = cfg.spread;
    const auto qn = quantile_posterior(naive, fit, exc, cov, target, qo);
    const auto qa = quantile_posterior(adj, fit, exc, cov, target, qo);

    const Eigen::Vector2d theta0(ctx.gamma0, ctx.a0);
    const std::size_t k = exc.k;
    auto shifted = [&](Interval iv) {
      iv.point += shift;
      iv.lower += shift;
      iv.upper += shift;
      return iv;
    };

    struct Sets {
      CredibleSummary bn, ba;
      ParamIntervals f;
      EllipsoidRegion fr;
      Interval qbn, qba, qf;
    };
    auto build = [&](double alpha) {
      Sets st{credible_summaries(naive, alpha), credible_summaries(adj, alpha), param_intervals(fit, cov, k, alpha),
              confidence_ellipsoid(fit, cov, k, alpha), shifted(qn.unrefined_interval(alpha)),
              shifted(qa.interval(alpha)), shifted(quantile_interval(fit, cov, exc, target, alpha, cfg.variance))};
      return st;
    };
    const Sets main = build(cfg.alpha);
    const Sets half = build(0.5);

    for (const auto& c : coverage_cells()) {
      bool h = false;
      switch (c.target) {
        case Target::kGamma:
          h = c.est == Estimator::kBCI    ? main.bn.gamma.contains(ctx.gamma0)
              : c.est == Estimator::kBACI ? main.ba.gamma.contains(ctx.gamma0)
                                          : main.f.gamma.contains(ctx.gamma0);
          break;
        case Target::kScale:
          h = c.est == Estimator::kBCI    ? main.bn.sigma.contains(ctx.a0)
              : c.est == Estimator::kBACI ? main.ba.sigma.contains(ctx.a0)
                                          : main.f.sigma.contains(ctx.a0);
          break;
        case Target::kQuantile:
          h = c.est == Estimator::kBCI    ? main.qbn.contains(q_truth)
              : c.est == Estimator::kBACI ? main.qba.contains(q_truth)
                                          : main.qf.contains(q_truth);
          break;
        case Target::kTheta:
          h = c.est == Estimator::kBCR    ? main.bn.region.contains(theta0)
              : c.est == Estimator::kBACR ? main.ba.region.contains(theta0)
                                          : main.fr.contains(theta0);
          break;
      }
      out.hit.push_back(h ? 1 : 0);
    }

    out.nested = interval_nested(half.bn.gamma, main.bn.gamma) && interval_nested(half.ba.gamma, main.ba.gamma) &&
                 interval_nested(half.f.gamma, main.f.gamma) && interval_nested(half.bn.sigma, main.bn.sigma) &&
                 interval_nested(half.ba.sigma, main.ba.sigma) && interval_nested(half.f.sigma, main.f.sigma) &&
                 interval_nested(half.qbn, main.qbn) && interval_nested(half.qba, main.qba) &&
                 interval_nested(half.qf, main.qf) && region_nested(half.bn.region, main.bn.region) &&
                 region_nested(half.ba.region, main.ba.region) && region_nested(half.fr, main.fr);
    out.ok = true;
  } catch (const Error& e) {
    out.error_kind = e.kind();
  } catch (const std::exception&) {
    out.error_kind = "exception";
  }
  return out;
}

}  // namespace detail

/// Runs every grid point for N replications. Replication r of a point owns
/// the seed derived from (seed, model, n, k, r), so the report does not
/// depend on the thread count.
inline CoverageReport coverage_experiment(const CoverageConfig& cfg) {
  if (cfg.grid.empty()) throw InvalidArgument("coverage_experiment: empty grid");
  check_alpha(cfg.alpha, "coverage_experiment");
  for (const auto& pt : cfg.grid) {
    if (pt.k == 0 || pt.k >= pt.n) throw InvalidArgument("coverage_experiment: need 0 < k < n");
  }
  CoverageReport rep;
  rep.config = cfg;
  if (cfg.replications == 0) {
    for (const auto& pt : cfg.grid) rep.grid.push_back({pt});
    return rep;
  }

  for (const auto& pt : cfg.grid) {
    detail::RepContext ctx{&cfg, pt, true_gamma(pt.model),
                           true_scale(pt.model, static_cast<double>(pt.k) / static_cast<double>(pt.n)),
                           true_quantile(pt.model, pt.n)};
    std::vector<detail::RepOutcome> outcomes(cfg.replications);
    parallel_for(cfg.replications, cfg.threads,
                 [&](std::size_t r) { outcomes[r] = detail::run_replication(ctx, r); });

    GridSummary gs{pt, ctx.gamma0, ctx.a0, ctx.q0};
    const auto& keys = coverage_cells();
    std::vector<std::size_t> hits(keys.size(), 0);
    for (const auto& o : outcomes) {
      if (!o.ok) {
        ++gs.failures;
        ++gs.failure_kinds[o.error_kind];
        continue;
      }
      if (!o.nested) ++gs.nesting_violations;
      for (std::size_t j = 0; j < keys.size(); ++j) hits[j] += o.hit[j];
    }
    gs.flagged = static_cast<double>(gs.failures) > cfg.flag_failure_rate * static_cast<double>(cfg.replications);
    const std::size_t valid = cfg.replications - gs.failures;
    for (std::size_t j = 0; j < keys.size(); ++j) {
      CoverageCell c;
      c.point = pt;
      c.key = keys[j];
      c.hits = hits[j];
      c.replications = cfg.replications;
      c.failures = gs.failures;
      c.coverage = valid ? static_cast<double>(hits[j]) / static_cast<double>(valid) : 0.0;
      c.flagged = gs.flagged;
      rep.cells.push_back(c);
    }
    rep.grid.push_back(std::move(gs));
  }
  return rep;
}

inline void write_coverage_csv(const CoverageReport& r, std::ostream& os) {
  os << "model,n,k,estimator,target,hits,replications,failures,coverage,flagged\n";
  os.precision(10);
  for (const auto& c : r.cells) {
    os << model_name(c.point.model) << ',' << c.point.n << ',' << c.point.k << ',' << to_string(c.key.est) << ','
       << to_string(c.key.target) << ',' << c.hits << ',' << c.replications << ',' << c.failures << ','
       << c.coverage << ',' << (c.flagged ? 1 : 0) << '\n';
  }
}

/// Long format with a binomial 95% band around each coverage.
/// Wilson score interval for a binomial proportion; z = 1.96.
inline std::pair<double, double> wilson_band(double phat, double trials, double z = 1.96) {
  if (!(trials > 0)) return {0.0, 1.0};
  const double z2 = z * z / trials;
  const double centre = (phat + z2 / 2.0) / (1.0 + z2);
  const double half = z * std::sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials)) / (1.0 + z2);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

inline void write_coverage_plot_data(const CoverageReport& r, std::ostream& os) {
  os << "model,n,k,estimator,target,nominal,coverage,band_lower,band_upper\n";
  os.precision(10);
  const double nominal = 1.0 - r.config.alpha;
  for (const auto& c : r.cells) {
    const auto [lo, hi] = wilson_band(c.coverage, static_cast<double>(c.replications - c.failures));
    os << model_name(c.point.model) << ',' << c.point.n << ',' << c.point.k << ',' << to_string(c.key.est) << ','
       << to_string(c.key.target) << ',' << nominal << ',' << c.coverage << ',' << lo << ',' << hi << '\n';
  }
}

}  // namespace potbayes::sim

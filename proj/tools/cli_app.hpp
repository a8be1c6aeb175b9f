#pragma once

// The potbayes command line. Kept in a header so the tests can drive it
// in-process; potbayes_cli.cpp only forwards argv.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "potbayes/potbayes.hpp"

namespace potbayes::cli {

using json = nlohmann::json;

struct AnalysisConfig {
  std::string mode;
  // data
  std::string input;
  std::string column;
  std::string na_policy = "error";
  std::string exog;
  // tail sample
  std::size_t k = 0;
  double tau_i = 0.0;
  std::vector<double> tau_e;
  double alpha = 0.05;
  // serial covariance
  std::size_t m = 50;
  std::string block = "sliding";
  // priors and sampler
  std::string prior_gamma = "flat:10";
  std::string prior_sigma = "lognormal:1";
  std::size_t chains = 2;
  std::size_t iters = 20000;
  double burn_in = 0.5;
  std::uint64_t seed = 1;
  std::string variance_method = "delta";
  std::string posterior_spread = "linearized";
  // outputs
  std::string out;
  std::string csv;
  std::string draws_out;
  std::string plot_data;
  bool deterministic = false;
  // simulate / experiments
  std::string model = "ar1_t1";
  std::size_t n = 2000;
  std::size_t burn = 1000;
  std::vector<std::string> cells;
  std::size_t replications = 500;
  unsigned threads = 1;
  std::vector<std::size_t> m_list;
  std::vector<std::string> modes;
  bool iid_control = false;
  // regression
  int p = 1;
  int q = 0;
  bool no_mean = false;
  std::size_t warmup = 0;  // 0 selects the default
  int horizon = 1;
};

inline json to_json(const AnalysisConfig& c) {
  json j = {{"mode", c.mode}, {"seed", c.seed}, {"deterministic", c.deterministic}, {"out", c.out}};
  const bool analysis = c.mode == "fit" || c.mode == "posterior" || c.mode == "quantile" || c.mode == "covmat" ||
                        c.mode == "dynamic" || c.mode == "forecast";
  if (analysis) {
    j["input"] = c.input;
    j["column"] = c.column;
    j["na_policy"] = c.na_policy;
    j["k"] = c.k;
    j["tau_i"] = c.tau_i;
    j["tau_e"] = c.tau_e;
    j["alpha"] = c.alpha;
    j["m"] = c.m;
    j["block"] = c.block;
    j["variance_method"] = c.variance_method;
    j["posterior_spread"] = c.posterior_spread;
    j["prior_gamma"] = c.prior_gamma;
    j["prior_sigma"] = c.prior_sigma;
    j["chains"] = c.chains;
    j["iters"] = c.iters;
    j["burn_in_fraction"] = c.burn_in;
    j["draws_out"] = c.draws_out;
    j["csv"] = c.csv;
  }
  if (c.mode == "dynamic" || c.mode == "forecast") {
    j["exog"] = c.exog;
    j["p"] = c.p;
    j["q"] = c.q;
    j["include_mean"] = !c.no_mean;
    j["warmup"] = c.warmup;
    j["horizon"] = c.horizon;
  }
  if (c.mode == "simulate") {
    j["model"] = c.model;
    j["n"] = c.n;
    j["burn_in"] = c.burn;
    j["csv"] = c.csv;
  }
  if (c.mode == "coverage" || c.mode == "sigma-exp") {
    j["replications"] = c.replications;
    j["threads"] = c.threads;
    j["csv"] = c.csv;
    j["emit_plot_data"] = c.plot_data;
  }
  if (c.mode == "coverage") {
    j["cells"] = c.cells;
    j["alpha"] = c.alpha;
    j["m"] = c.m;
    j["block"] = c.block;
    j["prior_gamma"] = c.prior_gamma;
    j["prior_sigma"] = c.prior_sigma;
    j["chains"] = c.chains;
    j["iters"] = c.iters;
    j["burn_in_fraction"] = c.burn_in;
    j["variance_method"] = c.variance_method;
    j["posterior_spread"] = c.posterior_spread;
  }
  if (c.mode == "sigma-exp") {
    j["model"] = c.model;
    j["n"] = c.n;
    j["k"] = c.k;
    j["m_list"] = c.m_list;
    j["modes"] = c.modes;
    j["iid_control"] = c.iid_control;
  }
  return j;
}

/// Wall-clock stage timings; zeroed in deterministic mode.
class Timer {
 public:
  explicit Timer(bool deterministic) : deterministic_(deterministic) {}

  template <class F>
  auto stage(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(name, t0);
    } else {
      auto r = f();
      record(name, t0);
      return r;
    }
  }

  json to_json() const { return timings_; }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point t0) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    timings_[name] = deterministic_ ? 0.0 : timings_.value(name, 0.0) + s;
  }

  bool deterministic_;
  json timings_ = json::object();
};

namespace detail {

inline PriorSpec make_prior(const AnalysisConfig& c) {
  PriorSpec p;
  parse_gamma_prior(c.prior_gamma, p);
  parse_sigma_prior(c.prior_sigma, p);
  return p;
}

inline McmcOptions make_mcmc(const AnalysisConfig& c) {
  McmcOptions o;
  o.chains = c.chains;
  o.iterations = c.iters;
  o.burn_in_fraction = c.burn_in;
  o.seed = c.seed;
  return o;
}

inline TailCopulaOptions make_copula(const AnalysisConfig& c) {
  TailCopulaOptions o;
  o.m = c.m;
  o.mode = block_mode_from_string(c.block);
  return o;
}

inline QuantilePosteriorOptions make_quantile_opts(const AnalysisConfig& c) {
  QuantilePosteriorOptions o;
  o.variance.method = variance_method_from_string(c.variance_method);
  o.spread = posterior_spread_from_string(c.posterior_spread);
  return o;
}

/// k from --k or --tau-i, then every tau_E checked against the sample.
inline std::size_t resolve_k(AnalysisConfig& c, std::size_t n) {
  if (c.k == 0 && c.tau_i > 0.0) {
    if (!(c.tau_i < 1.0)) throw InvalidArgument("--tau-i must lie in (0,1)");
    c.k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - c.tau_i)));
  }
  if (c.k == 0) throw InvalidArgument("need --k or --tau-i");
  if (c.k >= n) {
    throw InvalidArgument("k = " + std::to_string(c.k) + " must be smaller than the sample size " + std::to_string(n));
  }
  const double tau_i = 1.0 - static_cast<double>(c.k) / static_cast<double>(n);
  for (double t : c.tau_e) {
    if (!(t > tau_i && t < 1.0)) {
      std::ostringstream os;
      os << "tau_E = " << t << " must lie in (1 - k/n, 1) = (" << tau_i << ", 1)";
      throw InvalidArgument(os.str());
    }
  }
  return c.k;
}

inline void validate_common(const AnalysisConfig& c) {
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw InvalidArgument("--alpha must lie in (0,1)");
  make_prior(c);
  variance_method_from_string(c.variance_method);
  posterior_spread_from_string(c.posterior_spread);
  block_mode_from_string(c.block);
  io::na_policy_from_string(c.na_policy);
  if (c.chains < 1) throw InvalidArgument("--chains must be >= 1");
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write '" + path + "'", "write_error");
  return os;
}

inline io::SeriesLoad load(const AnalysisConfig& c) {
  if (c.input.empty()) throw InvalidArgument("--input is required");
  io::LoadOptions lo;
  lo.column = c.column;
  lo.na_policy = io::na_policy_from_string(c.na_policy);
  return io::ingest_csv(c.input, lo);
}

inline json data_summary(const io::SeriesLoad& s, const std::string& path) {
  return {{"path", path}, {"column", s.column}, {"n", s.values.size()}, {"dropped", s.dropped}};
}

// ------------------------------------------------------------ marginal

inline json run_marginal(AnalysisConfig& c, Timer& timer, std::vector<std::string>& warnings) {
  validate_common(c);
  const auto data = timer.stage("load", [&] { return load(c); });
  for (const auto& w : data.warnings) warnings.push_back(w);
  const std::size_t n = data.values.size();
  const std::size_t k = resolve_k(c, n);
  if (c.mode == "quantile" && c.tau_e.empty()) throw InvalidArgument("quantile needs at least one --tau-e");

  json r;
  r["data"] = data_summary(data, c.input);
  const auto exc = make_exceedances(data.values, k);
  r["exceedances"] = report::exceedances(exc);
  const auto fit = timer.stage("fit", [&] { return mle_fit(exc); });
  r["fit"] = report::fit(fit);
  const auto copula = make_copula(c);
  const auto table = timer.stage("covariance", [&] { return estimate_tail_copula(data.values, k, copula); });
  auto cov = assemble_from_table(table, fit);
  if (table.clamped > 0) cov.warnings.push_back(std::to_string(table.clamped) + " tail-copula grid value(s) clipped");
  r["covariance"] = report::covariance(cov);

  if (c.mode == "covmat") {
    r["tail_copula"] = {{"grid", table.grid}, {"r_u1", table.values_r_u1}, {"r11", table.r11},
                        {"r_int", r_integral(table)}, {"m", table.m}, {"gap", table.gap},
                        {"mode", to_string(table.mode)}, {"windows", table.windows}, {"clamped", table.clamped}};
    if (!c.csv.empty()) {
      auto os = open_out(c.csv);
      write_tail_copula_csv(table, os);
    }
    return r;
  }

  const auto pint = param_intervals(fit, cov, k, c.alpha);
  r["frequentist"] = {{"FCR", report::region(confidence_ellipsoid(fit, cov, k, c.alpha))},
                      {"FCI_gamma", report::interval(pint.gamma)},
                      {"FCI_sigma", report::interval(pint.sigma)}};
  const auto qopts = make_quantile_opts(c);
  json quantiles = json::array();
  std::vector<QuantileTarget> targets;
  for (double t : c.tau_e) {
    const auto tg = make_quantile_target(t, n, k);
    targets.push_back(tg);
    for (const auto& w : target_warnings(tg, k)) warnings.push_back(w);
    quantiles.push_back({{"target", report::target(tg)},
                         {"q_hat", quantile_point(fit, exc, tg)},
                         {"FCI", report::interval(quantile_interval(fit, cov, exc, tg, c.alpha, qopts.variance))}});
  }
  if (c.mode == "fit") {
    r["quantiles"] = quantiles;
    return r;
  }

  const auto prior = make_prior(c);
  auto mc = make_mcmc(c);
  mc.seed = derive_seed(c.seed, {0xB1ULL});
  const auto naive = timer.stage("mcmc", [&] { return sample_posterior(exc, fit, cov, prior, mc, false); });
  mc.seed = derive_seed(c.seed, {0xB2ULL});
  const auto adj = timer.stage("mcmc", [&] { return sample_posterior(exc, fit, cov, prior, mc, true); });
  for (const auto& w : naive.warnings) warnings.push_back("naive posterior: " + w);
  for (const auto& w : adj.warnings) warnings.push_back("adjusted posterior: " + w);
  const auto bn = credible_summaries(naive, c.alpha), ba = credible_summaries(adj, c.alpha);
  r["bayes"] = {{"BCR", report::region(bn.region)},      {"BCI_gamma", report::interval(bn.gamma)},
                {"BCI_sigma", report::interval(bn.sigma)}, {"BACR", report::region(ba.region)},
                {"BACI_gamma", report::interval(ba.gamma)}, {"BACI_sigma", report::interval(ba.sigma)},
                {"prior", describe(prior)},
                {"diagnostics", {{"naive", report::diagnostics(naive)}, {"adjusted", report::diagnostics(adj)}}}};

  std::vector<double> first_q;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto qn = quantile_posterior(naive, fit, exc, cov, targets[i], qopts);
    const auto qa = quantile_posterior(adj, fit, exc, cov, targets[i], qopts);
    quantiles[i]["BCI"] = report::interval(qn.unrefined_interval(c.alpha));
    quantiles[i]["BACI"] = report::interval(qa.interval(c.alpha));
    quantiles[i]["posterior"] = report::quantile(qa, c.alpha);
    for (const auto& w : qa.warnings) warnings.push_back(w);
    if (i == 0) first_q = qa.q_draws;
  }
  r["quantiles"] = quantiles;
  if (!c.draws_out.empty()) {
    auto os = open_out(c.draws_out);
    write_draws_csv(adj, first_q.empty() ? nullptr : &first_q, os);
  }
  return r;
}

// ------------------------------------------------------------- dynamic

inline json run_dynamic(AnalysisConfig& c, Timer& timer, std::vector<std::string>& warnings) {
  validate_common(c);
  const auto data = timer.stage("load", [&] { return load(c); });
  for (const auto& w : data.warnings) warnings.push_back(w);
  if (c.tau_e.empty()) throw InvalidArgument(c.mode + " needs at least one --tau-e");
  ArmaSpec spec{c.p, c.q, !c.no_mean, 0};
  std::optional<ExogMatrix> exog;
  if (!c.exog.empty()) {
    exog = io::ingest_matrix(c.exog);
    spec.exog_dim = static_cast<int>(exog->cols());
  }
  spec.validate();
  ResidualOptions ro;
  if (c.warmup > 0) ro.warmup = c.warmup;
  const std::size_t nb = data.values.size();
  const std::size_t n = nb - (c.warmup > 0 ? c.warmup : default_warmup(nb));
  const std::size_t k = resolve_k(c, n);

  DynamicOptions dopt;
  dopt.k = k;
  dopt.prior = make_prior(c);
  dopt.copula = make_copula(c);
  dopt.mcmc = make_mcmc(c);
  dopt.quantile = make_quantile_opts(c);

  json r;
  r["data"] = data_summary(data, c.input);
  const ExogMatrix* ex = exog ? &*exog : nullptr;
  if (c.mode == "dynamic") {
    const auto res = timer.stage("arma", [&] { return make_residuals(data.values, spec, ex, ro); });
    for (const auto& w : res.warnings) warnings.push_back(w);
    r["arma"] = report::arma(res);
    json qs = json::array();
    for (double t : c.tau_e) {
      const auto d = timer.stage("posterior", [&] { return dynamic_quantile_posterior(res, t, dopt); });
      json j = report::dynamic_quantile(d, c.alpha);
      j["tau_e"] = t;
      j["FCI"] = [&] {
        const auto tg = make_quantile_target(t, res.residuals.size(), k);
        auto iv = quantile_interval(d.fit, d.cov, d.exc, tg, c.alpha, dopt.quantile.variance);
        iv.point += d.shift;
        iv.lower += d.shift;
        iv.upper += d.shift;
        return report::interval(iv);
      }();
      qs.push_back(j);
    }
    r["quantiles"] = qs;
    return r;
  }

  // forecast: one fit, h-step residuals per horizon
  if (c.horizon < 1) throw InvalidArgument("--horizon must be >= 1");
  if (!ro.fixed_coefficients) {
    const auto base = timer.stage("arma", [&] { return make_residuals(data.values, spec, ex, ro); });
    r["arma"] = report::arma(base);
    ro.fixed_coefficients = base.coef;
  }
  json hs = json::array();
  for (double t : c.tau_e) {
    const auto out = timer.stage("posterior", [&] { return h_step_quantile(data.values, spec, ex, c.horizon, t, dopt, ro); });
    for (std::size_t h = 0; h < out.size(); ++h) {
      json j = report::dynamic_quantile(out[h], c.alpha);
      j["tau_e"] = t;
      j["horizon"] = h + 1;
      hs.push_back(j);
    }
  }
  r["forecasts"] = hs;
  return r;
}

// ---------------------------------------------------------- simulation

inline json run_simulate(AnalysisConfig& c, Timer& timer) {
  const auto m = sim::model_from_name(c.model);
  if (c.n == 0) throw InvalidArgument("--n must be positive");
  if (c.csv.empty()) throw InvalidArgument("simulate needs --csv for the series");
  const auto s = timer.stage("simulate", [&] { return sim::simulate({m, c.n, c.seed, c.burn}); });
  auto os = open_out(c.csv);
  os.precision(17);
  const bool innov = !s.innovations.empty();
  os << "y" << (innov ? ",innovation" : "") << '\n';
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    os << s.y[i];
    if (innov) os << ',' << s.innovations[i];
    os << '\n';
  }
  return {{"model", c.model}, {"n", c.n}, {"csv", c.csv}, {"gamma0", sim::true_gamma(m)},
          {"has_innovations", innov}};
}

inline sim::GridPoint parse_cell(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
  if (parts.size() != 3) throw InvalidArgument("bad --cell '" + s + "' (expected MODEL:N:K)");
  try {
    return {sim::model_from_name(parts[0]), std::stoul(parts[1]), std::stoul(parts[2])};
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidArgument("bad --cell '" + s + "' (expected MODEL:N:K)");
  }
}

inline json run_coverage(AnalysisConfig& c, Timer& timer) {
  validate_common(c);
  sim::CoverageConfig cfg;
  if (c.cells.empty()) c.cells = {"ar1_t1:2000:100"};
  for (const auto& s : c.cells) cfg.grid.push_back(parse_cell(s));
  cfg.replications = c.replications;
  cfg.alpha = c.alpha;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  cfg.prior = make_prior(c);
  cfg.mcmc = make_mcmc(c);
  cfg.mcmc.throw_on_rhat = false;
  cfg.copula = make_copula(c);
  cfg.variance.method = variance_method_from_string(c.variance_method);
  cfg.spread = posterior_spread_from_string(c.posterior_spread);
  const auto rep = timer.stage("coverage", [&] { return sim::coverage_experiment(cfg); });
  if (!c.csv.empty()) {
    auto os = open_out(c.csv);
    sim::write_coverage_csv(rep, os);
  }
  if (!c.plot_data.empty()) {
    auto os = open_out(c.plot_data);
    sim::write_coverage_plot_data(rep, os);
  }
  return report::coverage(rep);
}

inline json run_sigma(AnalysisConfig& c, Timer& timer) {
  sim::SigmaExperimentConfig cfg;
  cfg.model = sim::model_from_name(c.model);
  cfg.n = c.n;
  cfg.k = c.k == 0 ? 100 : c.k;
  c.k = cfg.k;
  if (!c.m_list.empty()) cfg.m_list = c.m_list;
  if (!c.modes.empty()) {
    cfg.modes.clear();
    for (const auto& s : c.modes) cfg.modes.push_back(block_mode_from_string(s));
  }
  c.m_list = cfg.m_list;
  c.modes.clear();
  for (auto md : cfg.modes) c.modes.push_back(to_string(md));
  cfg.replications = c.replications;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  cfg.iid_control = c.iid_control;
  cfg.keep_draws = !c.plot_data.empty();
  const auto res = timer.stage("sigma_experiment", [&] { return sim::sigma_experiment(cfg); });
  if (!c.csv.empty()) {
    auto os = open_out(c.csv);
    sim::write_sigma_csv(res, os);
  }
  if (!c.plot_data.empty()) {
    auto os = open_out(c.plot_data);
    sim::write_sigma_plot_data(res, os);
  }
  return report::sigma_experiment(res);
}

}  // namespace detail

// -------------------------------------------------------------- options

inline void add_output(CLI::App* sc, AnalysisConfig& c) {
  sc->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sc->add_option("--out", c.out, "JSON report path (stdout when empty)");
  sc->add_flag("--deterministic", c.deterministic, "zero the wall-clock timings in the report");
}

inline void add_data(CLI::App* sc, AnalysisConfig& c) {
  sc->add_option("--input", c.input, "CSV file with a header row");
  sc->add_option("--column", c.column, "column name or 1-based index (default: first)");
  sc->add_option("--na-policy", c.na_policy, "error | drop")->capture_default_str();
}

inline void add_tail(CLI::App* sc, AnalysisConfig& c) {
  sc->add_option("--k", c.k, "number of exceedances");
  sc->add_option("--tau-i", c.tau_i, "intermediate level; k = round(n (1 - tau_I))");
  sc->add_option("--tau-e", c.tau_e, "extreme level (repeatable)");
  sc->add_option("--alpha", c.alpha, "1 - nominal level")->capture_default_str();
}

inline void add_cov(CLI::App* sc, AnalysisConfig& c) {
  sc->add_option("--m", c.m, "block length")->capture_default_str();
  sc->add_option("--block", c.block, "sliding | disjoint")->capture_default_str();
  sc->add_option("--variance-method", c.variance_method, "delta | independence | mc")->capture_default_str();
}

inline void add_bayes(CLI::App* sc, AnalysisConfig& c) {
  sc->add_option("--prior-gamma", c.prior_gamma, "normal:MEAN:SD | flat[:MAX] | fixed:VALUE")->capture_default_str();
  sc->add_option("--prior-sigma", c.prior_sigma, "lognormal[:SD] | vague[:FACTOR] | flat")->capture_default_str();
  sc->add_option("--chains", c.chains, "MCMC chains")->capture_default_str();
  sc->add_option("--iters", c.iters, "iterations per chain, burn-in included")->capture_default_str();
  sc->add_option("--burn-in", c.burn_in, "burn-in fraction")->capture_default_str();
  sc->add_option("--posterior-spread", c.posterior_spread, "sample | linearized | quantile-range")
      ->capture_default_str();
}

inline void add_arma(CLI::App* sc, AnalysisConfig& c) {
  sc->add_option("--exog", c.exog, "CSV of exogenous regressors (rows align with the series)");
  sc->add_option("--p", c.p, "AR order")->capture_default_str();
  sc->add_option("--q", c.q, "MA order")->capture_default_str();
  sc->add_flag("--no-mean", c.no_mean, "fit without an intercept");
  sc->add_option("--warmup", c.warmup, "discarded warm-up length (default: n_bar - n with n + ceil(sqrt n) = n_bar)");
}

struct Outcome {
  int exit_code = 0;
  json report;
};

inline Outcome execute(AnalysisConfig& c) {
  Timer timer(c.deterministic);
  std::vector<std::string> warnings;
  json rep = {{"schema_version", report::kSchemaVersion}, {"tool", "potbayes"}, {"mode", c.mode}};
  int code = 0;
  try {
    json result;
    if (c.mode == "fit" || c.mode == "posterior" || c.mode == "quantile" || c.mode == "covmat") {
      result = detail::run_marginal(c, timer, warnings);
    } else if (c.mode == "dynamic" || c.mode == "forecast") {
      result = detail::run_dynamic(c, timer, warnings);
    } else if (c.mode == "simulate") {
      result = detail::run_simulate(c, timer);
    } else if (c.mode == "coverage") {
      result = detail::run_coverage(c, timer);
    } else if (c.mode == "sigma-exp") {
      result = detail::run_sigma(c, timer);
    } else {
      throw InvalidArgument("unknown mode '" + c.mode + "'");
    }
    rep["status"] = "ok";
    rep["result"] = result;
  } catch (const Error& e) {
    code = static_cast<int>(e.code());
    rep["status"] = "error";
    rep["error"] = {{"code", code}, {"class", std::string(to_string(e.code()))}, {"kind", e.kind()},
                    {"message", e.what()}};
  } catch (const std::exception& e) {
    code = static_cast<int>(ErrorCode::kInternal);
    rep["status"] = "error";
    rep["error"] = {{"code", code}, {"class", "internal_error"}, {"kind", "exception"}, {"message", e.what()}};
  }
  rep["config"] = to_json(c);
  rep["warnings"] = warnings;
  rep["timings"] = timer.to_json();
  return {code, rep};
}

/// Parses argv, runs the selected subcommand and writes the report. Returns
/// the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Peaks-over-threshold inference for serially dependent series"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI file; sections are named after subcommands, flags win");
  AnalysisConfig c;

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"fit", "MLE, serial covariance and frequentist regions"},
      {"posterior", "fit plus naive and adjusted posteriors"},
      {"quantile", "posterior plus extreme-quantile posteriors (needs --tau-e)"},
      {"covmat", "tail-copula table and the covariance matrices"},
      {"simulate", "write a simulated series to --csv"},
      {"coverage", "coverage experiment over a model/n/k grid"},
      {"sigma-exp", "covariance-estimator experiment across block lengths"},
      {"dynamic", "ARMA residual pipeline with a conditional quantile posterior"},
      {"forecast", "h-step conditional quantile posteriors"},
  };
  for (const auto& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    sc->configurable();
    sc->fallthrough();
    add_output(sc, c);
    const std::string name = s.name;
    if (name == "simulate") {
      sc->add_option("--model", c.model, "ar1_t1 | arma11_t2 | arch1 | clayton_exp | clayton_power | arma21_t5 | ar1_garch11")
          ->capture_default_str();
      sc->add_option("--n", c.n, "length")->capture_default_str();
      sc->add_option("--burn-in", c.burn, "discarded start-up length")->capture_default_str();
      sc->add_option("--csv", c.csv, "output series CSV");
      continue;
    }
    if (name == "coverage") {
      sc->add_option("--cell", c.cells, "MODEL:N:K (repeatable; default ar1_t1:2000:100)");
      sc->add_option("--replications", c.replications, "N")->capture_default_str();
      sc->add_option("--threads", c.threads, "worker threads (0: all cores)")->capture_default_str();
      sc->add_option("--alpha", c.alpha, "1 - nominal level")->capture_default_str();
      sc->add_option("--csv", c.csv, "cell table CSV");
      sc->add_option("--emit-plot-data", c.plot_data, "long-format CSV for plotting");
      add_cov(sc, c);
      add_bayes(sc, c);
      continue;
    }
    if (name == "sigma-exp") {
      sc->add_option("--model", c.model, "ar1_t1 | arma11_t2 | arch1")->capture_default_str();
      sc->add_option("--n", c.n, "series length")->capture_default_str();
      sc->add_option("--k", c.k, "exceedances (default 100)");
      sc->add_option("--m", c.m_list, "block length (repeatable; default 50)");
      sc->add_option("--block", c.modes, "sliding | disjoint (repeatable; default both)");
      sc->add_option("--replications", c.replications, "N")->capture_default_str();
      sc->add_option("--threads", c.threads, "worker threads (0: all cores)")->capture_default_str();
      sc->add_flag("--iid-control", c.iid_control, "replace each series by a thinned long path (no serial dependence)");
      sc->add_option("--csv", c.csv, "summary CSV");
      sc->add_option("--emit-plot-data", c.plot_data, "long-format CSV of every estimate");
      continue;
    }
    add_data(sc, c);
    add_tail(sc, c);
    add_cov(sc, c);
    if (name == "covmat") {
      sc->add_option("--csv", c.csv, "tail-copula table CSV");
      continue;
    }
    if (name != "fit") {
      add_bayes(sc, c);
      sc->add_option("--draws-out", c.draws_out, "CSV of adjusted posterior draws");
    }
    if (name == "dynamic" || name == "forecast") add_arma(sc, c);
    if (name == "forecast") sc->add_option("--horizon", c.horizon, "largest horizon h")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    json rep = {{"schema_version", report::kSchemaVersion},
                {"tool", "potbayes"},
                {"status", "error"},
                {"error", {{"code", 2}, {"class", "config_error"}, {"kind", "parse"}, {"message", e.what()}}}};
    out << rep.dump(2) << '\n';
    return static_cast<int>(ErrorCode::kConfig);
  }
  for (auto* sc : app.get_subcommands()) c.mode = sc->get_name();

  auto outcome = execute(c);
  const std::string text = outcome.report.dump(2) + "\n";
  if (c.out.empty()) {
    out << text;
  } else {
    std::ofstream os(c.out);
    if (!os) {
      err << "error: cannot write '" << c.out << "'\n";
      out << text;
      return outcome.exit_code ? outcome.exit_code : static_cast<int>(ErrorCode::kData);
    }
    os << text;
  }
  if (outcome.exit_code != 0) err << "error: " << outcome.report["error"]["message"].get<std::string>() << '\n';
  return outcome.exit_code;
}

}  // namespace potbayes::cli

#pragma once

// JSON views of every result type. Objects serialize with sorted keys, so
// equal inputs give byte-identical reports.

#include <json.hpp>

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "potbayes/bayes.hpp"
#include "potbayes/dynamic.hpp"
#include "potbayes/frequentist.hpp"
#include "potbayes/likelihood.hpp"
#include "potbayes/serial_covariance.hpp"
#include "potbayes/sim/experiments.hpp"

namespace potbayes::report {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1.0";

inline json matrix(const Eigen::Matrix2d& m) {
  return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

inline json interval(const Interval& iv) {
  return {{"point", iv.point}, {"lower", iv.lower}, {"upper", iv.upper}};
}

inline json region(const EllipsoidRegion& r) {
  return {{"center", {r.center(0), r.center(1)}}, {"shape", matrix(r.shape)}, {"radius2", r.radius2}, {"alpha", r.alpha}};
}

inline json exceedances(const ExceedanceSet& e) {
  return {{"n", e.n}, {"k", e.k}, {"threshold", e.threshold}, {"ties_dropped", e.ties_dropped}};
}

inline json fit(const MleFit& f) {
  return {{"gamma", f.params.gamma},   {"sigma", f.params.sigma},       {"loglik", f.loglik},
          {"converged", f.converged}, {"iterations", f.iterations}, {"warnings", f.warnings}};
}

inline json covariance(const SerialCovariance& c) {
  return {{"sigma_hat", matrix(c.sigma_hat)}, {"omega_hat", matrix(c.omega_hat)}, {"c_hat", matrix(c.c_hat)},
          {"d_hat", matrix(c.d_hat)},         {"info_hat", matrix(c.info_hat)},   {"r11", c.r11},
          {"r_int", c.r_int},                 {"repaired", c.repaired},           {"warnings", c.warnings}};
}

inline json diagnostics(const PosteriorDraws& d) {
  return {{"acceptance_rate", d.acceptance_rate},
          {"rhat", d.rhat},
          {"chains", d.chains},
          {"kept_per_chain", d.chain_length},
          {"burn_in_per_chain", d.burn_in},
          {"warnings", d.warnings}};
}

inline json posterior(const PosteriorDraws& d, double alpha) {
  const auto cs = credible_summaries(d, alpha);
  return {{"adjusted", d.adjusted},
          {"region", region(cs.region)},
          {"gamma", interval(cs.gamma)},
          {"sigma", interval(cs.sigma)},
          {"diagnostics", diagnostics(d)}};
}

inline json quantile(const QuantilePosterior& q, double alpha) {
  return {{"q_hat", q.q_hat},
          {"c_tilde", q.c_tilde},
          {"v_hat", q.v_hat},
          {"sigma_hat_q", q.sigma_hat_q},
          {"refined", interval(q.interval(alpha))},
          {"unrefined", interval(q.unrefined_interval(alpha))},
          {"median", empirical_quantile(q.q_draws, 0.5)},
          {"warnings", q.warnings}};
}

inline json target(const QuantileTarget& t) { return {{"tau_e", t.tau_e}, {"tau_i", t.tau_i}, {"p", t.p}}; }

inline json arma(const ResidualSet& r) {
  return {{"p", r.spec.p},
          {"q", r.spec.q},
          {"include_mean", r.spec.include_mean},
          {"exog_dim", r.spec.exog_dim},
          {"mean", r.coef.mean},
          {"phi", r.coef.phi},
          {"psi", r.coef.psi},
          {"beta", r.coef.beta},
          {"warmup_discarded", r.discarded},
          {"residuals", r.residuals.size()},
          {"horizon", r.horizon},
          {"conditional_mean_forecast", r.one_step_pred},
          {"warnings", r.warnings}};
}

inline json dynamic_quantile(const DynamicQuantile& d, double alpha) {
  json j = quantile(d.marginal, alpha);
  j["shift"] = d.shift;
  j["q_hat"] = d.q_hat();
  j["refined"] = interval(d.interval(alpha));
  j["unrefined"] = interval(d.unrefined_interval(alpha));
  j["median"] = empirical_quantile(d.draws_shifted, 0.5);
  j["fit"] = fit(d.fit);
  j["exceedances"] = exceedances(d.exc);
  j["posterior"] = posterior(d.draws, alpha);
  return j;
}

inline json coverage(const sim::CoverageReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"model", sim::model_name(c.point.model)},
                     {"n", c.point.n},
                     {"k", c.point.k},
                     {"estimator", sim::to_string(c.key.est)},
                     {"target", sim::to_string(c.key.target)},
                     {"hits", c.hits},
                     {"replications", c.replications},
                     {"failures", c.failures},
                     {"coverage", c.coverage},
                     {"flagged", c.flagged}});
  }
  json grid = json::array();
  for (const auto& g : r.grid) {
    grid.push_back({{"model", sim::model_name(g.point.model)},
                    {"n", g.point.n},
                    {"k", g.point.k},
                    {"gamma0", g.gamma0},
                    {"a0", g.a0},
                    {"q0", g.q0},
                    {"failures", g.failures},
                    {"failure_kinds", g.failure_kinds},
                    {"nesting_violations", g.nesting_violations},
                    {"flagged", g.flagged}});
  }
  return {{"alpha", r.config.alpha}, {"replications", r.config.replications}, {"grid", grid}, {"cells", cells}};
}

inline json sigma_experiment(const sim::SigmaExperimentResult& r) {
  auto comp = [](const sim::ComponentSummary& s) { return json{{"mean", s.mean}, {"q05", s.q05}, {"q95", s.q95}}; };
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"m", row.m},
                    {"mode", to_string(row.mode)},
                    {"valid", row.valid},
                    {"failures", row.failures},
                    {"first_error", row.first_error},
                    {"s11", comp(row.s11)},
                    {"s12", comp(row.s12)},
                    {"s22", comp(row.s22)}});
  }
  return {{"model", sim::model_name(r.config.model)},
          {"n", r.config.n},
          {"k", r.config.k},
          {"replications", r.config.replications},
          {"iid_control", r.config.iid_control},
          {"truth", matrix(r.truth)},
          {"truth_source", r.truth_source},
          {"rows", rows}};
}

}  // namespace potbayes::report

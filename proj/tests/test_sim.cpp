#include <catch2/catch_amalgamated.hpp>

#include <boost/math/distributions/cauchy.hpp>
#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "potbayes/sim/experiments.hpp"

using namespace potbayes;
using namespace potbayes::sim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// one-sample Kolmogorov-Smirnov distance
double ks_distance(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

// asymptotic 1% critical value, sqrt(-log(0.005)/2)/sqrt(n)
double ks_crit(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

std::vector<double> thin(const std::vector<double>& x, std::size_t step) {
  std::vector<double> out;
  for (std::size_t i = 0; i < x.size(); i += step) out.push_back(x[i]);
  return out;
}

double kendall_tau_lag1(const std::vector<double>& x) {
  long long conc = 0, disc = 0;
  const std::size_t n = x.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = (x[i] - x[j]) * (x[i + 1] - x[j + 1]);
      if (s > 0) ++conc;
      if (s < 0) ++disc;
    }
  }
  return static_cast<double>(conc - disc) / static_cast<double>(conc + disc);
}

double hill(std::vector<double> x, std::size_t k) {
  std::sort(x.begin(), x.end(), std::greater<>());
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += std::log(x[i] / x[k]);
  return acc / static_cast<double>(k);
}

}  // namespace

TEST_CASE("cauchy ar1 has the Cauchy(0, 5) stationary law", "[sim]") {
  const auto s = simulate({Model::kAr1T1, 400'000, 11, 1000});
  const auto x = thin(s.y, 40);  // 0.8^40 leaves the draws essentially independent
  boost::math::cauchy_distribution<> c(0.0, 5.0);
  CHECK(ks_distance(x, [&](double v) { return boost::math::cdf(c, v); }) < ks_crit(x.size()));
  CHECK_THAT(true_quantile(Model::kAr1T1, 2000), WithinRel(boost::math::quantile(c, 1.0 - 1.0 / 2000), 1e-10));
}

TEST_CASE("regression innovations follow their laws", "[sim]") {
  const auto e = simulate({Model::kArma21T5, 20'000, 5, 1000});
  REQUIRE(e.innovations.size() == e.y.size());
  boost::math::students_t_distribution<> t5(5.0);
  CHECK(ks_distance(e.innovations, [&](double v) { return boost::math::cdf(t5, v); }) < ks_crit(20'000));

  // innovations are recovered by inverting the ARMA recursion
  double ym1 = e.y[1], ym2 = e.y[0], xm1 = e.innovations[1];
  for (std::size_t t = 2; t < 50; ++t) {
    CHECK_THAT(e.y[t], WithinAbs(0.5 * ym1 + 0.1875 * ym2 + e.innovations[t] + 0.8 * xm1, 1e-12));
    ym2 = ym1;
    ym1 = e.y[t];
    xm1 = e.innovations[t];
  }

  const auto g = simulate({Model::kAr1Garch11, 400'000, 6, 1000});
  double v = 0.0;
  for (double x : g.innovations) v += x * x;
  v /= static_cast<double>(g.innovations.size());
  CHECK_THAT(v, WithinRel(2e-5 / (1.0 - 0.4 - 0.3), 0.1));
  double num = 0.0, den = 0.0;
  for (std::size_t t = 1; t < g.y.size(); ++t) {
    num += g.y[t] * g.y[t - 1];
    den += g.y[t - 1] * g.y[t - 1];
  }
  CHECK_THAT(num / den, WithinAbs(0.8, 0.01));
}

TEST_CASE("clayton chains are stationary with the copula's Kendall tau", "[sim]") {
  for (Model m : {Model::kClaytonExp, Model::kClaytonPower}) {
    const auto s = simulate({m, 200'000, 21, 0});
    const double eta = clayton_eta(m);
    std::function<double(double)> cdf;
    if (m == Model::kClaytonExp) {
      boost::math::exponential_distribution<> ex(1.0);
      cdf = [ex](double v) { return boost::math::cdf(ex, std::max(v, 0.0)); };
    } else {
      cdf = [](double v) { return v >= 1.0 ? 1.0 : 1.0 - std::pow(1.0 - v, 3) / 9.0; };
    }
    // started in the stationary law, so no burn-in is needed: both halves
    // match the margin
    const std::vector<double> head(s.y.begin(), s.y.begin() + 100'000);
    const std::vector<double> tail(s.y.begin() + 100'000, s.y.end());
    CHECK(ks_distance(thin(head, 20), cdf) < ks_crit(5000));
    CHECK(ks_distance(thin(tail, 20), cdf) < ks_crit(5000));

    const std::vector<double> short_run(s.y.begin(), s.y.begin() + 4000);
    CHECK_THAT(kendall_tau_lag1(short_run), WithinAbs(eta / (eta + 2.0), 0.04));
  }
}

TEST_CASE("tail indices of the heavy-tailed generators", "[sim]") {
  // Hill on long paths; k/n = 0.002 keeps the second-order bias small and
  // k is large enough that clustering (extremal index ~0.2) still leaves a
  // standard error near 0.02
  const auto a = simulate({Model::kAr1T1, 5'000'000, 31, 1000});
  CHECK_THAT(hill(a.y, 10'000), WithinAbs(1.0, 0.08));
  const auto b = simulate({Model::kArma11T2, 1'000'000, 32, 1000});
  CHECK_THAT(hill(b.y, 2000), WithinAbs(0.5, 0.05));
  const auto c = simulate({Model::kArch1, 2'000'000, 33, 1000});
  CHECK_THAT(hill(c.y, 2000), WithinAbs(true_gamma(Model::kArch1), 0.06));
}

TEST_CASE("tabulated quantile truth agrees with a fresh simulation", "[sim]") {
  // independent stream; 1e6 draws leave ~500 above the 1 - 1/2000 level
  const auto x = target_series(Model::kArch1, 1'000'000, 987654);
  const double q = empirical_quantile(x, 1.0 - 1.0 / 2000);
  CHECK_THAT(q, WithinRel(true_quantile(Model::kArch1, 2000), 0.1));
  CHECK_THROWS_AS(true_quantile(Model::kArch1, 1234), InvalidArgument);
}

TEST_CASE("unknown model names are rejected", "[sim]") {
  CHECK(model_from_name("arch1") == Model::kArch1);
  CHECK_THROWS_AS(model_from_name("ar2"), InvalidArgument);
  CHECK_THROWS_AS(simulate({Model::kAr1T1, 0, 1, 0}), InvalidArgument);
}

TEST_CASE("simulation is reproducible from the seed", "[sim]") {
  const auto a = simulate({Model::kArch1, 500, 77, 100});
  const auto b = simulate({Model::kArch1, 500, 77, 100});
  const auto c = simulate({Model::kArch1, 500, 78, 100});
  CHECK(a.y == b.y);
  CHECK(a.y != c.y);
}

TEST_CASE("coverage experiment with zero replications", "[sim][experiments]") {
  CoverageConfig cfg;
  cfg.grid = {{Model::kAr1T1, 2000, 100}};
  cfg.replications = 0;
  const auto r = coverage_experiment(cfg);
  CHECK(r.cells.empty());
  REQUIRE(r.grid.size() == 1);
  CHECK(r.grid[0].failures == 0);
  std::ostringstream os;
  write_coverage_csv(r, os);
  CHECK(os.str().find('\n') == os.str().size() - 1);  // header only
}

TEST_CASE("coverage experiment does not depend on the thread count", "[sim][experiments]") {
  CoverageConfig cfg;
  cfg.grid = {{Model::kArch1, 1000, 50}, {Model::kArma21T5, 1000, 50}};
  cfg.replications = 6;
  cfg.seed = 99;
  cfg.mcmc.iterations = 1000;
  cfg.threads = 1;
  const auto one = coverage_experiment(cfg);
  cfg.threads = 3;
  const auto three = coverage_experiment(cfg);
  REQUIRE(one.cells.size() == 2 * coverage_cells().size());
  REQUIRE(one.cells.size() == three.cells.size());
  for (std::size_t i = 0; i < one.cells.size(); ++i) {
    CHECK(one.cells[i].hits == three.cells[i].hits);
    CHECK(one.cells[i].failures == three.cells[i].failures);
  }
  std::ostringstream a, b;
  write_coverage_csv(one, a);
  write_coverage_csv(three, b);
  CHECK(a.str() == b.str());
}

TEST_CASE("coverage cells and band", "[sim][experiments]") {
  CHECK(coverage_cells().size() == 12);
  // Wilson interval for 45/50 at z = 1.96
  const auto [lo, hi] = wilson_band(0.9, 50);
  CHECK_THAT(lo, WithinAbs(0.7864, 1e-3));
  CHECK_THAT(hi, WithinAbs(0.9565, 1e-3));
  const auto [lo1, hi1] = wilson_band(1.0, 20);
  CHECK(lo1 < 1.0);
  CHECK_THAT(hi1, WithinAbs(1.0, 1e-12));
}

TEST_CASE("sigma experiment does not depend on the thread count", "[sim][experiments]") {
  SigmaExperimentConfig cfg;
  cfg.model = Model::kArma11T2;
  cfg.replications = 12;
  cfg.m_list = {25, 50};
  cfg.threads = 1;
  const auto a = sigma_experiment(cfg);
  cfg.threads = 4;
  const auto b = sigma_experiment(cfg);
  REQUIRE(a.rows.size() == 4);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].s11.mean == b.rows[i].s11.mean);
    CHECK(a.rows[i].s22.q95 == b.rows[i].s22.q95);
  }
  CHECK(a.truth_source == "monte carlo table");
}

TEST_CASE("iid control recovers the independence covariance", "[sim][experiments]") {
  SigmaExperimentConfig cfg;
  cfg.model = Model::kAr1T1;
  cfg.n = 2000;
  cfg.k = 100;
  cfg.replications = 200;
  cfg.modes = {BlockMode::kSliding};
  cfg.iid_control = true;
  cfg.seed = 4;
  const auto r = sigma_experiment(cfg);
  REQUIRE(r.rows.size() == 1);
  // independent oracle: the R = min closed form written out by hand
  const double g = 1.0;
  const Eigen::Matrix2d oracle{{(1 + g) * (1 + g), -(1 + g)}, {-(1 + g), (2 + g) * (2 + g) - 2 * (1 + g)}};
  CHECK(r.truth_source == "independence closed form");
  CHECK(r.truth.isApprox(oracle, 1e-12));
  CHECK_THAT(r.rows[0].s11.mean, WithinRel(oracle(0, 0), 0.1));
  CHECK_THAT(r.rows[0].s12.mean, WithinRel(oracle(0, 1), 0.1));
  CHECK_THAT(r.rows[0].s22.mean, WithinRel(oracle(1, 1), 0.1));
}

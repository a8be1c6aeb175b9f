#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "potbayes/likelihood.hpp"

using namespace potbayes;
using Catch::Approx;

namespace {

std::vector<double> gp_sample(std::size_t n, GpParams p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) {
    double u;
    do u = unif(rng); while (u == 0.0);
    x = gp_quantile(u, p);
  }
  return out;
}

ExceedanceSet all_as_excesses(const std::vector<double>& xs) {
  return exceedances_from_excesses(xs, 0.0, xs.size() * 10);
}

double fd_loglik(const ExceedanceSet& e, GpParams p, int which, double h) {
  GpParams a = p, b = p;
  (which == 0 ? a.gamma : a.sigma) += h;
  (which == 0 ? b.gamma : b.sigma) -= h;
  return (empirical_loglik(e, a) - empirical_loglik(e, b)) / (2.0 * h);
}

}  // namespace

TEST_CASE("exceedance set construction", "[likelihood]") {
  const std::vector<double> data{1, 2, 3, 4, 5};
  const auto e = make_exceedances(data, 2);
  CHECK(e.threshold == 3.0);
  CHECK(e.excesses == std::vector<double>{1.0, 2.0});
  CHECK(e.n == 5);
  CHECK(e.k == 2);
  CHECK_THROWS_AS(make_exceedances(data, 5), InvalidArgument);
  CHECK_THROWS_AS(make_exceedances(data, 0), InvalidArgument);

  const std::vector<double> tied{1, 3, 3, 3, 5, 6};
  const auto t = make_exceedances(tied, 4);
  CHECK(t.threshold == 3.0);
  CHECK(t.k == 2);
  CHECK(t.ties_dropped == 2);
}

TEST_CASE("empirical_loglik reference values", "[likelihood]") {
  const std::vector<double> data{1, 2, 3, 4, 5};
  const auto e = make_exceedances(data, 2);
  CHECK(empirical_loglik(e, {0.0, 1.0}) == Approx(-1.5).epsilon(1e-15));
  CHECK(empirical_loglik(e, {1.0, 1.0}) == Approx(-std::log(6.0)).epsilon(1e-14));
  CHECK(empirical_loglik(e, {-1.0, 1.5}) == kNegInf);
  ExceedanceSet empty;
  CHECK_THROWS_AS(empirical_loglik(empty, {0.0, 1.0}), InvalidArgument);
}

TEST_CASE("MLE on iid exponential data", "[likelihood][mle]") {
  auto data = gp_sample(10000, {0.0, 1.0}, 11);
  const auto fit = mle_fit(make_exceedances(data, 1000));
  CHECK(fit.converged);
  CHECK(fit.params.gamma >= -0.1);
  CHECK(fit.params.gamma <= 0.1);
  CHECK(fit.params.sigma >= 0.85);
  CHECK(fit.params.sigma <= 1.15);
  const auto si = score_and_info(make_exceedances(data, 1000), fit.params);
  CHECK(std::abs(si.score(0)) < 1e-5);
  CHECK(std::abs(si.score(1)) < 1e-5);
}

TEST_CASE("MLE on two excesses against a grid search", "[likelihood][mle]") {
  const auto e = all_as_excesses({1.0, 2.0});
  MleOptions opts;
  opts.min_k = 2;
  auto grid_best = [&](double g_lo) {
    double best = kNegInf;
    for (int i = 0; i <= 600; ++i) {
      const double g = g_lo + (5.0 - g_lo) * i / 600.0;
      for (int j = 0; j <= 8000; ++j) {
        const double s = 0.01 * std::pow(2000.0, j / 8000.0);
        best = std::max(best, empirical_loglik(e, {g, s}));
      }
    }
    return best;
  };
  // the supremum -log 2 is approached as gamma -> -1, so no interior maximum
  // exists and the best edge point is reported through the error
  double fitted = kNegInf;
  CHECK_THROWS_AS(mle_fit(e, opts), NonConvergence);
  try {
    mle_fit(e, opts);
  } catch (const NonConvergence& nc) {
    fitted = nc.best_value();
    CHECK(nc.best()[0] == Approx(-1.0).margin(1e-3));
  }
  CHECK(fitted >= grid_best(-0.99));
  CHECK(fitted == Approx(-std::log(2.0)).margin(1e-3));
  CHECK(std::abs(fitted - grid_best(-0.99999)) < 1e-3);
}

TEST_CASE("MLE scale equivariance and translation invariance", "[likelihood][mle]") {
  auto data = gp_sample(4000, {0.3, 2.0}, 5);
  const auto base = mle_fit(make_exceedances(data, 400));
  auto scaled = data;
  for (auto& x : scaled) x *= 10.0;
  const auto fs = mle_fit(make_exceedances(scaled, 400));
  CHECK(fs.params.gamma == Approx(base.params.gamma).margin(1e-9));
  CHECK(fs.params.sigma == Approx(10.0 * base.params.sigma).epsilon(1e-9));

  // dyadic data and shift keep every excess exactly representable
  std::vector<double> dy(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) dy[i] = std::ldexp(std::round(std::ldexp(data[i], 20)), -20);
  auto shifted = dy;
  for (auto& x : shifted) x += 1024.0;
  const auto e1 = make_exceedances(dy, 400);
  const auto e2 = make_exceedances(shifted, 400);
  REQUIRE(e1.excesses == e2.excesses);
  const auto f1 = mle_fit(e1);
  const auto f2 = mle_fit(e2);
  CHECK(f1.params == f2.params);
  CHECK(f1.loglik == f2.loglik);
}

TEST_CASE("MLE never ends below the moment start", "[likelihood][mle]") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto data = gp_sample(600, {-0.2 + 0.1 * static_cast<double>(seed % 7), 1.0}, seed);
    const auto e = make_exceedances(data, 120);
    const auto& xs = e.excesses;
    double mean = 0.0, var = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(e.k);
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(e.k - 1);
    const double r = mean * mean / var;
    const GpParams start{0.5 * (1.0 - r), 0.5 * mean * (1.0 + r)};
    const auto fit = mle_fit(e);
    const double l0 = empirical_loglik(e, start);
    CHECK((!std::isfinite(l0) || fit.loglik >= l0));
  }
}

TEST_CASE("degenerate and small samples", "[likelihood][mle]") {
  CHECK_THROWS_AS(mle_fit(all_as_excesses({1.0, 1.0, 1.0, 1.0, 1.0, 1.0})), DegenerateSample);
  CHECK_THROWS_AS(mle_fit(all_as_excesses({1.0, 2.0, 3.0})), InvalidArgument);
}

TEST_CASE("analytic score and information against finite differences", "[likelihood][score]") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ug(-0.45, 2.0), us(0.3, 4.0);
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const GpParams truth{ug(rng), us(rng)};
    auto xs = gp_sample(60, truth, 1000 + rep);
    const auto e = all_as_excesses(xs);
    // evaluate at a perturbed interior point
    GpParams p{truth.gamma + 0.05 * (ug(rng) - 0.775), truth.sigma * (0.9 + 0.05 * us(rng))};
    if (p.gamma < 0.0 && !(1.0 + p.gamma * e.max_excess() / p.sigma > 0.05)) continue;
    if (std::abs(p.gamma) < 1e-3) p.gamma = 1e-3;
    const auto si = score_and_info(e, p);
    const double hg = 1e-6 * std::max(1.0, std::abs(p.gamma));
    const double hs = 1e-6 * p.sigma;
    CHECK(si.score(0) == Approx(fd_loglik(e, p, 0, hg)).margin(1e-4));
    CHECK(si.score(1) == Approx(fd_loglik(e, p, 1, hs)).margin(1e-4));

    // Hessian from differences of the analytic score
    const double h2 = 1e-5;
    GpParams pg1 = p, pg2 = p, ps1 = p, ps2 = p;
    pg1.gamma += h2; pg2.gamma -= h2;
    ps1.sigma += h2 * p.sigma; ps2.sigma -= h2 * p.sigma;
    const Eigen::Vector2d dg = (score_and_info(e, pg1).score - score_and_info(e, pg2).score) / (2 * h2);
    const Eigen::Vector2d ds =
        (score_and_info(e, ps1).score - score_and_info(e, ps2).score) / (2 * h2 * p.sigma);
    const double tol = 1e-3 * std::max(1.0, si.observed_info.cwiseAbs().maxCoeff());
    CHECK(-si.observed_info(0, 0) == Approx(dg(0)).margin(tol));
    CHECK(-si.observed_info(0, 1) == Approx(dg(1)).margin(tol));
    CHECK(-si.observed_info(1, 0) == Approx(ds(0)).margin(tol));
    CHECK(-si.observed_info(1, 1) == Approx(ds(1)).margin(tol));
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("score derivatives across the gamma seam", "[likelihood][score]") {
  const auto e = all_as_excesses({0.1, 0.5, 1.0, 2.0, 4.0, 9.0});
  for (double g : {-2e-6, -5e-7, 0.0, 5e-7, 2e-6, 0.02}) {
    const GpParams p{g, 1.7};
    const auto si = score_and_info(e, p);
    CHECK(si.score(0) == Approx(fd_loglik(e, p, 0, 1e-4)).margin(1e-4));
    CHECK(si.score(1) == Approx(fd_loglik(e, p, 1, 1e-6)).margin(1e-6));
  }
}

TEST_CASE("boundary excess is an error", "[likelihood][score]") {
  const auto e = all_as_excesses({0.5, 1.0, 2.0});
  CHECK_THROWS_AS(score_and_info(e, {-0.5, 1.0}), BoundaryError);
}

TEST_CASE("Fisher information closed form", "[likelihood][fisher]") {
  const auto i0 = fisher_info(0.0);
  CHECK(i0(0, 0) == Approx(2.0));
  CHECK(i0(0, 1) == Approx(1.0));
  CHECK(i0(1, 1) == Approx(1.0));
  CHECK_THROWS_AS(fisher_info(-0.5), InvalidArgument);
  // information identity with a modest Monte-Carlo sample; the acceptance
  // suite repeats this at 10^6 draws
  for (double g : {-0.2, 0.0, 0.5}) {
    auto xs = gp_sample(200000, {g, 1.0}, 7);
    Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
    for (double x : xs) {
      const auto d = detail::gp_point_derivs(x, g, 1.0);
      Eigen::Vector2d s(d.dg, d.ds);
      acc += s * s.transpose();
    }
    acc /= static_cast<double>(xs.size());
    const auto fi = fisher_info(g);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) CHECK(acc(r, c) == Approx(fi(r, c)).epsilon(0.03));
  }
}

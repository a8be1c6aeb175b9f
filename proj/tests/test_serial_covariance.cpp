#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "potbayes/serial_covariance.hpp"
#include "potbayes/sim/models.hpp"

using namespace potbayes;
using Catch::Approx;

namespace {

std::vector<double> iid_uniform(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = uniform_open(rng);
  return v;
}

Eigen::Matrix2d random_spd(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Eigen::Matrix2d a;
  a << u(rng), u(rng), u(rng), u(rng);
  return a * a.transpose() + 0.05 * Eigen::Matrix2d::Identity();
}

MleFit fake_fit(double g, double s) {
  MleFit f;
  f.params = {g, s};
  f.converged = true;
  f.loglik = 0.0;
  return f;
}

}  // namespace

TEST_CASE("default grid", "[covariance]") {
  const auto g = default_copula_grid();
  REQUIRE(g.size() == 64);
  CHECK(g.back() == 1.0);
  CHECK(g.front() > 0.0);
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(g[1] - g[0] < g[63] - g[62]);
}

TEST_CASE("tail copula on iid data", "[covariance]") {
  const auto data = iid_uniform(100000, 3);
  TailCopulaOptions opts;
  opts.m = 50;
  const auto t = estimate_tail_copula(data, 500, opts);
  CHECK(t.r11 >= 0.85);
  CHECK(t.r11 <= 1.15);
  CHECK(t.windows == 100000 - 50 - 1);
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    CHECK(t.values_r_u1[i] >= 0.0);
    CHECK(t.values_r_u1[i] <= 50.0 * t.grid[i]);
  }
  // the smooth part follows R(u,1) = u under independence
  CHECK(r_integral(t) == Approx(1.0).margin(0.15));

  opts.grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.9, 1.0};
  const auto t0 = estimate_tail_copula(data, 500, opts);
  CHECK(t0.values_r_u1.front() == 0.0);
}

TEST_CASE("tail copula preconditions", "[covariance]") {
  const auto data = iid_uniform(1000, 1);
  TailCopulaOptions opts;
  opts.m = 251;
  CHECK_THROWS_AS(estimate_tail_copula(data, 50, opts), InvalidArgument);
  opts.m = 50;
  CHECK_THROWS_AS(estimate_tail_copula(data, 1000, opts), InvalidArgument);
  opts.mode = BlockMode::kDisjoint;
  opts.gap = 50;
  CHECK_THROWS_AS(estimate_tail_copula(data, 50, opts), InvalidArgument);
  const std::vector<double> flat(1000, 2.5);
  opts.gap = 0;
  CHECK_THROWS_AS(estimate_tail_copula(flat, 50, opts), DegenerateSample);
  CHECK_THROWS_AS(block_mode_from_string("overlapping"), InvalidArgument);
}

TEST_CASE("tail copula is rank based", "[covariance]") {
  const auto data = sim::simulate({sim::Model::kAr1T1, 3000, 9, 1000}).y;
  std::vector<double> transformed(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) transformed[i] = std::atan(data[i]) * 3.0 + 7.0;
  for (auto mode : {BlockMode::kSliding, BlockMode::kDisjoint}) {
    TailCopulaOptions opts;
    opts.m = 40;
    opts.mode = mode;
    const auto a = estimate_tail_copula(data, 150, opts);
    const auto b = estimate_tail_copula(transformed, 150, opts);
    CHECK(a.values_r_u1 == b.values_r_u1);
    CHECK(a.r11 == b.r11);
  }
}

TEST_CASE("disjoint windows", "[covariance]") {
  const auto data = iid_uniform(10000, 5);
  TailCopulaOptions opts;
  opts.m = 50;
  opts.mode = BlockMode::kDisjoint;
  const auto t = estimate_tail_copula(data, 200, opts);
  CHECK(t.gap == 5);
  CHECK(t.windows == 10000 / 55);
}

TEST_CASE("sliding and disjoint agree on average", "[covariance]") {
  double s_sum = 0.0, d_sum = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto data = iid_uniform(4000, 100 + r);
    TailCopulaOptions opts;
    opts.m = 40;
    s_sum += estimate_tail_copula(data, 200, opts).r11;
    opts.mode = BlockMode::kDisjoint;
    d_sum += estimate_tail_copula(data, 200, opts).r11;
  }
  CHECK(std::abs(s_sum - d_sum) / reps < 0.1);
}

TEST_CASE("r_integral on exact tables", "[covariance]") {
  CHECK(r_integral(tabulate_tail_copula([](double u) { return u; })) == Approx(1.0).margin(1e-15));
  CHECK(std::abs(r_integral(tabulate_tail_copula([](double u) { return u * u; })) - 0.5) <= 0.01);
  CHECK(r_integral(tabulate_tail_copula([](double) { return 0.0; })) == 0.0);
  TailCopulaTable small = tabulate_tail_copula([](double u) { return u; }, {0.25, 0.5, 0.75, 1.0});
  CHECK_THROWS_AS(r_integral(small), InvalidArgument);
}

TEST_CASE("sigma_matrix closed forms", "[covariance]") {
  const Eigen::Matrix2d s0 = sigma_matrix(0.0, 1.0, 1.0);
  CHECK(s0(0, 0) == Approx(1.0));
  CHECK(s0(0, 1) == Approx(-1.0));
  CHECK(s0(1, 1) == Approx(2.0));
  const Eigen::Matrix2d s1 = sigma_matrix(1.0, 1.0, 1.0);
  CHECK(s1(0, 0) == Approx(4.0));
  CHECK(s1(0, 1) == Approx(-2.0));
  CHECK(s1(1, 1) == Approx(5.0));
  const Eigen::Matrix2d s2 = sigma_matrix(0.0, 2.0, 2.0);
  CHECK((s2 - 2.0 * s0).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(sigma_matrix(-0.5, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(sigma_matrix(0.2, 0.0, 1.0), InvalidArgument);
  // r_int far above r11 breaks positive definiteness
  CHECK_THROWS_AS(sigma_matrix(0.0, 1.0, 5.0), ConditioningError);
}

TEST_CASE("cholesky adjustment", "[covariance]") {
  Eigen::Matrix2d info = Eigen::Vector2d(2.0, 0.5).asDiagonal();
  Eigen::Matrix2d sig = Eigen::Vector2d(0.5, 2.0).asDiagonal();
  CHECK((cholesky_adjustment(sig, info) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::Matrix2d s;
  s << 4, -2, -2, 5;
  const Eigen::Matrix2d c = cholesky_adjustment(s, Eigen::Matrix2d::Identity());
  CHECK(c(0, 0) == Approx(0.5));
  CHECK(c(0, 1) == Approx(0.25));
  CHECK(c(1, 0) == Approx(0.0).margin(1e-15));
  CHECK(c(1, 1) == Approx(0.5));

  Eigen::Matrix2d bad;
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(cholesky_adjustment(bad, Eigen::Matrix2d::Identity()), ConditioningError);
}

TEST_CASE("adjustment identity on random SPD pairs", "[covariance]") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Matrix2d s = random_spd(rng);
    const Eigen::Matrix2d info = random_spd(rng);
    const Eigen::Matrix2d c = cholesky_adjustment(s, info);
    const Eigen::Matrix2d ci = c.inverse();
    const Eigen::Matrix2d back = ci.transpose() * info.inverse() * ci;
    CHECK((back - s).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, s.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("assemble scales with sigma_hat", "[covariance]") {
  const auto cov1 = assemble_independent(fake_fit(0.3, 1.0));
  const auto cov3 = assemble_independent(fake_fit(0.3, 3.0));
  CHECK(cov3.sigma_hat == cov1.sigma_hat);
  CHECK(cov3.omega_hat(1, 1) == Approx(9.0 * cov3.sigma_hat(1, 1)).epsilon(1e-15));
  CHECK(cov3.omega_hat(0, 1) == Approx(3.0 * cov3.sigma_hat(0, 1)).epsilon(1e-15));
  CHECK(cov3.omega_hat(0, 0) == cov3.sigma_hat(0, 0));
  // the adjusted Laplace covariance D^{-1} (A I^{-1} A) D^{-T} equals Omega
  const Eigen::Matrix2d di = cov3.d_hat.inverse();
  const Eigen::Matrix2d lap = di * cov3.a_hat * cov3.info_hat.inverse() * cov3.a_hat * di.transpose();
  CHECK((lap - cov3.omega_hat).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("assemble on independent data", "[covariance]") {
  const auto data = iid_uniform(100000, 8);
  std::vector<double> expo(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) expo[i] = -std::log(data[i]);
  TailCopulaOptions opts;
  opts.m = 50;
  const auto cov = assemble(expo, 5000, opts, fake_fit(0.0, 1.0));
  CHECK(cov.omega_hat(0, 0) == Approx(1.0).margin(0.15));
  CHECK(cov.omega_hat(0, 1) == Approx(-1.0).margin(0.15));
  CHECK(cov.omega_hat(1, 1) == Approx(2.0).margin(0.15));
  const Eigen::Matrix2d ci = cov.c_hat.inverse();
  CHECK((ci.transpose() * cov.info_hat.inverse() * ci - cov.sigma_hat).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("SPD repair floors eigenvalues", "[covariance]") {
  // r_int > 2 r11 at gamma = 0 makes Sigma_22 negative; assemble repairs it
  const auto cov = assemble_from_r(1.0, 2.5, fake_fit(0.0, 1.0));
  CHECK(cov.repaired);
  CHECK_FALSE(cov.warnings.empty());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov.sigma_hat);
  CHECK(es.eigenvalues()(0) > 0.0);
  CHECK_THROWS_AS(assemble_from_r(1.0, 1.0, fake_fit(-0.6, 1.0)), ConditioningError);
}

TEST_CASE("tail copula CSV dump", "[covariance]") {
  std::ostringstream os;
  write_tail_copula_csv(tabulate_tail_copula([](double u) { return u; },
                                             {0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0}),
                        os);
  CHECK(os.str().rfind("u,R_u1\n0.125,0.125\n", 0) == 0);
}

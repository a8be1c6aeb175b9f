#pragma once

// Block estimators of the serial tail-copula function R(u, 1), the
// asymptotic covariance Sigma(gamma, R) of the normalized MLE, its data-scale
// version Omega, and the Cholesky adjustment used by the adjusted posterior.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "potbayes/error.hpp"
#include "potbayes/likelihood.hpp"

namespace potbayes {

enum class BlockMode { kSliding, kDisjoint };

inline const char* to_string(BlockMode m) {
  return m == BlockMode::kSliding ? "sliding" : "disjoint";
}

inline BlockMode block_mode_from_string(const std::string& s) {
  if (s == "sliding") return BlockMode::kSliding;
  if (s == "disjoint") return BlockMode::kDisjoint;
  throw InvalidArgument("unknown block mode '" + s + "' (expected sliding|disjoint)");
}

/// 64 Chebyshev-spaced nodes in (0, 1], dense near 0, last node exactly 1.
inline std::vector<double> default_copula_grid(std::size_t points = 64) {
  std::vector<double> g(points);
  for (std::size_t j = 1; j <= points; ++j) {
    g[j - 1] = 1.0 - std::cos(std::numbers::pi * static_cast<double>(j) /
                              (2.0 * static_cast<double>(points)));
  }
  g.back() = 1.0;
  return g;
}

struct TailCopulaOptions {
  std::size_t m = 50;                // block length
  BlockMode mode = BlockMode::kSliding;
  std::size_t gap = 0;               // disjoint-gap l; 0 selects ceil(m/10)
  std::vector<double> grid;          // empty selects default_copula_grid()
  // sanity bound R(u,1) <= c_bound * u; 0 selects m, which the block sums
  // can never exceed
  double c_bound = 0.0;
};

/// Gridded estimate of u -> R(u, 1).
struct TailCopulaTable {
  std::vector<double> grid;
  std::vector<double> values_r_u1;
  double r11 = 0.0;
  BlockMode mode = BlockMode::kSliding;
  std::size_t m = 0;
  std::size_t gap = 0;
  std::size_t windows = 0;  // N
  std::size_t clamped = 0;  // grid values clipped into [0, c_bound * u]
};

namespace detail {

// Rank from the top (1 = largest), averaged over ties.
inline std::vector<double> top_ranks(std::span<const double> data) {
  const std::size_t n = data.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return data[a] > data[b] || (data[a] == data[b] && a < b);
  });
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && data[idx[j + 1]] == data[idx[i]]) ++j;
    const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t t = i; t <= j; ++t) rank[idx[t]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace detail

/// Estimates R(u, 1) on a grid from block sums of tail indicators
/// 1{rank_from_top(X_i) <= u k}.
///
/// Sliding blocks: windows [j, j+m-1], j = 1..N with N = n - m - 1.
/// Disjoint blocks: windows of length m separated by gaps of length l,
/// N = floor(n / (m + l)).
inline TailCopulaTable estimate_tail_copula(std::span<const double> data, std::size_t k,
                                            const TailCopulaOptions& opts = {}) {
  const std::size_t n = data.size();
  const std::size_t m = opts.m;
  const std::size_t gap = opts.mode == BlockMode::kDisjoint
                              ? (opts.gap == 0 ? (m + 9) / 10 : opts.gap)
                              : 0;
  {
    std::ostringstream os;
    if (m < 1 || 4 * m > n) {
      os << "estimate_tail_copula: need 1 <= m <= n/4, got m=" << m << " n=" << n;
    } else if (k < 1 || k >= n) {
      os << "estimate_tail_copula: need 1 <= k < n, got k=" << k;
    } else if (opts.mode == BlockMode::kDisjoint && gap >= m) {
      os << "estimate_tail_copula: disjoint gap l=" << gap << " must be < m=" << m;
    } else if (m + gap >= n) {
      os << "estimate_tail_copula: m + l must be < n";
    }
    if (!os.str().empty()) throw InvalidArgument(os.str());
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw DataError("estimate_tail_copula: non-finite observation");
  }
  if (std::all_of(data.begin(), data.end(), [&](double v) { return v == data[0]; })) {
    throw DegenerateSample("estimate_tail_copula: constant series");
  }

  TailCopulaTable t;
  t.grid = opts.grid.empty() ? default_copula_grid() : opts.grid;
  if (!std::is_sorted(t.grid.begin(), t.grid.end()) || t.grid.front() < 0.0 ||
      t.grid.back() != 1.0) {
    throw InvalidArgument("estimate_tail_copula: grid must ascend in [0,1] and end at 1");
  }
  t.mode = opts.mode;
  t.m = m;
  t.gap = gap;

  const auto rank = detail::top_ranks(data);
  const double kk = static_cast<double>(k);

  std::vector<std::size_t> starts;
  if (opts.mode == BlockMode::kSliding) {
    const std::size_t nwin = n - m - 1;
    starts.resize(nwin);
    std::iota(starts.begin(), starts.end(), std::size_t{0});
  } else {
    const std::size_t nwin = n / (m + gap);
    starts.resize(nwin);
    for (std::size_t j = 0; j < nwin; ++j) starts[j] = j * (m + gap);
  }
  t.windows = starts.size();
  const double big_n = static_cast<double>(t.windows);

  std::vector<double> prefix(n + 1);
  auto block_sums = [&](double u, std::vector<double>& z) {
    const double cut = u * kk;
    prefix[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (rank[i] <= cut ? 1.0 : 0.0);
    z.resize(starts.size());
    double mean = 0.0;
    for (std::size_t j = 0; j < starts.size(); ++j) {
      z[j] = prefix[starts[j] + m] - prefix[starts[j]];
      mean += z[j];
    }
    mean /= big_n;
    for (double& v : z) v -= mean;
  };

  std::vector<double> z1, zu;
  block_sums(1.0, z1);
  const double scale = static_cast<double>(n) / (static_cast<double>(m) * kk) / big_n;
  auto cross = [&](const std::vector<double>& a) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * z1[j];
    return s * scale;
  };
  t.r11 = cross(z1);
  if (!(t.r11 > 0.0)) throw DegenerateSample("estimate_tail_copula: R(1,1) estimate is zero");

  t.values_r_u1.resize(t.grid.size());
  for (std::size_t g = 0; g < t.grid.size(); ++g) {
    const double u = t.grid[g];
    double v;
    if (u == 1.0) {
      v = t.r11;
    } else {
      block_sums(u, zu);
      v = cross(zu);
    }
    const double hi = (opts.c_bound > 0.0 ? opts.c_bound : static_cast<double>(m)) * std::min(u, 1.0);
    if (v < 0.0 || v > hi) {
      v = std::clamp(v, 0.0, hi);
      ++t.clamped;
    }
    t.values_r_u1[g] = v;
  }
  return t;
}

/// Table built from an exact function u -> R(u, 1), for checks and for
/// models where R is known in closed form.
template <class F>
TailCopulaTable tabulate_tail_copula(F&& r_u1, std::vector<double> grid = {}) {
  TailCopulaTable t;
  t.grid = grid.empty() ? default_copula_grid() : std::move(grid);
  t.values_r_u1.reserve(t.grid.size());
  for (double u : t.grid) t.values_r_u1.push_back(r_u1(u));
  t.r11 = r_u1(1.0);
  return t;
}

/// int_0^1 R(u,1)/u du by the trapezoid rule on the grid; below the first
/// node the integrand is held at its first-node value.
inline double r_integral(const TailCopulaTable& t) {
  if (t.grid.size() < 8) throw InvalidArgument("r_integral: grid needs at least 8 points");
  auto integrand = [&](std::size_t i) {
    const double u = t.grid[i];
    return u > 0.0 ? t.values_r_u1[i] / u : 0.0;
  };
  std::size_t first = 0;
  while (first < t.grid.size() && t.grid[first] <= 0.0) ++first;
  if (first == t.grid.size()) return 0.0;
  double acc = integrand(first) * t.grid[first];
  for (std::size_t i = first + 1; i < t.grid.size(); ++i) {
    acc += 0.5 * (integrand(i) + integrand(i - 1)) * (t.grid[i] - t.grid[i - 1]);
  }
  return acc;
}

namespace detail {

inline Eigen::Matrix2d sigma_matrix_raw(double g, double r11, double r_int) {
  const double a = 1.0 + g;
  const double b = 2.0 + g;
  Eigen::Matrix2d s;
  s(0, 0) = a * a * r11;
  s(0, 1) = a * a * (r_int - b / a * r11);
  s(1, 0) = s(0, 1);
  s(1, 1) = a * a * (b * b / (a * a) * r11 - 2.0 * r_int / a);
  return s;
}

inline std::array<double, 2> eigenvalues(const Eigen::Matrix2d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

}  // namespace detail

/// Asymptotic covariance of sqrt(k) (gamma_hat - gamma, sigma_hat/a - 1)
/// given R(1,1) and int_0^1 R(u,1)/u du.
inline Eigen::Matrix2d sigma_matrix(double gamma, double r11, double r_int) {
  if (!(gamma > -0.5)) throw InvalidArgument("sigma_matrix: requires gamma > -1/2");
  if (!(r11 > 0.0)) throw InvalidArgument("sigma_matrix: requires R(1,1) > 0");
  const Eigen::Matrix2d s = detail::sigma_matrix_raw(gamma, r11, r_int);
  const auto ev = detail::eigenvalues(s);
  if (!(ev[0] > 0.0)) {
    std::ostringstream os;
    os << "sigma_matrix: not positive definite (eigenvalues " << ev[0] << ", " << ev[1] << ")";
    throw ConditioningError(os.str(), ev);
  }
  return s;
}

/// Lower Cholesky factor; throws ConditioningError when `m` is not SPD.
inline Eigen::Matrix2d cholesky_lower(const Eigen::Matrix2d& m, const char* what) {
  Eigen::LLT<Eigen::Matrix2d> llt(m);
  if (llt.info() != Eigen::Success || !(llt.matrixL()(1, 1) > 0.0)) {
    std::ostringstream os;
    os << what << ": Cholesky factorization failed";
    throw ConditioningError(os.str(), detail::eigenvalues(m));
  }
  return llt.matrixL();
}

/// C = (I_C Sigma_C^T)^{-1}, so that C^{-T} I^{-1} C^{-1} = Sigma.
inline Eigen::Matrix2d cholesky_adjustment(const Eigen::Matrix2d& sigma_hat,
                                           const Eigen::Matrix2d& info_hat) {
  const Eigen::Matrix2d ic = cholesky_lower(info_hat, "cholesky_adjustment(info)");
  const Eigen::Matrix2d sc = cholesky_lower(sigma_hat, "cholesky_adjustment(sigma)");
  return (ic * sc.transpose()).inverse();
}

struct SerialCovariance {
  Eigen::Matrix2d sigma_hat;  // normalized scale
  Eigen::Matrix2d omega_hat;  // data scale, A Sigma A^T
  Eigen::Matrix2d a_hat;      // diag(1, sigma_hat_n)
  Eigen::Matrix2d info_hat;   // Fisher information at (gamma_hat, 1)
  Eigen::Matrix2d c_hat;
  /// Map applied inside the adjusted likelihood: theta = theta_hat +
  /// D (theta* - theta_hat), with D = A C^T A^{-1}.
  Eigen::Matrix2d d_hat;
  double r11 = 0.0;
  double r_int = 0.0;
  bool repaired = false;
  std::vector<std::string> warnings;
};

/// Floors eigenvalues of a symmetric matrix at `rel_floor * trace`.
inline Eigen::Matrix2d spd_repair(const Eigen::Matrix2d& m, double rel_floor, bool* changed) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (m + m.transpose()));
  const double tr = std::max(m.trace(), 0.0);
  const double floor = rel_floor * (tr > 0.0 ? tr : 1.0);
  Eigen::Vector2d ev = es.eigenvalues();
  *changed = false;
  for (int i = 0; i < 2; ++i) {
    if (ev(i) < floor) {
      ev(i) = floor;
      *changed = true;
    }
  }
  if (!*changed) return m;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Assembles Sigma, Omega, C and D from R(1,1), int R(u,1)/u and an MLE.
inline SerialCovariance assemble_from_r(double r11, double r_int, const MleFit& fit) {
  if (!fit.converged) throw InvalidArgument("assemble: fit did not converge");
  const double g = fit.params.gamma;
  if (!(g > -0.5)) {
    throw ConditioningError("assemble: gamma estimate <= -1/2, covariance undefined", {0.0, 0.0});
  }
  SerialCovariance out;
  out.r11 = r11;
  out.r_int = r_int;
  Eigen::Matrix2d s = detail::sigma_matrix_raw(g, r11, r_int);
  s = 0.5 * (s + s.transpose());
  const auto ev = detail::eigenvalues(s);
  if (!(ev[0] >= 1e-10 * std::max(s.trace(), 0.0)) || !(s.trace() > 0.0)) {
    bool changed = false;
    s = spd_repair(s, 1e-10, &changed);
    out.repaired = true;
    std::ostringstream os;
    os << "Sigma estimate not positive definite (eigenvalues " << ev[0] << ", " << ev[1]
       << "); eigenvalues floored";
    out.warnings.push_back(os.str());
  }
  out.sigma_hat = s;
  out.a_hat = Eigen::Vector2d(1.0, fit.params.sigma).asDiagonal();
  out.omega_hat = out.a_hat * s * out.a_hat.transpose();
  out.info_hat = fisher_info(g);
  out.c_hat = cholesky_adjustment(s, out.info_hat);
  out.d_hat = out.a_hat * out.c_hat.transpose() * out.a_hat.inverse();
  return out;
}

inline SerialCovariance assemble_from_table(const TailCopulaTable& table, const MleFit& fit) {
  return assemble_from_r(table.r11, r_integral(table), fit);
}

/// Full pipeline: tail-copula estimate on `data`, then the covariance pieces.
inline SerialCovariance assemble(std::span<const double> data, std::size_t k,
                                 const TailCopulaOptions& opts, const MleFit& fit) {
  const auto table = estimate_tail_copula(data, k, opts);
  auto out = assemble_from_table(table, fit);
  if (table.clamped > 0) {
    out.warnings.push_back(std::to_string(table.clamped) +
                           " tail-copula grid value(s) clipped into [0, c_bound*u]");
  }
  return out;
}

/// Same pieces under serial independence, R(x, y) = min(x, y).
inline SerialCovariance assemble_independent(const MleFit& fit) {
  return assemble_from_r(1.0, 1.0, fit);
}

inline void write_tail_copula_csv(const TailCopulaTable& t, std::ostream& os) {
  os << "u,R_u1\n";
  os.precision(17);
  for (std::size_t i = 0; i < t.grid.size(); ++i) os << t.grid[i] << ',' << t.values_r_u1[i] << '\n';
}

}  // namespace potbayes

#pragma once

// Oracles for the quantities a coverage study needs to know exactly: the
// tail quantile Q0(tau), the scale a0(n/k) and the covariance Sigma0.
// Closed forms where the marginal allows them; long simulations otherwise.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "potbayes/likelihood.hpp"
#include "potbayes/serial_covariance.hpp"
#include "potbayes/sim/models.hpp"

namespace potbayes::sim {

/// Series whose tail the inference targets: the innovations for the
/// regression models, the observations otherwise.
inline std::vector<double> target_series(Model m, std::size_t n, std::uint64_t seed) {
  auto s = simulate({m, n, seed, 1000});
  return is_dynamic(m) ? std::move(s.innovations) : std::move(s.y);
}

inline std::optional<double> closed_form_quantile(Model m, double tau) {
  switch (m) {
    case Model::kAr1T1:
      // stationary law of the Cauchy AR(1) is Cauchy with scale 1/(1 - 0.8)
      return 5.0 * std::tan(std::numbers::pi * (tau - 0.5));
    case Model::kClaytonExp: return -std::log1p(-tau);
    case Model::kClaytonPower: return 1.0 - std::cbrt(9.0 * (1.0 - tau));
    default: return std::nullopt;
  }
}

/// a0 at k/n = ratio when the exceedances above the level are exactly GP.
inline std::optional<double> closed_form_scale(Model m, double ratio) {
  switch (m) {
    case Model::kClaytonExp: return 1.0;
    case Model::kClaytonPower: return std::cbrt(9.0 * ratio) / 3.0;
    default: return std::nullopt;
  }
}

/// Upper quantiles (type 7) of `total` pooled draws, streamed in chunks so
/// only the top of the sample is held in memory.
inline std::vector<double> mc_upper_quantiles(Model m, const std::vector<double>& taus,
                                              std::size_t total, std::size_t chunk, std::uint64_t seed) {
  if (taus.empty()) return {};
  const double tmin = *std::min_element(taus.begin(), taus.end());
  const std::size_t keep = static_cast<std::size_t>(std::ceil((1.0 - tmin) * static_cast<double>(total))) + 16;
  std::vector<double> top;
  top.reserve(2 * keep + chunk);
  std::size_t seen = 0;
  for (std::uint64_t c = 0; seen < total; ++c) {
    const std::size_t len = std::min(chunk, total - seen);
    const auto v = target_series(m, len, derive_seed(seed, {c}));
    top.insert(top.end(), v.begin(), v.end());
    seen += len;
    if (top.size() > 2 * keep) {
      std::nth_element(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(keep), top.end(),
                       std::greater<double>());
      top.resize(keep);
    }
  }
  std::sort(top.begin(), top.end(), std::greater<double>());
  std::vector<double> out;
  for (double tau : taus) {
    // type 7 position counted from the top
    const double h = (static_cast<double>(total) - 1.0) * (1.0 - tau);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    out.push_back(top[lo] + frac * (top[std::min(lo + 1, top.size() - 1)] - top[lo]));
  }
  return out;
}

/// a0(n/k) as the mean GP scale of `fits` huge-sample fits at k/n = ratio.
inline double mc_scale(Model m, double ratio, std::size_t n_big, int fits, std::uint64_t seed) {
  double sum = 0.0;
  for (int f = 0; f < fits; ++f) {
    const auto y = target_series(m, n_big, derive_seed(seed, {static_cast<std::uint64_t>(f)}));
    const auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n_big)));
    sum += mle_fit(make_exceedances(y, k)).params.sigma;
  }
  return sum / fits;
}

/// Sigma0 from tail-copula estimates pooled over long series, evaluated at
/// the true tail index.
inline Eigen::Matrix2d mc_sigma(Model m, double ratio, std::size_t n_big, std::size_t block, int series,
                                std::uint64_t seed) {
  double r11 = 0.0, rint = 0.0;
  TailCopulaOptions opts;
  opts.m = block;
  for (int s = 0; s < series; ++s) {
    const auto y = target_series(m, n_big, derive_seed(seed, {static_cast<std::uint64_t>(s)}));
    const auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n_big)));
    const auto t = estimate_tail_copula(y, k, opts);
    r11 += t.r11;
    rint += r_integral(t);
  }
  return detail::sigma_matrix_raw(true_gamma(m), r11 / series, rint / series);
}

}  // namespace potbayes::sim

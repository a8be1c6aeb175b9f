#pragma once

// Derivative-free Nelder-Mead simplex minimizer. Infeasible points may
// return +inf; the simplex simply contracts away from them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace potbayes {

struct SimplexOptions {
  int max_iterations = 2000;
  double f_tolerance = 1e-12;
  double x_tolerance = 1e-10;
};

struct SimplexResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

template <class F>
SimplexResult nelder_mead(F&& f, std::vector<double> x0, const std::vector<double>& step,
                          const SimplexOptions& opts = {}) {
  const std::size_t dim = x0.size();
  std::vector<std::vector<double>> pts(dim + 1, x0);
  for (std::size_t i = 0; i < dim; ++i) pts[i + 1][i] += step[i];
  std::vector<double> vals(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) vals[i] = f(pts[i]);

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), trial(dim), trial2(dim);
  SimplexResult out;

  auto blend = [&](const std::vector<double>& a, const std::vector<double>& b, double t,
                   std::vector<double>& dst) {
    for (std::size_t i = 0; i < dim; ++i) dst[i] = a[i] + t * (b[i] - a[i]);
  };

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      // NaN sorts last
      if (std::isnan(vals[a])) return false;
      if (std::isnan(vals[b])) return true;
      return vals[a] < vals[b];
    });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[dim - 1];

    double diam = 0.0;
    for (std::size_t i = 0; i <= dim; ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        diam = std::max(diam, std::abs(pts[i][d] - pts[best][d]));
      }
    }
    const double spread = std::abs(vals[worst] - vals[best]);
    if (std::isfinite(vals[worst]) && spread <= opts.f_tolerance * (1.0 + std::abs(vals[best])) &&
        diam <= opts.x_tolerance * (1.0 + std::abs(pts[best][0]))) {
      out.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < dim; ++d) centroid[d] += pts[i][d] / static_cast<double>(dim);
    }

    blend(centroid, pts[worst], -1.0, trial);  // reflection
    const double fr = f(trial);
    if (fr < vals[best]) {
      blend(centroid, pts[worst], -2.0, trial2);  // expansion
      const double fe = f(trial2);
      if (fe < fr) {
        pts[worst] = trial2;
        vals[worst] = fe;
      } else {
        pts[worst] = trial;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial;
      vals[worst] = fr;
      continue;
    }
    // contraction, outside if the reflection improved on the worst point
    const bool outside = fr < vals[worst];
    blend(centroid, pts[worst], outside ? -0.5 : 0.5, trial2);
    const double fc = f(trial2);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = trial2;
      vals[worst] = fc;
      continue;
    }
    // shrink towards the best vertex
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == best) continue;
      blend(pts[best], pts[i], 0.5, pts[i]);
      vals[i] = f(pts[i]);
    }
  }

  const auto best_it = std::min_element(vals.begin(), vals.end(), [](double a, double b) {
    if (std::isnan(a)) return false;
    if (std::isnan(b)) return true;
    return a < b;
  });
  const std::size_t best = static_cast<std::size_t>(best_it - vals.begin());
  out.x = pts[best];
  out.value = vals[best];
  out.iterations = it;
  return out;
}

}  // namespace potbayes

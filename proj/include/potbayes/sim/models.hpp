#pragma once

// Reference generators: linear models with Student-t innovations, ARCH(1),
// AR(1)-GARCH(1,1) and Clayton-copula Markov chains.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "potbayes/error.hpp"
#include "potbayes/random.hpp"

namespace potbayes::sim {

enum class Model {
  kAr1T1,        // (a) X' = 0.8 X + e, e ~ t1
  kArma11T2,     // (b) X' = 0.8 X + e' + 0.8 e, e ~ t2
  kArch1,        // (c) X' = psi' e', psi'^2 = 2e-5 + 0.99 X^2
  kClaytonExp,   // (d) Clayton(0.41) chain, unit-exponential margin
  kClaytonPower, // (d) Clayton(1.06) chain, F(x) = 1 - (1-x)^3/9
  kArma21T5,     // (e) Y' = 0.5 Y + 0.1875 Y_ + X' + 0.8 X, X ~ t5
  kAr1Garch11,   // (f) Y' = 0.8 Y + X', X GARCH(1,1)
};

inline constexpr std::array<Model, 7> kAllModels = {
    Model::kAr1T1,        Model::kArma11T2,  Model::kArch1,      Model::kClaytonExp,
    Model::kClaytonPower, Model::kArma21T5,  Model::kAr1Garch11};

inline std::string_view model_name(Model m) {
  switch (m) {
    case Model::kAr1T1: return "ar1_t1";
    case Model::kArma11T2: return "arma11_t2";
    case Model::kArch1: return "arch1";
    case Model::kClaytonExp: return "clayton_exp";
    case Model::kClaytonPower: return "clayton_power";
    case Model::kArma21T5: return "arma21_t5";
    case Model::kAr1Garch11: return "ar1_garch11";
  }
  return "unknown";
}

inline Model model_from_name(std::string_view s) {
  for (Model m : kAllModels) {
    if (model_name(m) == s) return m;
  }
  throw InvalidArgument("unknown model '" + std::string(s) + "'");
}

/// Models whose inference target is the innovation sequence of a regression.
inline bool is_dynamic(Model m) { return m == Model::kArma21T5 || m == Model::kAr1Garch11; }

/// Extreme value index of the marginal (or innovation) law.
inline double true_gamma(Model m) {
  switch (m) {
    case Model::kAr1T1: return 1.0;
    case Model::kArma11T2: return 0.5;
    case Model::kArch1: return 0.493;
    case Model::kClaytonExp: return 0.0;
    case Model::kClaytonPower: return -1.0 / 3.0;
    case Model::kArma21T5: return 0.2;
    case Model::kAr1Garch11: return 0.207;
  }
  return 0.0;
}

struct ModelSpec {
  Model model = Model::kAr1T1;
  std::size_t n = 2000;
  std::uint64_t seed = 1;
  std::size_t burn_in = 1000;
};

struct SimSeries {
  std::vector<double> y;
  /// True innovations aligned with y; filled for the regression models.
  std::vector<double> innovations;
};

inline double student_t(Rng& rng, int dof) {
  switch (dof) {
    case 1: return std::tan(std::numbers::pi * (uniform_open(rng) - 0.5));
    case 2: {
      // exact inverse cdf of t2
      const double u = uniform_open(rng);
      return (2.0 * u - 1.0) / std::sqrt(2.0 * u * (1.0 - u));
    }
    default: {
      const double z = standard_normal(rng);
      double chi2 = 0.0;
      for (int i = 0; i < dof; ++i) {
        const double g = standard_normal(rng);
        chi2 += g * g;
      }
      return z / std::sqrt(chi2 / dof);
    }
  }
}

/// Survival-scale Clayton conditional inverse: given V_i = v1 and an
/// independent uniform w, returns V_{i+1}.
inline double clayton_next(double v1, double w, double eta) {
  const double a = std::pow(w, -eta / (1.0 + eta)) - 1.0;
  return std::pow(a * std::pow(v1, -eta) + 1.0, -1.0 / eta);
}

inline double clayton_eta(Model m) { return m == Model::kClaytonExp ? 0.41 : 1.06; }

/// Marginal quantile from the survival probability v = 1 - u.
inline double clayton_margin(Model m, double v) {
  if (m == Model::kClaytonExp) return -std::log(v);
  return 1.0 - std::cbrt(9.0 * v);
}

inline SimSeries simulate(const ModelSpec& spec) {
  if (spec.n == 0) throw InvalidArgument("simulate: n must be positive");
  Rng rng = make_rng(spec.seed, {hash_name(model_name(spec.model)), spec.n});
  const std::size_t total = spec.n + spec.burn_in;
  SimSeries out;
  out.y.resize(spec.n);
  if (is_dynamic(spec.model)) out.innovations.resize(spec.n);

  auto emit = [&](std::size_t t, double y, double x) {
    if (t >= spec.burn_in) {
      out.y[t - spec.burn_in] = y;
      if (!out.innovations.empty()) out.innovations[t - spec.burn_in] = x;
    }
  };

  switch (spec.model) {
    case Model::kAr1T1: {
      double x = 0.0;
      for (std::size_t t = 0; t < total; ++t) {
        x = 0.8 * x + student_t(rng, 1);
        emit(t, x, 0.0);
      }
      break;
    }
    case Model::kArma11T2: {
      double x = 0.0, e_prev = 0.0;
      for (std::size_t t = 0; t < total; ++t) {
        const double e = student_t(rng, 2);
        x = 0.8 * x + e + 0.8 * e_prev;
        e_prev = e;
        emit(t, x, 0.0);
      }
      break;
    }
    case Model::kArch1: {
      double x = 0.0;
      for (std::size_t t = 0; t < total; ++t) {
        const double psi = std::sqrt(2e-5 + 0.99 * x * x);
        x = psi * standard_normal(rng);
        emit(t, x, 0.0);
      }
      break;
    }
    case Model::kClaytonExp:
    case Model::kClaytonPower: {
      const double eta = clayton_eta(spec.model);
      double v = uniform_open(rng);
      for (std::size_t t = 0; t < total; ++t) {
        if (t > 0) v = clayton_next(v, uniform_open(rng), eta);
        emit(t, clayton_margin(spec.model, v), 0.0);
      }
      break;
    }
    case Model::kArma21T5: {
      double y1 = 0.0, y2 = 0.0, x_prev = 0.0;
      for (std::size_t t = 0; t < total; ++t) {
        const double x = student_t(rng, 5);
        const double y = 0.5 * y1 + 0.1875 * y2 + x + 0.8 * x_prev;
        y2 = y1;
        y1 = y;
        x_prev = x;
        emit(t, y, x);
      }
      break;
    }
    case Model::kAr1Garch11: {
      double y = 0.0, x = 0.0;
      double psi2 = 2e-5 / (1.0 - 0.4 - 0.3);
      for (std::size_t t = 0; t < total; ++t) {
        psi2 = 2e-5 + 0.4 * x * x + 0.3 * psi2;
        x = std::sqrt(psi2) * standard_normal(rng);
        y = 0.8 * y + x;
        emit(t, y, x);
      }
      break;
    }
  }
  return out;
}

/// Innovation-only draws for the regression models, used for truth tables.
inline std::vector<double> simulate_innovations(Model m, std::size_t n, std::uint64_t seed,
                                                std::size_t burn_in = 1000) {
  if (!is_dynamic(m)) throw InvalidArgument("simulate_innovations: model has no innovations");
  return simulate({m, n, seed, burn_in}).innovations;
}

}  // namespace potbayes::sim

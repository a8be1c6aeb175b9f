// Regenerates include/potbayes/sim/truth_table.hpp: Monte-Carlo truths for
// the coverage and covariance experiments.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "potbayes/sim/truth.hpp"

using namespace potbayes;

int main(int argc, char** argv) {
  CLI::App app{"truth table generator"};
  std::string out = "include/potbayes/sim/truth_table.hpp";
  std::size_t q_total = 100'000'000;
  std::size_t scale_n = 1'000'000;
  int scale_fits = 20;
  std::size_t sigma_n = 100'000;
  std::size_t sigma_m = 1000;
  int sigma_series = 20;
  std::uint64_t seed = 20240601;
  app.add_option("--out", out, "output header");
  app.add_option("--quantile-draws", q_total, "pooled draws per quantile oracle");
  app.add_option("--scale-n", scale_n, "series length per scale fit");
  app.add_option("--scale-fits", scale_fits, "fits averaged per scale oracle");
  app.add_option("--sigma-n", sigma_n, "series length per covariance estimate");
  app.add_option("--sigma-m", sigma_m, "block length for the covariance oracle");
  app.add_option("--sigma-series", sigma_series, "series averaged per covariance oracle");
  app.add_option("--seed", seed, "master seed");
  CLI11_PARSE(app, argc, argv);

  const std::vector<double> ratios = {0.025, 0.05, 0.1};
  const std::vector<std::size_t> ns = {500, 1000, 2000, 4000, 8000};
  std::vector<double> taus;
  for (auto n : ns) taus.push_back(1.0 - 1.0 / static_cast<double>(n));

  std::ostringstream body;
  body << std::setprecision(17);
  auto t0 = std::chrono::steady_clock::now();
  auto stamp = [&](const std::string& what) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "[" << std::fixed << std::setprecision(1) << s << "s] " << what << std::endl;
  };

  body << "inline constexpr QuantileTruth kQuantileTruth[] = {\n";
  for (auto m : sim::kAllModels) {
    if (sim::closed_form_quantile(m, 0.5)) continue;
    const auto q = sim::mc_upper_quantiles(m, taus, q_total, 1'000'000, derive_seed(seed, {hash_name(sim::model_name(m)), 1}));
    for (std::size_t i = 0; i < ns.size(); ++i) {
      body << "    {\"" << sim::model_name(m) << "\", " << ns[i] << ", " << q[i] << "},\n";
    }
    stamp(std::string("quantiles ") + std::string(sim::model_name(m)));
  }
  body << "};\n\n";

  body << "inline constexpr ScaleTruth kScaleTruth[] = {\n";
  for (auto m : sim::kAllModels) {
    for (double r : ratios) {
      if (sim::closed_form_scale(m, r)) continue;
      const double a = sim::mc_scale(m, r, scale_n, scale_fits,
                                     derive_seed(seed, {hash_name(sim::model_name(m)), 2}));
      body << "    {\"" << sim::model_name(m) << "\", " << r << ", " << a << "},\n";
    }
    stamp(std::string("scales ") + std::string(sim::model_name(m)));
  }
  body << "};\n\n";

  body << "inline constexpr SigmaTruth kSigmaTruth[] = {\n";
  for (auto m : {sim::Model::kAr1T1, sim::Model::kArma11T2, sim::Model::kArch1}) {
    for (double r : ratios) {
      const auto s = sim::mc_sigma(m, r, sigma_n, sigma_m, sigma_series,
                                   derive_seed(seed, {hash_name(sim::model_name(m)), 3}));
      body << "    {\"" << sim::model_name(m) << "\", " << r << ", " << s(0, 0) << ", " << s(0, 1) << ", "
           << s(1, 1) << "},\n";
    }
    stamp(std::string("sigma ") + std::string(sim::model_name(m)));
  }
  body << "};\n";

  std::ofstream os(out);
  if (!os) {
    std::cerr << "cannot write " << out << '\n';
    return 2;
  }
  os << "#pragma once\n\n"
        "// Generated by tools/truthgen.cpp; do not edit by hand.\n"
     << "// quantile draws " << q_total << "; scale fits " << scale_fits << " x " << scale_n
     << "; sigma " << sigma_series << " x " << sigma_n << " with m = " << sigma_m << "; seed " << seed
     << "\n\n#include <cstddef>\n#include <string_view>\n\nnamespace potbayes::sim {\n\n"
        "struct QuantileTruth {\n  std::string_view model;\n  std::size_t n;\n  double q;  // Q0(1 - 1/n)\n};\n\n"
        "struct ScaleTruth {\n  std::string_view model;\n  double ratio;  // k/n\n  double a0;\n};\n\n"
        "struct SigmaTruth {\n  std::string_view model;\n  double ratio;\n  double s11, s12, s22;\n};\n\n"
     << body.str() << "\n}  // namespace potbayes::sim\n";
  stamp("wrote " + out);
  return 0;
}

#pragma once

// Generated by tools/truthgen.cpp; do not edit by hand.
// quantile draws 100000000; scale fits 20 x 1000000; sigma 20 x 1000000 with m = 1000; seed 20240601

#include <cstddef>
#include <string_view>

namespace potbayes::sim {

struct QuantileTruth {
  std::string_view model;
  std::size_t n;
  double q;  // Q0(1 - 1/n)
};

struct ScaleTruth {
  std::string_view model;
  double ratio;  // k/n
  double a0;
};

struct SigmaTruth {
  std::string_view model;
  double ratio;
  double s11, s12, s22;
};

inline constexpr QuantileTruth kQuantileTruth[] = {
    {"arma11_t2", 500, 46.179395814991814},
    {"arma11_t2", 1000, 64.724413904393984},
    {"arma11_t2", 2000, 91.247801216661472},
    {"arma11_t2", 4000, 128.92218604298776},
    {"arma11_t2", 8000, 183.14154780189421},
    {"arch1", 500, 0.079979695356364636},
    {"arch1", 1000, 0.11273355619603767},
    {"arch1", 2000, 0.15922279770741998},
    {"arch1", 4000, 0.22448500056473719},
    {"arch1", 8000, 0.31597619085521972},
    {"arma21_t5", 500, 5.0283975735990554},
    {"arma21_t5", 1000, 5.8943876431911644},
    {"arma21_t5", 2000, 6.8630552674212479},
    {"arma21_t5", 4000, 7.9645648527952266},
    {"arma21_t5", 8000, 9.2114905504266602},
    {"ar1_garch11", 500, 0.030235745706314647},
    {"ar1_garch11", 1000, 0.03537890388531003},
    {"ar1_garch11", 2000, 0.041227408383187898},
    {"ar1_garch11", 4000, 0.047876281960588046},
    {"ar1_garch11", 8000, 0.055581396929814036},
};

inline constexpr ScaleTruth kScaleTruth[] = {
    {"ar1_t1", 0.025000000000000001, 63.172966625804385},
    {"ar1_t1", 0.050000000000000003, 31.815509171397157},
    {"ar1_t1", 0.10000000000000001, 16.202802935498877},
    {"arma11_t2", 0.025000000000000001, 6.3126844836531237},
    {"arma11_t2", 0.050000000000000003, 4.7900982291167189},
    {"arma11_t2", 0.10000000000000001, 3.9775951997201289},
    {"arch1", 0.025000000000000001, 0.011683934072512607},
    {"arch1", 0.050000000000000003, 0.0085063414949503435},
    {"arch1", 0.10000000000000001, 0.0063194477101152476},
    {"arma21_t5", 0.025000000000000001, 0.80797173493393459},
    {"arma21_t5", 0.050000000000000003, 0.76010074258186677},
    {"arma21_t5", 0.10000000000000001, 0.74186950399135054},
    {"ar1_garch11", 0.025000000000000001, 0.0045881822886316244},
    {"ar1_garch11", 0.050000000000000003, 0.0043392264048814511},
    {"ar1_garch11", 0.10000000000000001, 0.0043746648765251774},
};

inline constexpr SigmaTruth kSigmaTruth[] = {
    {"ar1_t1", 0.025000000000000001, 35.157612683764327, -1.0549478829641004, 27.423157395787349},
    {"ar1_t1", 0.050000000000000003, 34.715960106005284, -1.0990215606695344, 27.135991640173501},
    {"ar1_t1", 0.10000000000000001, 33.414033204120123, -1.2511794382430779, 26.311704341333176},
    {"arma11_t2", 0.025000000000000001, 12.679280893294441, -3.7472603220537404, 12.040392036790783},
    {"arma11_t2", 0.050000000000000003, 13.135053284148814, -4.2714237661290895, 12.992483512699236},
    {"arma11_t2", 0.10000000000000001, 13.579515998738941, -4.7582001205877829, 13.888442382305339},
    {"arch1", 0.025000000000000001, 5.4570582494368605, -1.5351188015931376, 5.0653245962602131},
    {"arch1", 0.050000000000000003, 4.9059580822206774, -1.2563866154883194, 4.3880746043910914},
    {"arch1", 0.10000000000000001, 4.0390165888196385, -0.87910896101959946, 3.4046665896876718},
};

}  // namespace potbayes::sim

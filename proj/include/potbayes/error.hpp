#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace potbayes {

/// Stable machine-readable error classes. The numeric value is the CLI exit
/// code for that class.
enum class ErrorCode : int {
  kConfig = 2,
  kData = 3,
  kNonConvergence = 4,
  kInternal = 5,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "config_error";
    case ErrorCode::kData: return "data_error";
    case ErrorCode::kNonConvergence: return "non_convergence";
    case ErrorCode::kInternal: return "internal_error";
  }
  return "internal_error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string kind, const std::string& what)
      : std::runtime_error(what), code_(code), kind_(std::move(kind)) {}

  ErrorCode code() const noexcept { return code_; }
  /// Finer-grained class name, e.g. "invalid_argument" or "degenerate_sample".
  const std::string& kind() const noexcept { return kind_; }

 private:
  ErrorCode code_;
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::kConfig, "invalid_argument", what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::string kind = "data_error")
      : Error(ErrorCode::kData, std::move(kind), what) {}
};

class DegenerateSample : public DataError {
 public:
  explicit DegenerateSample(const std::string& what)
      : DataError(what, "degenerate_sample") {}
};

/// An excess sits on (or beyond) the support boundary of the evaluated
/// parameter, so derivatives do not exist there.
class BoundaryError : public Error {
 public:
  explicit BoundaryError(const std::string& what)
      : Error(ErrorCode::kData, "boundary", what) {}
};

class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, std::array<double, 2> eigenvalues)
      : Error(ErrorCode::kNonConvergence, "conditioning", what),
        eigenvalues_(eigenvalues) {}

  const std::array<double, 2>& eigenvalues() const noexcept { return eigenvalues_; }

 private:
  std::array<double, 2> eigenvalues_;
};

/// Optimizer or sampler gave up. `best` carries the best point found, if any
/// (two coordinates, meaning defined by the thrower).
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::array<double, 2> best = {0.0, 0.0},
                 double best_value = 0.0)
      : Error(ErrorCode::kNonConvergence, "non_convergence", what),
        best_(best),
        best_value_(best_value) {}

  const std::array<double, 2>& best() const noexcept { return best_; }
  double best_value() const noexcept { return best_value_; }

 private:
  std::array<double, 2> best_;
  double best_value_;
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what)
      : Error(ErrorCode::kInternal, "internal", what) {}
};

}  // namespace potbayes

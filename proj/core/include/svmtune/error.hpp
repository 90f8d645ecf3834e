#pragma once

#include <stdexcept>
#include <string>

namespace svmtune {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CSV, labels, stratification).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, unknown identifiers, violated preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised by SurfaceEvaluator when no evaluations remain. Searchers treat
/// it as a stop signal.
class BudgetExhausted : public Error {
 public:
  BudgetExhausted() : Error("budget exhausted") {}
};

/// Raised by SurfaceEvaluator when a trial exceeds its wall-clock limit.
class TimeLimitExceeded : public Error {
 public:
  TimeLimitExceeded() : Error("time limit exceeded") {}
};

/// Numerical failure inside a solver or surrogate model.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace svmtune

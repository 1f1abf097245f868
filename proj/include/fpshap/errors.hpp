#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fpshap {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on a value was violated (bad sizes, infeasible budgets, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A hard size cap was exceeded (e.g. full coalition enumeration).
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A composite object could not be assembled (e.g. missing anchor rows).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// The normal-equations matrix of a weighted least-squares system is
// rank-deficient (or past the conditioning limit). Carries the condition
// estimate so callers can log it; replicate bookkeeping is done by callers.
class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

// Too few usable bootstrap replicates to form a standard deviation.
class EstimationFailedError : public Error {
 public:
  using Error::Error;
};

// Model fitting failed (rank-deficient design matrix).
class FitError : public Error {
 public:
  using Error::Error;
};

// An operation requires an oracle kind it did not receive.
class UnsupportedOracleError : public Error {
 public:
  using Error::Error;
};

// CSV ingestion failure with a 1-based file location. Row numbers count the
// header line as row 1.
class CsvError : public Error {
 public:
  CsvError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace fpshap

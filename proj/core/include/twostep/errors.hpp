#pragma once

#include <stdexcept>
#include <string>

namespace twostep {

/// Base class for every error raised by the library. The CLI maps any
/// escaping `Error` to a nonzero exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least-squares regressor lost column rank (usually: too little excitation).
class RankDeficient : public Error {
 public:
  RankDeficient(int rank, int cols)
      : Error("rank-deficient regressor: rank " + std::to_string(rank) +
              " < " + std::to_string(cols) + " unknowns"),
        rank_(rank),
        cols_(cols) {}
  int rank() const { return rank_; }
  int cols() const { return cols_; }

 private:
  int rank_;
  int cols_;
};

/// A simulated state or learned weight became non-finite or exploded.
class NumericalBlowup : public Error {
 public:
  using Error::Error;
};

class Asymmetric : public Error {
 public:
  using Error::Error;
};

class SingularLyapunov : public Error {
 public:
  using Error::Error;
};

class EmptyWindow : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class NotHurwitz : public Error {
 public:
  using Error::Error;
};

/// Caller violated a documented precondition (dimension mismatch, l too small).
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace twostep

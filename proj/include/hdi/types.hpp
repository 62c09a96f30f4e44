#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad data: NaN/Inf entries, dimension mismatch, out-of-domain argument.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Bad run configuration: invalid folds, grids, scenario keys, paths.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed to converge; carries the last KKT gap seen.
class SolverError : public Error {
 public:
  SolverError(const std::string& msg, double kkt_gap)
      : Error(msg), kkt_gap_(kkt_gap) {}
  double kkt_gap() const { return kkt_gap_; }

 private:
  double kkt_gap_;
};

/// Cholesky factorization hit a non-positive pivot.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& msg, Index pivot)
      : Error(msg), pivot_(pivot) {}
  Index pivot() const { return pivot_; }

 private:
  Index pivot_;
};

/// A quantity that must stay away from zero collapsed (noise scale,
/// nodewise residual variance).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

template <class Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, const char* what) {
  if (!m.allFinite()) {
    throw InputError(std::string(what) + ": non-finite entry");
  }
}

}  // namespace hdi

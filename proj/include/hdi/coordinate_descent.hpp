#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hdi/types.hpp"

namespace hdi {

/// sign(z) * max(|z| - t, 0).
inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

struct CdOptions {
  double tol_coef = 1e-7;        // max coordinate change per sweep
  double tol_kkt = 1e-6;         // stationarity gap at exit
  std::size_t max_sweeps = 100000;
  bool record_objective = false; // trace smooth+penalty value per full sweep
};

struct CdResult {
  std::size_t sweeps = 0;
  double kkt_gap = 0.0;
  std::vector<double> objective_trace;
};

// The kernel minimizes
//
//     q(beta) + 2 * lambda * sum_j pf_j |beta_j|
//
// over beta, where q is a convex quadratic described by an oracle:
//
//   Index  dim()                  problem size
//   double diag(j)                curvature A_jj of q in coordinate j
//   double resid_corr(j)          r_j = b_j - (A beta)_j at the current beta
//   void   apply_update(j, d)     beta_j moved by d; refresh internal state
//   void   corr_vector(Vector&)   r for all coordinates (for the KKT gap)
//   double smooth_value(beta)     q(beta) up to an additive constant
//
// The exact coordinate minimizer is beta_j = S(diag_j*beta_j + r_j,
// lambda*pf_j) / diag_j, so every accepted move decreases the objective.
//
// Sweep policy: one full pass, then passes over the nonzero set until it is
// stable, then a full verification pass; exit only once a full pass moves
// nothing beyond tol_coef and the stationarity gap is within tol_kkt.

namespace detail {

template <class Oracle>
double cd_kkt_gap(Oracle& oracle, const Vector& beta, double lambda,
                  const Vector* penalty_factor, Index excluded, Vector& work) {
  oracle.corr_vector(work);
  double gap = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    if (j == excluded) continue;
    double t = lambda * (penalty_factor ? (*penalty_factor)[j] : 1.0);
    double g;
    if (beta[j] != 0.0) {
      g = std::abs(work[j] - t * (beta[j] > 0 ? 1.0 : -1.0));
    } else {
      g = std::max(std::abs(work[j]) - t, 0.0);
    }
    gap = std::max(gap, g);
  }
  return gap;
}

}  // namespace detail

template <class Oracle>
CdResult cd_solve(Oracle& oracle, double lambda, Vector& beta,
                  const CdOptions& opts = {},
                  const Vector* penalty_factor = nullptr,
                  Index excluded = -1) {
  const Index p = oracle.dim();
  if (beta.size() != p) {
    throw InputError("cd_solve: warm start has wrong length");
  }

  CdResult result;
  Vector work(p);

  auto sweep = [&](bool active_only) -> double {
    double dmax = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (j == excluded) continue;
      if (active_only && beta[j] == 0.0) continue;
      double d = oracle.diag(j);
      double t = lambda * (penalty_factor ? (*penalty_factor)[j] : 1.0);
      if (d <= 0.0) {
        // Zero-variance column: only admissible when the coordinate is
        // irrelevant (correlation within the penalty dead zone).
        if (beta[j] != 0.0 || std::abs(oracle.resid_corr(j)) > t + 1e-12) {
          throw InputError("cd_solve: zero-variance column " +
                           std::to_string(j) + " carries signal");
        }
        continue;
      }
      double u = d * beta[j] + oracle.resid_corr(j);
      double next = soft_threshold(u, t) / d;
      double delta = next - beta[j];
      if (delta != 0.0) {
        oracle.apply_update(j, delta);
        beta[j] = next;
        dmax = std::max(dmax, std::abs(delta));
      }
    }
    ++result.sweeps;
    return dmax;
  };

  auto trace = [&]() {
    if (!opts.record_objective) return;
    double pen = 0.0;
    for (Index j = 0; j < p; ++j) {
      pen += (penalty_factor ? (*penalty_factor)[j] : 1.0) * std::abs(beta[j]);
    }
    result.objective_trace.push_back(oracle.smooth_value(beta) +
                                     2.0 * lambda * pen);
  };

  while (true) {
    double dmax = sweep(false);
    trace();
    while (dmax > opts.tol_coef && result.sweeps < opts.max_sweeps) {
      double da;
      do {
        da = sweep(true);
      } while (da > opts.tol_coef && result.sweeps < opts.max_sweeps);
      dmax = sweep(false);
      trace();
    }
    double gap =
        detail::cd_kkt_gap(oracle, beta, lambda, penalty_factor, excluded,
                           work);
    if (gap <= opts.tol_kkt) {
      result.kkt_gap = gap;
      return result;
    }
    if (result.sweeps >= opts.max_sweeps) {
      throw SolverError("cd_solve: no convergence after " +
                            std::to_string(result.sweeps) +
                            " sweeps (kkt gap " + std::to_string(gap) + ")",
                        gap);
    }
  }
}

/// Gradient oracle over raw data: q(beta) = ||y - X beta||^2 / n.
class ResidualOracle {
 public:
  ResidualOracle(const Eigen::Ref<const Matrix>& X,
                 const Eigen::Ref<const Vector>& y)
      : X_(X), n_(static_cast<double>(X.rows())), resid_(y) {
    col_sq_ = X.colwise().squaredNorm() / n_;
  }

  /// Rebuilds the residual for a warm start (call before cd_solve).
  void reset(const Eigen::Ref<const Vector>& y, const Vector& beta) {
    resid_ = y;
    for (Index j = 0; j < beta.size(); ++j) {
      if (beta[j] != 0.0) resid_ -= X_.col(j) * beta[j];
    }
  }

  Index dim() const { return X_.cols(); }
  double diag(Index j) const { return col_sq_[j]; }
  double resid_corr(Index j) const { return X_.col(j).dot(resid_) / n_; }
  void apply_update(Index j, double delta) { resid_ -= X_.col(j) * delta; }
  void corr_vector(Vector& out) const {
    out.noalias() = X_.transpose() * resid_ / n_;
  }
  double smooth_value(const Vector&) const {
    return resid_.squaredNorm() / n_;
  }
  const Vector& residual() const { return resid_; }

 private:
  Eigen::Ref<const Matrix> X_;
  double n_;
  Vector resid_;
  Vector col_sq_;
};

/// Gradient oracle over a Gram/covariance matrix:
/// q(beta) = beta^T A beta - 2 b^T beta (constant term unknown).
///
/// The gradient is gathered lazily over the nonzero support instead of
/// maintaining A beta densely, so a coordinate visit costs O(nnz) and an
/// update O(1); sparse solutions keep sweeps cheap no matter how large p
/// gets.
class CovarianceOracle {
 public:
  CovarianceOracle(const Eigen::Ref<const Matrix>& A,
                   const Eigen::Ref<const Vector>& b)
      : A_(A), b_(b), gamma_(Vector::Zero(A.rows())) {}

  void reset(const Vector& beta) {
    gamma_ = beta;
    support_.clear();
    for (Index j = 0; j < gamma_.size(); ++j) {
      if (gamma_[j] != 0.0) support_.push_back(j);
    }
  }

  Index dim() const { return A_.cols(); }
  double diag(Index j) const { return A_(j, j); }
  double resid_corr(Index j) const {
    double dot = 0.0;
    for (Index k : support_) dot += A_(k, j) * gamma_[k];
    return b_[j] - dot;
  }
  void apply_update(Index j, double delta) {
    if (gamma_[j] == 0.0) {
      support_.insert(
          std::lower_bound(support_.begin(), support_.end(), j), j);
    }
    gamma_[j] += delta;
    if (gamma_[j] == 0.0) {
      support_.erase(
          std::lower_bound(support_.begin(), support_.end(), j));
    }
  }
  void corr_vector(Vector& out) const {
    out = b_;
    for (Index k : support_) out -= A_.col(k) * gamma_[k];
  }
  double smooth_value(const Vector& beta) const {
    double quad = 0.0;
    for (Index k : support_) quad += gamma_[k] * resid_quad(k);
    return quad - 2.0 * b_.dot(beta);
  }

 private:
  double resid_quad(Index j) const {
    double dot = 0.0;
    for (Index k : support_) dot += A_(k, j) * gamma_[k];
    return dot;
  }

  Eigen::Ref<const Matrix> A_;
  Eigen::Ref<const Vector> b_;
  Vector gamma_;
  std::vector<Index> support_;
};

}  // namespace hdi

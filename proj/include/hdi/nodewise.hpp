#pragma once

#include <iosfwd>
#include <vector>

#include "hdi/coordinate_descent.hpp"
#include "hdi/rng.hpp"
#include "hdi/types.hpp"

namespace hdi {

/// Relaxed inverse of a Gram matrix built row by row from lasso
/// regressions of each column on the rest.
///
/// Row j is C_j / tau_sq_j where C has unit diagonal and -gamma_j off the
/// diagonal, so theta(j,j) == 1 / tau_sq[j] by construction. Every row
/// carries a certified bound: || Sigma theta_row_j - e_j ||_inf <=
/// kkt_bounds[j] (+1e-8 slack), with (Sigma theta_row_j)_j == 1.
struct NodewisePrecision {
  Matrix theta;          // p x p, row j approximates row j of Sigma^{-1}
  Vector tau_sq;         // residual quadratic form + penalty term
  Vector tau_tilde_sq;   // plain residual mean square; empty in matrix mode
  Vector lambdas;        // per-row penalty actually used
  Vector kkt_bounds;     // lambdas[j] / tau_sq[j]
  bool design_mode = false;

  Index dim() const { return theta.rows(); }
};

struct NodewiseOptions {
  CdOptions cd{1e-12, 1e-10, 100000, false};  // certificates need slack < 1e-8
  double tau_floor = 1e-10;
  int threads = 1;
  bool certify = true;  // recompute the extended KKT bounds before returning
};

/// Nodewise regressions on the raw design; per-row penalties.
NodewisePrecision nodewise_from_design(const Eigen::Ref<const Matrix>& X,
                                       const Vector& lambdas,
                                       const NodewiseOptions& opts = {});
NodewisePrecision nodewise_from_design(const Eigen::Ref<const Matrix>& X,
                                       double lambda,
                                       const NodewiseOptions& opts = {});

/// Nodewise regressions with a symmetric matrix as the only input; solves
/// the quadratic-form lasso per row by coordinate descent on
/// Sigma_{-j,-j} gamma - Sigma_{-j,j}.
NodewisePrecision nodewise_from_matrix(const Eigen::Ref<const Matrix>& Sigma,
                                       const Vector& lambdas,
                                       const NodewiseOptions& opts = {});
NodewisePrecision nodewise_from_matrix(const Eigen::Ref<const Matrix>& Sigma,
                                       double lambda,
                                       const NodewiseOptions& opts = {});

struct NodewiseCvResult {
  NodewisePrecision precision;
  double lambda = 0.0;
  Vector grid;
  Vector cv_error;  // summed over rows and folds, per grid point
};

/// One shared penalty for all p regressions, chosen by K-fold
/// cross-validation on the summed out-of-fold prediction error; the
/// returned precision comes from nodewise_from_design at that penalty.
NodewiseCvResult nodewise_shared_lambda_cv(const Eigen::Ref<const Matrix>& X,
                                           int folds, const Vector& grid,
                                           RngStream rng,
                                           const NodewiseOptions& opts = {});

/// Largest column cross-correlation max_j ||X_{-j}^T X_j / n||_inf; grid
/// anchor for the shared-lambda search.
double nodewise_lambda_max(const Eigen::Ref<const Matrix>& X);

/// CSV round trip for caching a computed precision across runs.
void save_nodewise_csv(std::ostream& os, const NodewisePrecision& np);
NodewisePrecision load_nodewise_csv(std::istream& is);

}  // namespace hdi

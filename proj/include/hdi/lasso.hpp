#pragma once

#include <cstdint>
#include <vector>

#include "hdi/coordinate_descent.hpp"
#include "hdi/rng.hpp"
#include "hdi/types.hpp"

namespace hdi {

/// Solution of min_beta ||y - X beta||^2 / n + 2 lambda ||beta||_1.
struct LassoFit {
  Vector beta;
  double lambda = 0.0;
  std::size_t n_iter = 0;     // coordinate sweeps
  double objective = 0.0;     // penalized objective at beta
  double kkt_gap = 0.0;       // max stationarity violation
  std::vector<Index> active_set;
  std::vector<double> objective_trace;  // per full sweep, when recorded
};

/// Subgradient vector kappa with lambda * kappa = X^T (y - X beta) / n.
struct SubgradientCertificate {
  Vector kappa;
};

struct ScaledLassoFit {
  LassoFit fit;           // lasso at lambda0 * sigma_hat
  double sigma_hat = 0.0; // ||y - X beta||_2 / sqrt(n) at the fixed point
  double lambda0 = 0.0;
  std::size_t n_outer = 0;
};

LassoFit fit_lasso(const Eigen::Ref<const Matrix>& X,
                   const Eigen::Ref<const Vector>& y, double lambda,
                   const CdOptions& opts = {},
                   const Vector* warm_start = nullptr);

SubgradientCertificate extract_subgradient(const LassoFit& fit,
                                           const Eigen::Ref<const Matrix>& X,
                                           const Eigen::Ref<const Vector>& y);

/// ||X^T y / n||_inf — the smallest lambda with an all-zero solution.
double lasso_lambda_max(const Eigen::Ref<const Matrix>& X,
                        const Eigen::Ref<const Vector>& y);

/// size log-spaced values from lambda_max down to ratio * lambda_max.
Vector lasso_lambda_grid(double lambda_max, int size = 100,
                         double ratio = 0.01);

/// Solutions along a strictly decreasing lambda grid with warm starts.
std::vector<Vector> lasso_path(const Eigen::Ref<const Matrix>& X,
                               const Eigen::Ref<const Vector>& y,
                               const Vector& grid, const CdOptions& opts = {});

struct LassoCvResult {
  LassoFit fit;
  double lambda = 0.0;
  Vector grid;
  Vector cv_error;  // mean out-of-fold squared error per grid point
};

/// K-fold cross-validation over the grid; fold assignment is a
/// deterministic function of the stream, ties go to the larger lambda.
LassoCvResult fit_lasso_cv(const Eigen::Ref<const Matrix>& X,
                           const Eigen::Ref<const Vector>& y, int folds,
                           const Vector& grid, RngStream rng,
                           const CdOptions& opts = {}, int threads = 1);

/// Alternates lasso fits at lambda0 * sigma with the residual update
/// sigma <- ||y - X beta||_2 / sqrt(n) until the noise scale is a fixed
/// point within 1e-6. lambda0 <= 0 selects sqrt(2 log(p) / n).
ScaledLassoFit fit_scaled_lasso(const Eigen::Ref<const Matrix>& X,
                                const Eigen::Ref<const Vector>& y,
                                double lambda0 = 0.0,
                                const CdOptions& opts = {});

/// Fold labels in {0, ..., folds-1}, balanced within one, shuffled by rng.
std::vector<int> cv_fold_labels(Index n, int folds, RngStream& rng);

/// Columns scaled to unit norm sqrt(mean square); returns the scales so a
/// solution on the scaled design can be mapped back (beta_j / scale_j).
/// Optional helper: the solvers never rescale on their own.
Matrix standardize_columns(const Eigen::Ref<const Matrix>& X, Vector& scales);

}  // namespace hdi

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hdi/coordinate_descent.hpp"
#include "hdi/nodewise.hpp"
#include "hdi/rng.hpp"
#include "hdi/types.hpp"

namespace hdi {

/// Per-observation convex loss rho(y, a) with first and second derivatives
/// in the linear predictor a.
struct LossFamily {
  std::string id;
  std::function<double(double, double)> rho;
  std::function<double(double, double)> rho_dot;
  std::function<double(double, double)> rho_ddot;
};

/// rho(y,a) = -y a + log(1 + e^a), overflow-safe for |a| <= 700.
LossFamily logistic_family();

/// rho(y,a) = (y - a)^2 / 2, so mean loss + lambda ||beta||_1 has the same
/// minimizer as the lasso objective at the same lambda and the curvature
/// matrix is exactly X^T X / n.
LossFamily squared_error_family();

struct GlmOptions {
  bool intercept = true;      // unpenalized
  double weight_floor = 1e-5; // floor on rho_ddot inside the IRLS weights
  std::size_t max_irls = 200;
  double tol_coef = 1e-9;     // max change of beta across one IRLS step
  double tol_kkt = 1e-6;      // stationarity of the true gradient
  CdOptions cd{1e-10, 1e-8, 100000, false};  // inner weighted problems
};

/// Solution of min_beta mean_i rho(y_i, x_i beta) + lambda ||beta||_1
/// (the intercept, when enabled, is an extra unpenalized coordinate).
struct GlmFit {
  Vector beta;                // slopes, length p
  double intercept = 0.0;
  bool has_intercept = false;
  double lambda = 0.0;
  bool converged = false;
  double objective = 0.0;     // penalized objective at the solution
  double kkt_gap = 0.0;       // on the true (non-quadratic) gradient
  std::size_t n_irls = 0;
  bool weight_floor_hit = false;
  std::vector<double> objective_trace;  // per accepted IRLS step
};

GlmFit fit_glm_lasso(const Eigen::Ref<const Matrix>& X,
                     const Eigen::Ref<const Vector>& y,
                     const LossFamily& family, double lambda,
                     const GlmOptions& opts = {});

/// Smallest lambda with all slopes zero: the sup-norm of the null-model
/// gradient (intercept-only fit when the intercept is enabled).
double glm_lambda_max(const Eigen::Ref<const Matrix>& X,
                      const Eigen::Ref<const Vector>& y,
                      const LossFamily& family, bool intercept);

struct GlmCvResult {
  GlmFit fit;
  double lambda = 0.0;
  Vector grid;
  Vector cv_deviance;  // mean out-of-fold loss per grid point
};

GlmCvResult fit_glm_lasso_cv(const Eigen::Ref<const Matrix>& X,
                             const Eigen::Ref<const Vector>& y,
                             const LossFamily& family, int folds,
                             const Vector& grid, RngStream rng,
                             const GlmOptions& opts = {}, int threads = 1);

/// Curvature matrix mean_i rho_ddot(y_i, a_i) x_i x_i^T, assembled as
/// X^T W^2 X / n with W = diag(sqrt(rho_ddot)).
Matrix glm_sigma_hat_matrix(const Eigen::Ref<const Matrix>& X,
                            const Eigen::Ref<const Vector>& y,
                            const GlmFit& fit, const LossFamily& family);

/// Row-weighted design W X whose Gram is glm_sigma_hat_matrix; nodewise
/// regression on it carries the design-mode certificates over to the GLM.
/// Includes a leading ones column (also weighted) when the fit has an
/// intercept.
Matrix glm_weighted_design(const Eigen::Ref<const Matrix>& X,
                           const Eigen::Ref<const Vector>& y,
                           const GlmFit& fit, const LossFamily& family);

/// De-sparsified GLM estimate with sandwich standard errors. Rows for the
/// intercept (when present) are dropped from the reported vectors so the
/// output always has one entry per slope.
struct GlmDesparsifiedFit {
  Vector b;          // beta - theta * mean_i rho_dot x_i
  Vector sigma_hat;  // sqrt of (theta K theta^T)_jj, K = mean rho_dot^2 xx^T
  Vector zscores;    // sqrt(n) b_j / sigma_hat_j
  Vector pvalues;
  Index n = 0;

  std::pair<double, double> ci(Index j, double alpha) const;
  Vector ci_half_widths(double alpha) const;
};

/// theta must approximate the inverse of glm_sigma_hat_matrix for this fit
/// (build it on glm_weighted_design or the matrix itself; dimensions must
/// include the intercept column when the fit has one).
GlmDesparsifiedFit desparsify_glm(const Eigen::Ref<const Matrix>& X,
                                  const Eigen::Ref<const Vector>& y,
                                  const GlmFit& fit, const LossFamily& family,
                                  const NodewisePrecision& theta);

}  // namespace hdi

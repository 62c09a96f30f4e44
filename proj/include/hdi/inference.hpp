#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

#include "hdi/lasso.hpp"
#include "hdi/nodewise.hpp"
#include "hdi/types.hpp"

namespace hdi {

/// De-sparsified lasso estimate with studentized per-coordinate inference.
struct DesparsifiedFit {
  Vector b;           // beta + theta * X^T (y - X beta) / n
  Vector se;          // sigma_eps * sqrt(omega_diag / n)
  Vector omega_diag;  // diag of theta Sigma theta^T
  Vector zscores;
  Vector pvalues;     // two-sided normal
  double sigma_eps = 0.0;
  Index n = 0;

  /// [b_j - c, b_j + c] with c = q_{1-alpha/2} * se_j.
  std::pair<double, double> ci(Index j, double alpha) const;
  /// Half-widths of all intervals at level alpha.
  Vector ci_half_widths(double alpha) const;
};

DesparsifiedFit desparsify(const Eigen::Ref<const Matrix>& X,
                           const Eigen::Ref<const Vector>& y,
                           const LassoFit& fit, const NodewisePrecision& theta,
                           double sigma_eps);

/// Exact split sqrt(n) (b - beta0) = W + Delta, available when the true
/// coefficients and errors are known (simulation only).
struct PivotDecomposition {
  Vector W;      // theta X^T eps / sqrt(n)
  Vector Delta;  // sqrt(n) (theta Sigma - I)(beta0 - beta)
};

PivotDecomposition pivot_decomposition(const Eigen::Ref<const Matrix>& X,
                                       const Eigen::Ref<const Vector>& y,
                                       const LassoFit& fit,
                                       const NodewisePrecision& theta,
                                       const Vector& beta0, const Vector& eps);

/// Full omega = theta Sigma theta^T for the design's Gram matrix; needed
/// only by the max-statistic group test, so computed on demand.
Matrix omega_matrix(const NodewisePrecision& theta,
                    const Eigen::Ref<const Matrix>& X);

/// One row per coordinate: index,b,se,z,p,ci_low,ci_high[,family].
void write_inference_csv(std::ostream& os, const DesparsifiedFit& fit,
                         double alpha,
                         const std::optional<std::string>& family = {});

}  // namespace hdi

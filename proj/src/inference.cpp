#include "hdi/inference.hpp"

#include <cmath>
#include <ostream>

#include "hdi/gaussian.hpp"

namespace hdi {

std::pair<double, double> DesparsifiedFit::ci(Index j, double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("ci: alpha must lie in (0,1)");
  }
  double c = std_normal_quantile(1.0 - alpha / 2.0) * se[j];
  return {b[j] - c, b[j] + c};
}

Vector DesparsifiedFit::ci_half_widths(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("ci_half_widths: alpha must lie in (0,1)");
  }
  return std_normal_quantile(1.0 - alpha / 2.0) * se;
}

DesparsifiedFit desparsify(const Eigen::Ref<const Matrix>& X,
                           const Eigen::Ref<const Vector>& y,
                           const LassoFit& fit, const NodewisePrecision& theta,
                           double sigma_eps) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (fit.beta.size() != p || theta.dim() != p || y.size() != n) {
    throw InputError("desparsify: dimension mismatch");
  }
  if (!(sigma_eps > 0.0)) throw InputError("desparsify: sigma_eps <= 0");

  DesparsifiedFit out;
  out.n = n;
  out.sigma_eps = sigma_eps;

  Vector resid = y - X * fit.beta;
  Vector corr = X.transpose() * resid / static_cast<double>(n);
  out.b = fit.beta + theta.theta * corr;

  // omega_jj as the quadratic form of row j through the design.
  Matrix M = X * theta.theta.transpose();  // column j is X theta_j
  out.omega_diag =
      M.colwise().squaredNorm().transpose() / static_cast<double>(n);
  if (theta.design_mode) {
    // Same quantity through the residual identity tau~^2 / tau^4.
    Vector alt = theta.tau_tilde_sq.cwiseQuotient(
        theta.tau_sq.cwiseProduct(theta.tau_sq));
    double dev = (alt - out.omega_diag).cwiseAbs().maxCoeff();
    if (dev > 1e-8) {
      throw SolverError(
          "desparsify: omega diagonal identity violated (dev " +
              std::to_string(dev) + ")",
          dev);
    }
  }
  require_finite(out.b, "desparsify: b");

  out.se = sigma_eps *
           (out.omega_diag / static_cast<double>(n)).cwiseSqrt();
  out.zscores = out.b.cwiseQuotient(out.se);
  out.pvalues.resize(p);
  for (Index j = 0; j < p; ++j) {
    out.pvalues[j] = two_sided_pvalue(out.zscores[j]);
  }
  return out;
}

PivotDecomposition pivot_decomposition(const Eigen::Ref<const Matrix>& X,
                                       const Eigen::Ref<const Vector>& y,
                                       const LassoFit& fit,
                                       const NodewisePrecision& theta,
                                       const Vector& beta0,
                                       const Vector& eps) {
  const Index n = X.rows();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  if ((y - X * beta0 - eps).cwiseAbs().maxCoeff() > 1e-10) {
    throw InputError(
        "pivot_decomposition: y, beta0, eps are not a consistent triple");
  }

  PivotDecomposition out;
  out.W = theta.theta * (X.transpose() * eps) / sqrt_n;
  Vector diff = beta0 - fit.beta;
  Vector sigma_diff = X.transpose() * (X * diff) / static_cast<double>(n);
  out.Delta = sqrt_n * (theta.theta * sigma_diff - diff);

  // W + Delta == sqrt(n)(b - beta0) is an algebraic identity; enforce it.
  Vector corr = X.transpose() * (y - X * fit.beta) / static_cast<double>(n);
  Vector b = fit.beta + theta.theta * corr;
  double dev =
      (out.W + out.Delta - sqrt_n * (b - beta0)).cwiseAbs().maxCoeff();
  if (dev > 1e-8) {
    throw SolverError("pivot_decomposition: identity violated (dev " +
                          std::to_string(dev) + ")",
                      dev);
  }
  return out;
}

Matrix omega_matrix(const NodewisePrecision& theta,
                    const Eigen::Ref<const Matrix>& X) {
  Matrix M = X * theta.theta.transpose();
  return M.transpose() * M / static_cast<double>(X.rows());
}

void write_inference_csv(std::ostream& os, const DesparsifiedFit& fit,
                         double alpha,
                         const std::optional<std::string>& family) {
  os.precision(17);
  os << "index,b,se,z,p,ci_low,ci_high";
  if (family) os << ",family";
  os << "\n";
  Vector half = fit.ci_half_widths(alpha);
  for (Index j = 0; j < fit.b.size(); ++j) {
    os << (j + 1) << "," << fit.b[j] << "," << fit.se[j] << ","
       << fit.zscores[j] << "," << fit.pvalues[j] << ","
       << fit.b[j] - half[j] << "," << fit.b[j] + half[j];
    if (family) os << "," << *family;
    os << "\n";
  }
}

}  // namespace hdi

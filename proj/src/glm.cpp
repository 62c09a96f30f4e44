#include "hdi/glm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hdi/gaussian.hpp"
#include "hdi/parallel.hpp"

namespace hdi {

namespace {

double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  double e = std::exp(a);
  return e / (1.0 + e);
}

// Linear predictors past this point mean the fit is running away from any
// finite optimum (fitted probabilities within 4e-44 of 0/1).
constexpr double kSeparationBound = 100.0;

struct AugmentedProblem {
  Matrix Z;          // [1 X] when the model has an intercept, else X
  Vector pf;         // penalty factors: 0 for the intercept column
  bool intercept;
  Index p;           // slope count
};

AugmentedProblem augment(const Eigen::Ref<const Matrix>& X, bool intercept) {
  AugmentedProblem prob;
  prob.intercept = intercept;
  prob.p = X.cols();
  if (intercept) {
    prob.Z.resize(X.rows(), X.cols() + 1);
    prob.Z.col(0).setOnes();
    prob.Z.rightCols(X.cols()) = X;
    prob.pf = Vector::Ones(X.cols() + 1);
    prob.pf[0] = 0.0;
  } else {
    prob.Z = X;
    prob.pf = Vector::Ones(X.cols());
  }
  return prob;
}

double penalized_objective(const AugmentedProblem& prob,
                           const Eigen::Ref<const Vector>& y,
                           const LossFamily& family, double lambda,
                           const Vector& coefs, const Vector& a) {
  double loss = 0.0;
  for (Index i = 0; i < y.size(); ++i) loss += family.rho(y[i], a[i]);
  loss /= static_cast<double>(y.size());
  double pen = 0.0;
  for (Index j = 0; j < coefs.size(); ++j) {
    pen += prob.pf[j] * std::abs(coefs[j]);
  }
  return loss + lambda * pen;
}

double true_kkt_gap(const AugmentedProblem& prob, const Vector& grad,
                    double lambda, const Vector& coefs) {
  double gap = 0.0;
  for (Index j = 0; j < coefs.size(); ++j) {
    double t = lambda * prob.pf[j];
    double g;
    if (coefs[j] != 0.0) {
      g = std::abs(grad[j] + t * (coefs[j] > 0 ? 1.0 : -1.0));
    } else {
      g = std::max(std::abs(grad[j]) - t, 0.0);
    }
    gap = std::max(gap, g);
  }
  return gap;
}

struct IrlsResult {
  Vector coefs;
  double objective = 0.0;
  double kkt_gap = 0.0;
  std::size_t n_irls = 0;
  bool weight_floor_hit = false;
  std::vector<double> objective_trace;
};

IrlsResult irls_solve(const AugmentedProblem& prob,
                      const Eigen::Ref<const Vector>& y,
                      const LossFamily& family, double lambda,
                      const GlmOptions& opts, const Vector* warm) {
  const Index n = prob.Z.rows();
  const Index q = prob.Z.cols();
  const double dn = static_cast<double>(n);

  IrlsResult res;
  res.coefs = warm ? *warm : Vector::Zero(q);

  Vector a = prob.Z * res.coefs;
  double f = penalized_objective(prob, y, family, lambda, res.coefs, a);
  res.objective_trace.push_back(f);
  Vector rho_dot(n), weights(n);

  for (std::size_t it = 0; it < opts.max_irls; ++it) {
    if (a.cwiseAbs().maxCoeff() > kSeparationBound) {
      throw SolverError(
          "fit_glm_lasso: separation detected (diverging linear predictor, "
          "vanishing curvature)",
          0.0);
    }
    for (Index i = 0; i < n; ++i) {
      rho_dot[i] = family.rho_dot(y[i], a[i]);
      double w = family.rho_ddot(y[i], a[i]);
      if (w < opts.weight_floor) {
        w = opts.weight_floor;
        res.weight_floor_hit = true;
      }
      weights[i] = w;
    }
    require_finite(rho_dot, "fit_glm_lasso: loss gradient");

    Vector grad = prob.Z.transpose() * rho_dot / dn;
    res.kkt_gap = true_kkt_gap(prob, grad, lambda, res.coefs);
    res.n_irls = it;
    if (res.kkt_gap <= opts.tol_kkt) {
      // An unpenalized problem whose loss has saturated (floored weights,
      // large linear predictor) met the gradient tolerance by running off
      // towards infinity, not by reaching a minimizer.
      if (lambda * prob.pf.maxCoeff() == 0.0 && res.weight_floor_hit &&
          a.cwiseAbs().maxCoeff() > 20.0) {
        throw SolverError(
            "fit_glm_lasso: separation detected (weights vanish while the "
            "linear predictor diverges)",
            res.kkt_gap);
      }
      res.objective = f;
      return res;
    }

    // Penalized weighted least squares on the working response, solved on
    // the row-scaled copy so the shared kernel applies unchanged.
    Vector sw = weights.cwiseSqrt();
    Vector z = a - rho_dot.cwiseQuotient(weights);
    Matrix Zs = sw.asDiagonal() * prob.Z;
    Vector zs = sw.cwiseProduct(z);
    Vector cand = res.coefs;
    ResidualOracle oracle(Zs, zs);
    oracle.reset(zs, cand);
    cd_solve(oracle, lambda, cand, opts.cd, &prob.pf);

    // Halving line search on the true penalized objective.
    Vector dir = cand - res.coefs;
    double step = 1.0;
    Vector trial;
    Vector a_trial;
    double f_trial;
    for (;;) {
      trial = res.coefs + step * dir;
      a_trial = prob.Z * trial;
      f_trial = penalized_objective(prob, y, family, lambda, trial, a_trial);
      if (f_trial <= f + 1e-10) break;
      step *= 0.5;
      if (step < 1e-12) {  // no acceptable move in this direction
        trial = res.coefs;
        a_trial = a;
        f_trial = f;
        break;
      }
    }
    double max_change = (trial - res.coefs).cwiseAbs().maxCoeff();
    res.coefs = trial;
    a = a_trial;
    f = f_trial;
    res.objective_trace.push_back(f);

    if (max_change <= opts.tol_coef) {
      Vector rd(n);
      for (Index i = 0; i < n; ++i) rd[i] = family.rho_dot(y[i], a[i]);
      Vector g = prob.Z.transpose() * rd / dn;
      res.kkt_gap = true_kkt_gap(prob, g, lambda, res.coefs);
      res.n_irls = it + 1;
      res.objective = f;
      if (res.kkt_gap <= opts.tol_kkt) return res;
      throw SolverError("fit_glm_lasso: stalled with kkt gap " +
                            std::to_string(res.kkt_gap),
                        res.kkt_gap);
    }
  }
  throw SolverError("fit_glm_lasso: no convergence after " +
                        std::to_string(opts.max_irls) + " IRLS iterations",
                    res.kkt_gap);
}

}  // namespace

LossFamily logistic_family() {
  LossFamily fam;
  fam.id = "logistic";
  fam.rho = [](double y, double a) {
    double log1pe = a > 0.0 ? a + std::log1p(std::exp(-a))
                            : std::log1p(std::exp(a));
    return -y * a + log1pe;
  };
  fam.rho_dot = [](double y, double a) { return -y + sigmoid(a); };
  fam.rho_ddot = [](double, double a) {
    double s = sigmoid(a);
    return s * (1.0 - s);
  };
  return fam;
}

LossFamily squared_error_family() {
  LossFamily fam;
  fam.id = "squared_error";
  fam.rho = [](double y, double a) { return 0.5 * (y - a) * (y - a); };
  fam.rho_dot = [](double y, double a) { return a - y; };
  fam.rho_ddot = [](double, double) { return 1.0; };
  return fam;
}

GlmFit fit_glm_lasso(const Eigen::Ref<const Matrix>& X,
                     const Eigen::Ref<const Vector>& y,
                     const LossFamily& family, double lambda,
                     const GlmOptions& opts) {
  if (X.rows() != y.size()) throw InputError("fit_glm_lasso: y length");
  if (lambda < 0.0) throw InputError("fit_glm_lasso: negative lambda");
  require_finite(X, "fit_glm_lasso: X");
  require_finite(y, "fit_glm_lasso: y");
  if (family.id == "logistic") {
    for (Index i = 0; i < y.size(); ++i) {
      if (y[i] != 0.0 && y[i] != 1.0) {
        throw InputError("fit_glm_lasso: logistic response must be 0/1");
      }
    }
  }

  AugmentedProblem prob = augment(X, opts.intercept);
  IrlsResult res = irls_solve(prob, y, family, lambda, opts, nullptr);

  GlmFit fit;
  fit.has_intercept = opts.intercept;
  fit.intercept = opts.intercept ? res.coefs[0] : 0.0;
  fit.beta = opts.intercept ? res.coefs.tail(prob.p) : res.coefs;
  fit.lambda = lambda;
  fit.converged = true;
  fit.objective = res.objective;
  fit.kkt_gap = res.kkt_gap;
  fit.n_irls = res.n_irls;
  fit.weight_floor_hit = res.weight_floor_hit;
  fit.objective_trace = std::move(res.objective_trace);
  return fit;
}

double glm_lambda_max(const Eigen::Ref<const Matrix>& X,
                      const Eigen::Ref<const Vector>& y,
                      const LossFamily& family, bool intercept) {
  const Index n = X.rows();
  const double dn = static_cast<double>(n);
  double c = 0.0;
  if (intercept) {
    // Newton on the intercept-only model.
    for (int it = 0; it < 100; ++it) {
      double g = 0.0, h = 0.0;
      for (Index i = 0; i < n; ++i) {
        g += family.rho_dot(y[i], c);
        h += family.rho_ddot(y[i], c);
      }
      if (std::abs(g / dn) < 1e-12 || h <= 0.0) break;
      c -= g / h;
      c = std::clamp(c, -30.0, 30.0);
    }
  }
  Vector rd(n);
  for (Index i = 0; i < n; ++i) rd[i] = family.rho_dot(y[i], c);
  return (X.transpose() * rd / dn).cwiseAbs().maxCoeff();
}

GlmCvResult fit_glm_lasso_cv(const Eigen::Ref<const Matrix>& X,
                             const Eigen::Ref<const Vector>& y,
                             const LossFamily& family, int folds,
                             const Vector& grid, RngStream rng,
                             const GlmOptions& opts, int threads) {
  const Index n = X.rows();
  if (folds < 2) throw ConfigError("fit_glm_lasso_cv: need >= 2 folds");
  if (n < folds) throw ConfigError("fit_glm_lasso_cv: fewer rows than folds");
  for (Index k = 1; k < grid.size(); ++k) {
    if (!(grid[k] < grid[k - 1])) {
      throw ConfigError("fit_glm_lasso_cv: grid must be strictly decreasing");
    }
  }

  RngStream fold_rng = rng.split(0);
  std::vector<Index> perm = sample_permutation(fold_rng, n);
  std::vector<int> label(static_cast<size_t>(n));
  for (Index k = 0; k < n; ++k) {
    label[static_cast<size_t>(perm[static_cast<size_t>(k)])] =
        static_cast<int>(k % folds);
  }

  Matrix err = Matrix::Zero(folds, grid.size());
  parallel_for(folds, threads, [&](Index f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i) {
      (label[static_cast<size_t>(i)] == f ? test : train).push_back(i);
    }
    Matrix Xtr(static_cast<Index>(train.size()), X.cols());
    Vector ytr(static_cast<Index>(train.size()));
    for (size_t r = 0; r < train.size(); ++r) {
      Xtr.row(static_cast<Index>(r)) = X.row(train[r]);
      ytr[static_cast<Index>(r)] = y[train[r]];
    }
    AugmentedProblem prob = augment(Xtr, opts.intercept);
    Vector warm = Vector::Zero(prob.Z.cols());
    for (Index k = 0; k < grid.size(); ++k) {
      IrlsResult res = irls_solve(prob, ytr, family, grid[k], opts, &warm);
      warm = res.coefs;
      double dev = 0.0;
      for (Index i : test) {
        double a = X.row(i).dot(opts.intercept
                                    ? warm.tail(X.cols()).eval()
                                    : warm);
        if (opts.intercept) a += warm[0];
        dev += family.rho(y[i], a);
      }
      err(f, k) = dev;
    }
  });

  GlmCvResult out;
  out.grid = grid;
  out.cv_deviance = Vector(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    double total = 0.0;
    for (Index f = 0; f < folds; ++f) total += err(f, k);
    out.cv_deviance[k] = total / static_cast<double>(n);
  }
  Index best = 0;
  for (Index k = 1; k < grid.size(); ++k) {
    if (out.cv_deviance[k] < out.cv_deviance[best]) best = k;
  }
  out.lambda = grid[best];
  out.fit = fit_glm_lasso(X, y, family, out.lambda, opts);
  return out;
}

Matrix glm_sigma_hat_matrix(const Eigen::Ref<const Matrix>& X,
                            const Eigen::Ref<const Vector>& y,
                            const GlmFit& fit, const LossFamily& family) {
  Matrix Zw = glm_weighted_design(X, y, fit, family);
  return Zw.transpose() * Zw / static_cast<double>(X.rows());
}

Matrix glm_weighted_design(const Eigen::Ref<const Matrix>& X,
                           const Eigen::Ref<const Vector>& y,
                           const GlmFit& fit, const LossFamily& family) {
  AugmentedProblem prob = augment(X, fit.has_intercept);
  Vector coefs(prob.Z.cols());
  if (fit.has_intercept) {
    coefs[0] = fit.intercept;
    coefs.tail(X.cols()) = fit.beta;
  } else {
    coefs = fit.beta;
  }
  Vector a = prob.Z * coefs;
  Vector w(a.size());
  for (Index i = 0; i < a.size(); ++i) {
    double dd = family.rho_ddot(y[i], a[i]);
    if (!(dd >= 0.0) || !std::isfinite(dd)) {
      throw InputError("glm_weighted_design: non-finite or negative "
                       "curvature weight");
    }
    w[i] = std::sqrt(dd);
  }
  return w.asDiagonal() * prob.Z;
}

std::pair<double, double> GlmDesparsifiedFit::ci(Index j,
                                                 double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("ci: alpha must lie in (0,1)");
  }
  double c = std_normal_quantile(1.0 - alpha / 2.0) * sigma_hat[j] /
             std::sqrt(static_cast<double>(n));
  return {b[j] - c, b[j] + c};
}

Vector GlmDesparsifiedFit::ci_half_widths(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("ci_half_widths: alpha must lie in (0,1)");
  }
  return std_normal_quantile(1.0 - alpha / 2.0) * sigma_hat /
         std::sqrt(static_cast<double>(n));
}

GlmDesparsifiedFit desparsify_glm(const Eigen::Ref<const Matrix>& X,
                                  const Eigen::Ref<const Vector>& y,
                                  const GlmFit& fit, const LossFamily& family,
                                  const NodewisePrecision& theta) {
  const Index n = X.rows();
  const double dn = static_cast<double>(n);
  AugmentedProblem prob = augment(X, fit.has_intercept);
  const Index q = prob.Z.cols();
  if (theta.dim() != q) {
    throw InputError("desparsify_glm: theta dimension does not match the "
                     "(augmented) design");
  }

  Vector coefs(q);
  if (fit.has_intercept) {
    coefs[0] = fit.intercept;
    coefs.tail(X.cols()) = fit.beta;
  } else {
    coefs = fit.beta;
  }
  Vector a = prob.Z * coefs;
  Vector rho_dot(n);
  for (Index i = 0; i < n; ++i) rho_dot[i] = family.rho_dot(y[i], a[i]);

  Vector grad = prob.Z.transpose() * rho_dot / dn;
  Vector b_full = coefs - theta.theta * grad;

  Matrix M = prob.Z * theta.theta.transpose();  // col j = Z theta_j
  Vector sigma_sq(q);
  for (Index j = 0; j < q; ++j) {
    sigma_sq[j] = M.col(j).cwiseProduct(rho_dot).squaredNorm() / dn;
    if (!(sigma_sq[j] > 0.0)) {
      throw DegenerateError(
          "desparsify_glm: zero variance estimate at coordinate " +
          std::to_string(j));
    }
  }
  require_finite(b_full, "desparsify_glm: b");

  const Index skip = fit.has_intercept ? 1 : 0;
  const Index p = q - skip;
  GlmDesparsifiedFit out;
  out.n = n;
  out.b = b_full.tail(p);
  out.sigma_hat = sigma_sq.tail(p).cwiseSqrt();
  out.zscores = std::sqrt(dn) * out.b.cwiseQuotient(out.sigma_hat);
  out.pvalues.resize(p);
  for (Index j = 0; j < p; ++j) {
    out.pvalues[j] = two_sided_pvalue(out.zscores[j]);
  }
  return out;
}

}  // namespace hdi

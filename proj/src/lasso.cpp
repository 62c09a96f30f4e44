#include "hdi/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hdi/parallel.hpp"

namespace hdi {

namespace {

std::vector<Index> nonzero_indices(const Vector& beta) {
  std::vector<Index> idx;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) idx.push_back(j);
  }
  return idx;
}

}  // namespace

LassoFit fit_lasso(const Eigen::Ref<const Matrix>& X,
                   const Eigen::Ref<const Vector>& y, double lambda,
                   const CdOptions& opts, const Vector* warm_start) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (n < 2) throw InputError("fit_lasso: need at least two rows");
  if (y.size() != n) throw InputError("fit_lasso: y length mismatch");
  if (lambda < 0.0) throw InputError("fit_lasso: negative lambda");
  require_finite(X, "fit_lasso: X");
  require_finite(y, "fit_lasso: y");

  Vector beta = warm_start ? *warm_start : Vector::Zero(p);
  if (beta.size() != p) throw InputError("fit_lasso: warm start length");

  ResidualOracle oracle(X, y);
  if (warm_start) oracle.reset(y, beta);
  CdResult cd = cd_solve(oracle, lambda, beta, opts);

  LassoFit fit;
  fit.beta = std::move(beta);
  fit.lambda = lambda;
  fit.n_iter = cd.sweeps;
  fit.objective_trace = std::move(cd.objective_trace);
  // Certificate quantities recomputed from scratch, independent of the
  // solver's incremental residual.
  Vector resid = y - X * fit.beta;
  Vector corr = X.transpose() * resid / static_cast<double>(n);
  double gap = 0.0;
  for (Index j = 0; j < p; ++j) {
    if (fit.beta[j] != 0.0) {
      gap = std::max(gap,
                     std::abs(corr[j] - lambda * (fit.beta[j] > 0 ? 1. : -1.)));
    } else {
      gap = std::max(gap, std::max(std::abs(corr[j]) - lambda, 0.0));
    }
  }
  fit.kkt_gap = gap;
  fit.objective = resid.squaredNorm() / static_cast<double>(n) +
                  2.0 * lambda * fit.beta.template lpNorm<1>();
  fit.active_set = nonzero_indices(fit.beta);
  return fit;
}

SubgradientCertificate extract_subgradient(const LassoFit& fit,
                                           const Eigen::Ref<const Matrix>& X,
                                           const Eigen::Ref<const Vector>& y) {
  if (fit.lambda <= 0.0) {
    throw InputError(
        "extract_subgradient: certificate undefined at lambda = 0");
  }
  SubgradientCertificate cert;
  cert.kappa = X.transpose() * (y - X * fit.beta) /
               (static_cast<double>(X.rows()) * fit.lambda);
  return cert;
}

double lasso_lambda_max(const Eigen::Ref<const Matrix>& X,
                        const Eigen::Ref<const Vector>& y) {
  return (X.transpose() * y / static_cast<double>(X.rows()))
      .cwiseAbs()
      .maxCoeff();
}

Vector lasso_lambda_grid(double lambda_max, int size, double ratio) {
  if (size < 1 || lambda_max <= 0.0 || ratio <= 0.0 || ratio >= 1.0) {
    throw ConfigError("lasso_lambda_grid: bad grid parameters");
  }
  Vector grid(size);
  if (size == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  double step = std::log(ratio) / static_cast<double>(size - 1);
  for (int k = 0; k < size; ++k) {
    grid[k] = lambda_max * std::exp(step * k);
  }
  return grid;
}

std::vector<Vector> lasso_path(const Eigen::Ref<const Matrix>& X,
                               const Eigen::Ref<const Vector>& y,
                               const Vector& grid, const CdOptions& opts) {
  for (Index k = 1; k < grid.size(); ++k) {
    if (!(grid[k] < grid[k - 1])) {
      throw ConfigError("lasso_path: grid must be strictly decreasing");
    }
  }
  std::vector<Vector> path;
  path.reserve(static_cast<size_t>(grid.size()));
  Vector beta = Vector::Zero(X.cols());
  ResidualOracle oracle(X, y);
  for (Index k = 0; k < grid.size(); ++k) {
    cd_solve(oracle, grid[k], beta, opts);
    path.push_back(beta);
  }
  return path;
}

std::vector<int> cv_fold_labels(Index n, int folds, RngStream& rng) {
  std::vector<Index> perm = sample_permutation(rng, n);
  std::vector<int> label(static_cast<size_t>(n));
  for (Index k = 0; k < n; ++k) {
    label[static_cast<size_t>(perm[static_cast<size_t>(k)])] =
        static_cast<int>(k % folds);
  }
  return label;
}

LassoCvResult fit_lasso_cv(const Eigen::Ref<const Matrix>& X,
                           const Eigen::Ref<const Vector>& y, int folds,
                           const Vector& grid, RngStream rng,
                           const CdOptions& opts, int threads) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (folds < 2) throw ConfigError("fit_lasso_cv: need at least 2 folds");
  if (n < folds) throw ConfigError("fit_lasso_cv: fewer rows than folds");
  for (Index k = 1; k < grid.size(); ++k) {
    if (!(grid[k] < grid[k - 1])) {
      throw ConfigError("fit_lasso_cv: grid must be strictly decreasing");
    }
  }

  RngStream fold_rng = rng.split(0);
  std::vector<int> label = cv_fold_labels(n, folds, fold_rng);

  // err(f, k): held-out squared error of fold f at grid point k.
  Matrix err = Matrix::Zero(folds, grid.size());
  parallel_for(folds, threads, [&](Index f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i) {
      (label[static_cast<size_t>(i)] == f ? test : train).push_back(i);
    }
    Matrix Xtr(train.size(), p);
    Vector ytr(train.size());
    for (size_t r = 0; r < train.size(); ++r) {
      Xtr.row(static_cast<Index>(r)) = X.row(train[r]);
      ytr[static_cast<Index>(r)] = y[train[r]];
    }
    std::vector<Vector> path = lasso_path(Xtr, ytr, grid, opts);
    for (Index k = 0; k < grid.size(); ++k) {
      double sse = 0.0;
      for (Index i : test) {
        double pred = X.row(i).dot(path[static_cast<size_t>(k)]);
        double d = y[i] - pred;
        sse += d * d;
      }
      err(f, k) = sse;
    }
  });

  LassoCvResult out;
  out.grid = grid;
  out.cv_error = Vector(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    double total = 0.0;
    for (Index f = 0; f < folds; ++f) total += err(f, k);  // fixed fold order
    out.cv_error[k] = total / static_cast<double>(n);
  }
  Index best = 0;
  for (Index k = 1; k < grid.size(); ++k) {
    if (out.cv_error[k] < out.cv_error[best]) best = k;  // ties keep larger
  }
  out.lambda = grid[best];
  // Warm the full-data refit from the path prefix at the chosen point.
  Vector warm = Vector::Zero(p);
  {
    Vector head = grid.head(best + 1);
    std::vector<Vector> prefix = lasso_path(X, y, head, opts);
    warm = prefix.back();
  }
  out.fit = fit_lasso(X, y, out.lambda, opts, &warm);
  return out;
}

ScaledLassoFit fit_scaled_lasso(const Eigen::Ref<const Matrix>& X,
                                const Eigen::Ref<const Vector>& y,
                                double lambda0, const CdOptions& opts) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (n < 2) throw InputError("fit_scaled_lasso: need at least two rows");
  if (lambda0 <= 0.0) {
    lambda0 = std::sqrt(2.0 * std::log(static_cast<double>(p)) /
                        static_cast<double>(n));
  }

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  double sigma = y.norm() / sqrt_n;
  if (sigma < 1e-8) {
    throw DegenerateError("fit_scaled_lasso: response norm is zero");
  }

  ScaledLassoFit out;
  out.lambda0 = lambda0;
  Vector warm = Vector::Zero(p);
  const std::size_t max_outer = 200;
  for (std::size_t it = 0; it < max_outer; ++it) {
    out.fit = fit_lasso(X, y, lambda0 * sigma, opts, &warm);
    warm = out.fit.beta;
    double next = (y - X * out.fit.beta).norm() / sqrt_n;
    ++out.n_outer;
    if (next < 1e-8) {
      throw DegenerateError(
          "fit_scaled_lasso: noise estimate collapsed (interpolation)");
    }
    if (std::abs(next - sigma) <= 1e-6) {
      out.sigma_hat = next;
      // One more fit so the stored solution is the lasso at the reported
      // scale exactly.
      out.fit = fit_lasso(X, y, lambda0 * next, opts, &warm);
      out.sigma_hat = (y - X * out.fit.beta).norm() / sqrt_n;
      return out;
    }
    sigma = next;
  }
  throw SolverError("fit_scaled_lasso: no fixed point after " +
                        std::to_string(max_outer) + " iterations",
                    0.0);
}

Matrix standardize_columns(const Eigen::Ref<const Matrix>& X, Vector& scales) {
  const double n = static_cast<double>(X.rows());
  scales = (X.colwise().squaredNorm() / n).cwiseSqrt();
  Matrix out = X;
  for (Index j = 0; j < X.cols(); ++j) {
    if (scales[j] <= 0.0) {
      throw InputError("standardize_columns: zero-variance column " +
                       std::to_string(j));
    }
    out.col(j) /= scales[j];
  }
  return out;
}

}  // namespace hdi

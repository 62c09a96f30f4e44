#include <doctest.h>

#include <cmath>

#include "hdi/lasso.hpp"
#include "oracles.hpp"

using namespace hdi;

namespace {

// Design with X^T X / n exactly the identity (scaled Q from a QR).
Matrix orthonormal_design(Index n, Index p, RngStream& rng) {
  Matrix G(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) G(i, j) = rng.next_normal();
  }
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(n, p);
  return std::sqrt(static_cast<double>(n)) * Q;
}

Matrix gaussian_design(Index n, Index p, RngStream& rng) {
  Matrix X(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) X(i, j) = rng.next_normal();
  }
  return X;
}

double lasso_objective(const Matrix& X, const Vector& y, double lambda,
                       const Vector& beta) {
  return (y - X * beta).squaredNorm() / static_cast<double>(X.rows()) +
         2.0 * lambda * beta.lpNorm<1>();
}

}  // namespace

TEST_CASE("soft_threshold: definition") {
  CHECK(soft_threshold(1.0, 0.3) == doctest::Approx(0.7));
  CHECK(soft_threshold(-0.2, 0.3) == 0.0);
  CHECK(soft_threshold(-1.5, 0.5) == doctest::Approx(-1.0));
}

TEST_CASE("fit_lasso: decoupled coordinates on an orthonormal design") {
  RngStream rng(101);
  const Index n = 32, p = 8;
  Matrix X = orthonormal_design(n, p, rng);
  Vector y = sample_standard_normal(rng, n) * 2.0;
  double lambda = 0.15;
  LassoFit fit = fit_lasso(X, y, lambda);
  Vector corr = X.transpose() * y / static_cast<double>(n);
  for (Index j = 0; j < p; ++j) {
    CHECK(fit.beta[j] ==
          doctest::Approx(soft_threshold(corr[j], lambda)).epsilon(1e-8));
  }
}

TEST_CASE("fit_lasso: null solution at and beyond lambda_max") {
  RngStream rng(7);
  Matrix X = gaussian_design(30, 10, rng);
  Vector y = sample_standard_normal(rng, 30);
  double lmax = lasso_lambda_max(X, y);
  CHECK(fit_lasso(X, y, lmax).beta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit_lasso(X, y, 2 * lmax).beta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit_lasso: matches the grid-refinement oracle on a p=2 toy") {
  RngStream rng(55);
  const Index n = 20;
  Matrix X(n, 2);
  for (Index i = 0; i < n; ++i) {
    double z = rng.next_normal();
    X(i, 0) = z;
    X(i, 1) = 0.7 * z + 0.5 * rng.next_normal();  // correlated pair
  }
  Vector beta_true(2);
  beta_true << 1.2, -0.6;
  Vector y = X * beta_true + sample_standard_normal(rng, n) * 0.3;
  double lambda = 0.1;

  LassoFit fit = fit_lasso(X, y, lambda);
  Vector ref = oracle::grid_minimize(
      [&](const Vector& b) { return lasso_objective(X, y, lambda, b); }, 2,
      5.0);
  CHECK((fit.beta - ref).cwiseAbs().maxCoeff() < 2e-3);
}

TEST_CASE("fit_lasso: certificates and recomputable objective") {
  RngStream rng(31);
  for (int c = 0; c < 20; ++c) {
    RngStream inst = rng.split(c);
    Index n = 10 + static_cast<Index>(inst.next_u64() % 11);  // 10..20
    Index p = 1 + static_cast<Index>(inst.next_u64() % 3);
    Matrix X = gaussian_design(n, p, inst);
    Vector y = sample_standard_normal(inst, n);
    double lambda = 0.02 + 0.3 * inst.next_uniform();
    LassoFit fit = fit_lasso(X, y, lambda);
    CHECK(fit.kkt_gap <= 1e-6);
    CHECK(std::abs(fit.objective - lasso_objective(X, y, lambda, fit.beta)) <
          1e-10);

    SubgradientCertificate cert = extract_subgradient(fit, X, y);
    CHECK(cert.kappa.cwiseAbs().maxCoeff() <= 1.0 + 1e-6);
    for (Index j = 0; j < p; ++j) {
      if (fit.beta[j] != 0.0) {
        CHECK(cert.kappa[j] ==
              doctest::Approx(fit.beta[j] > 0 ? 1.0 : -1.0).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("extract_subgradient: null fit and error path") {
  RngStream rng(8);
  Matrix X = gaussian_design(25, 5, rng);
  Vector y = sample_standard_normal(rng, 25);
  double lambda = 2.0 * lasso_lambda_max(X, y);
  LassoFit fit = fit_lasso(X, y, lambda);
  SubgradientCertificate cert = extract_subgradient(fit, X, y);
  Vector expect = X.transpose() * y / (25.0 * lambda);
  CHECK((cert.kappa - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(cert.kappa.cwiseAbs().maxCoeff() <= 1.0);

  fit.lambda = 0.0;
  CHECK_THROWS_AS(extract_subgradient(fit, X, y), InputError);
}

TEST_CASE("fit_lasso: objective is monotone over full sweeps") {
  RngStream rng(77);
  Matrix X = gaussian_design(40, 12, rng);
  Vector beta_true = Vector::Zero(12);
  beta_true.head(3) << 1.0, -2.0, 0.5;
  Vector y = X * beta_true + sample_standard_normal(rng, 40);
  CdOptions opts;
  opts.record_objective = true;
  LassoFit fit = fit_lasso(X, y, 0.05, opts);
  REQUIRE(fit.objective_trace.size() >= 2);
  for (size_t k = 1; k < fit.objective_trace.size(); ++k) {
    CHECK(fit.objective_trace[k] <= fit.objective_trace[k - 1] + 1e-12);
  }
}

TEST_CASE("fit_lasso: error paths") {
  RngStream rng(3);
  Matrix X = gaussian_design(12, 3, rng);
  Vector y = sample_standard_normal(rng, 12);
  Matrix Xbad = X;
  Xbad(4, 1) = std::nan("");
  CHECK_THROWS_AS(fit_lasso(Xbad, y, 0.1), InputError);

  CdOptions tiny;
  tiny.max_sweeps = 1;
  tiny.tol_kkt = 1e-14;
  try {
    fit_lasso(X, y, 0.01, tiny);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.kkt_gap() > 0.0);
  }
}

TEST_CASE("lasso_path: warm-started path matches cold starts") {
  RngStream rng(99);
  Matrix X = gaussian_design(50, 15, rng);
  Vector beta_true = Vector::Zero(15);
  beta_true.head(4) << 2.0, -1.0, 0.8, 1.5;
  Vector y = X * beta_true + sample_standard_normal(rng, 50);
  Vector grid = lasso_lambda_grid(lasso_lambda_max(X, y), 25, 0.05);
  std::vector<Vector> path = lasso_path(X, y, grid);
  for (Index k = 0; k < grid.size(); ++k) {
    LassoFit cold = fit_lasso(X, y, grid[k]);
    double warm_obj =
        lasso_objective(X, y, grid[k], path[static_cast<size_t>(k)]);
    CHECK(std::abs(warm_obj - cold.objective) < 1e-8);
  }
}

TEST_CASE("fit_lasso_cv: pure noise pushes lambda into the top half") {
  int top_half = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(500 + t);
    Matrix X = gaussian_design(60, 20, rng);
    Vector y = sample_standard_normal(rng, 60);
    Vector grid = lasso_lambda_grid(lasso_lambda_max(X, y), 50, 0.01);
    LassoCvResult cv = fit_lasso_cv(X, y, 10, grid, rng.split(1));
    Index pos = 0;
    for (Index k = 0; k < grid.size(); ++k) {
      if (grid[k] == cv.lambda) pos = k;
    }
    if (pos < grid.size() / 2) ++top_half;
  }
  CHECK(top_half >= 90);
}

TEST_CASE("fit_lasso_cv: argmin property and determinism") {
  RngStream rng(2718);
  Matrix X = gaussian_design(200, 10, rng);
  Vector beta_true = Vector::Zero(10);
  beta_true.head(3) << 1.5, -2.0, 1.0;
  Vector y = X * beta_true + sample_standard_normal(rng, 200);
  Vector grid = lasso_lambda_grid(lasso_lambda_max(X, y), 40, 0.01);
  LassoCvResult cv = fit_lasso_cv(X, y, 10, grid, RngStream(12));
  // chosen error is the minimum, hence no worse than lambda_max's
  double chosen = cv.cv_error.minCoeff();
  CHECK(chosen <= cv.cv_error[0]);

  LassoCvResult cv2 = fit_lasso_cv(X, y, 10, grid, RngStream(12));
  CHECK(cv.lambda == cv2.lambda);
  CHECK((cv.fit.beta - cv2.fit.beta).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(fit_lasso_cv(X.topRows(5), y.head(5), 10, grid,
                               RngStream(1)),
                  ConfigError);
}

TEST_CASE("fit_scaled_lasso: recovers a unit noise scale") {
  int inside = 0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(9000 + r);
    Matrix X = gaussian_design(100, 500, rng);
    Vector y = sample_standard_normal(rng, 100);  // beta0 = 0, sigma = 1
    ScaledLassoFit sl = fit_scaled_lasso(X, y);
    if (sl.sigma_hat >= 0.8 && sl.sigma_hat <= 1.2) ++inside;
    CHECK(std::abs(sl.sigma_hat -
                   (y - X * sl.fit.beta).norm() / std::sqrt(100.0)) <= 1e-6);
  }
  CHECK(inside >= 95);
}

TEST_CASE("fit_scaled_lasso: scale equivariance") {
  RngStream rng(404);
  Matrix X = gaussian_design(80, 30, rng);
  Vector beta_true = Vector::Zero(30);
  beta_true.head(2) << 1.0, -0.5;
  Vector y = X * beta_true + sample_standard_normal(rng, 80);
  ScaledLassoFit base = fit_scaled_lasso(X, y);
  const double c = 3.0;
  ScaledLassoFit scaled = fit_scaled_lasso(X, (c * y).eval());
  CHECK(scaled.sigma_hat == doctest::Approx(c * base.sigma_hat).epsilon(1e-4));
  CHECK((scaled.fit.beta - c * base.fit.beta).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("fit_scaled_lasso: null model tracks the sample variance") {
  for (int r = 0; r < 10; ++r) {
    RngStream rng(7100 + r);
    Matrix X = gaussian_design(120, 60, rng);
    Vector y = 1.3 * sample_standard_normal(rng, 120);
    ScaledLassoFit sl = fit_scaled_lasso(X, y);
    double sample_var = y.squaredNorm() / 120.0;
    CHECK(sl.sigma_hat * sl.sigma_hat >= 0.85 * sample_var * (1 - 0.15));
    CHECK(std::abs(sl.sigma_hat * sl.sigma_hat - sample_var) <
          0.15 * sample_var);
  }
}

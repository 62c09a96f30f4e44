#include <doctest.h>

#include <cmath>

#include "hdi/glm.hpp"
#include "hdi/inference.hpp"
#include "oracles.hpp"

using namespace hdi;

namespace {

Matrix gaussian_design(Index n, Index p, RngStream& rng) {
  Matrix X(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) X(i, j) = rng.next_normal();
  }
  return X;
}

Vector bernoulli_response(const Matrix& X, const Vector& beta,
                          RngStream& rng) {
  Vector a = X * beta;
  Vector y(X.rows());
  for (Index i = 0; i < X.rows(); ++i) {
    double p = 1.0 / (1.0 + std::exp(-a[i]));
    y[i] = rng.next_uniform() < p ? 1.0 : 0.0;
  }
  return y;
}

GlmOptions no_intercept_opts() {
  GlmOptions opts;
  opts.intercept = false;
  return opts;
}

}  // namespace

TEST_CASE("logistic family: point values") {
  LossFamily fam = logistic_family();
  CHECK(fam.rho_ddot(1.0, 0.0) == doctest::Approx(0.25));
  CHECK(fam.rho_ddot(0.0, 0.0) == doctest::Approx(0.25));
  CHECK(fam.rho_dot(1.0, 0.0) == doctest::Approx(-0.5));
  CHECK(fam.rho_dot(0.0, 0.0) == doctest::Approx(0.5));
  // overflow-safe far out
  CHECK(std::isfinite(fam.rho(1.0, 700.0)));
  CHECK(std::isfinite(fam.rho(0.0, -700.0)));
}

TEST_CASE("families: finite-difference consistency and convexity") {
  const double h = 1e-5;
  for (const LossFamily& fam : {logistic_family(), squared_error_family()}) {
    for (double y : {0.0, 1.0}) {
      for (double a = -3.0; a <= 3.0; a += 0.25) {
        double fd1 = (fam.rho(y, a + h) - fam.rho(y, a - h)) / (2.0 * h);
        CHECK(std::abs(fd1 - fam.rho_dot(y, a)) < 1e-8);
        double fd2 =
            (fam.rho_dot(y, a + h) - fam.rho_dot(y, a - h)) / (2.0 * h);
        CHECK(std::abs(fd2 - fam.rho_ddot(y, a)) < 1e-6);
        CHECK(fam.rho_ddot(y, a) >= 0.0);
      }
    }
  }
}

TEST_CASE("fit_glm_lasso: squared error reduces to the lasso") {
  RngStream rng(61);
  const Index n = 50, p = 12;
  Matrix X = gaussian_design(n, p, rng);
  Vector beta0 = Vector::Zero(p);
  beta0.head(3) << 1.0, -0.5, 0.8;
  Vector y = X * beta0 + sample_standard_normal(rng, n);
  double lambda = 0.1;

  CdOptions tight{1e-12, 1e-10, 100000, false};
  GlmOptions gopts = no_intercept_opts();
  gopts.cd = tight;
  gopts.tol_kkt = 1e-9;
  GlmFit gfit = fit_glm_lasso(X, y, squared_error_family(), lambda, gopts);
  LassoFit lfit = fit_lasso(X, y, lambda, tight);
  CHECK((gfit.beta - lfit.beta).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(gfit.n_irls <= 2);  // quadratic loss: one inner solve suffices
}

TEST_CASE("fit_glm_lasso: null model at and beyond lambda_max") {
  RngStream rng(62);
  const Index n = 80, p = 10;
  Matrix X = gaussian_design(n, p, rng);
  Vector beta0 = Vector::Zero(p);
  beta0[0] = 1.0;
  Vector y = bernoulli_response(X, beta0, rng);
  LossFamily fam = logistic_family();

  for (bool icpt : {false, true}) {
    GlmOptions opts;
    opts.intercept = icpt;
    double lmax = glm_lambda_max(X, y, fam, icpt);
    GlmFit fit = fit_glm_lasso(X, y, fam, lmax * 1.0001, opts);
    CHECK(fit.beta.cwiseAbs().maxCoeff() == 0.0);
    if (icpt) {
      double ybar = y.mean();
      CHECK(fit.intercept ==
            doctest::Approx(std::log(ybar / (1.0 - ybar))).epsilon(1e-4));
    }
  }
}

TEST_CASE("fit_glm_lasso: matches the grid oracle on a p=2 logistic toy") {
  RngStream rng(63);
  const Index n = 40;
  Matrix X(n, 2);
  for (Index i = 0; i < n; ++i) {
    double z = rng.next_normal();
    X(i, 0) = z;
    X(i, 1) = 0.6 * z + 0.8 * rng.next_normal();
  }
  Vector beta0(2);
  beta0 << 1.5, -1.0;
  Vector y = bernoulli_response(X, beta0, rng);
  LossFamily fam = logistic_family();
  double lambda = 0.05;

  GlmFit fit = fit_glm_lasso(X, y, fam, lambda, no_intercept_opts());
  auto objective = [&](const Vector& b) {
    double v = 0.0;
    Vector a = X * b;
    for (Index i = 0; i < n; ++i) v += fam.rho(y[i], a[i]);
    return v / static_cast<double>(n) + lambda * b.lpNorm<1>();
  };
  Vector ref = oracle::grid_minimize(objective, 2, 8.0);
  CHECK((fit.beta - ref).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("fit_glm_lasso: objective trace is monotone") {
  RngStream rng(64);
  const Index n = 60, p = 15;
  Matrix X = gaussian_design(n, p, rng);
  Vector beta0 = Vector::Zero(p);
  beta0.head(3) << 2.0, -1.0, 1.0;
  Vector y = bernoulli_response(X, beta0, rng);
  GlmFit fit =
      fit_glm_lasso(X, y, logistic_family(), 0.02, no_intercept_opts());
  REQUIRE(fit.objective_trace.size() >= 2);
  for (size_t k = 1; k < fit.objective_trace.size(); ++k) {
    CHECK(fit.objective_trace[k] <= fit.objective_trace[k - 1] + 1e-10);
  }
  CHECK(fit.kkt_gap <= 1e-6);
}

TEST_CASE("fit_glm_lasso: separation is flagged") {
  const Index n = 20;
  Matrix X(n, 1);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    X(i, 0) = i < n / 2 ? -1.0 - 0.05 * i : 1.0 + 0.05 * i;
    y[i] = i < n / 2 ? 0.0 : 1.0;  // perfectly separated
  }
  CHECK_THROWS_AS(
      fit_glm_lasso(X, y, logistic_family(), 0.0, no_intercept_opts()),
      SolverError);
}

TEST_CASE("fit_glm_lasso: input validation") {
  RngStream rng(65);
  Matrix X = gaussian_design(20, 4, rng);
  Vector y = Vector::Zero(20);
  y[3] = 0.5;  // not a 0/1 response
  CHECK_THROWS_AS(fit_glm_lasso(X, y, logistic_family(), 0.1), InputError);
}

TEST_CASE("glm_sigma_hat_matrix: known forms and two-path agreement") {
  RngStream rng(66);
  const Index n = 30, p = 6;
  Matrix X = gaussian_design(n, p, rng);
  Vector beta0 = Vector::Zero(p);
  Vector y = bernoulli_response(X, beta0, rng);

  GlmFit null_fit;
  null_fit.beta = Vector::Zero(p);
  null_fit.has_intercept = false;

  // squared error: exactly the Gram matrix
  Matrix gram = X.transpose() * X / static_cast<double>(n);
  Matrix s_sq = glm_sigma_hat_matrix(X, y, null_fit, squared_error_family());
  CHECK((s_sq - gram).cwiseAbs().maxCoeff() < 1e-14);

  // logistic at beta = 0: a quarter of the Gram matrix
  Matrix s_log = glm_sigma_hat_matrix(X, y, null_fit, logistic_family());
  CHECK((s_log - 0.25 * gram).cwiseAbs().maxCoeff() < 1e-14);

  // direct summation path
  LossFamily fam = logistic_family();
  GlmFit fit = fit_glm_lasso(X, y, fam, 0.05, no_intercept_opts());
  Matrix direct = Matrix::Zero(p, p);
  Vector a = X * fit.beta;
  for (Index i = 0; i < n; ++i) {
    direct += fam.rho_ddot(y[i], a[i]) * X.row(i).transpose() * X.row(i);
  }
  direct /= static_cast<double>(n);
  Matrix assembled = glm_sigma_hat_matrix(X, y, fit, fam);
  CHECK((assembled - direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("desparsify_glm: squared error reproduces the linear estimate") {
  RngStream rng(67);
  const Index n = 60, p = 14;
  Matrix X = gaussian_design(n, p, rng);
  Vector beta0 = Vector::Zero(p);
  beta0.head(2) << 1.0, -1.0;
  Vector y = X * beta0 + sample_standard_normal(rng, n);
  double lambda = 0.08;

  CdOptions tight{1e-12, 1e-10, 100000, false};
  GlmOptions gopts = no_intercept_opts();
  gopts.cd = tight;
  gopts.tol_kkt = 1e-9;

  NodewiseOptions nw;
  NodewisePrecision theta = nodewise_from_design(X, 0.15, nw);

  GlmFit gfit = fit_glm_lasso(X, y, squared_error_family(), lambda, gopts);
  GlmDesparsifiedFit gdsp =
      desparsify_glm(X, y, gfit, squared_error_family(), theta);

  LassoFit lfit = fit_lasso(X, y, lambda, tight);
  DesparsifiedFit ldsp = desparsify(X, y, lfit, theta, 1.0);
  CHECK((gdsp.b - ldsp.b).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("desparsify_glm: sandwich variance recomputation") {
  RngStream rng(68);
  const Index n = 70, p = 12;
  Matrix X = gaussian_design(n, p, rng);
  Vector beta0 = Vector::Zero(p);
  beta0.head(2) << 1.0, 0.5;
  Vector y = bernoulli_response(X, beta0, rng);
  LossFamily fam = logistic_family();
  GlmFit fit = fit_glm_lasso(X, y, fam, 0.05, no_intercept_opts());
  Matrix Xw = glm_weighted_design(X, y, fit, fam);
  NodewisePrecision theta = nodewise_from_design(Xw, 0.1);
  GlmDesparsifiedFit dsp = desparsify_glm(X, y, fit, fam, theta);

  Vector a = X * fit.beta;
  Vector rd(n);
  for (Index i = 0; i < n; ++i) rd[i] = fam.rho_dot(y[i], a[i]);
  Matrix K = Matrix::Zero(p, p);
  for (Index i = 0; i < n; ++i) {
    K += rd[i] * rd[i] * X.row(i).transpose() * X.row(i);
  }
  K /= static_cast<double>(n);
  for (Index j = 0; j < p; ++j) {
    double expect = theta.theta.row(j) * K * theta.theta.row(j).transpose();
    CHECK(std::abs(dsp.sigma_hat[j] * dsp.sigma_hat[j] - expect) < 1e-10);
    CHECK(dsp.sigma_hat[j] > 0.0);
  }
  // two-sided p-values from the z-scores
  for (Index j = 0; j < p; ++j) {
    CHECK(dsp.pvalues[j] >= 0.0);
    CHECK(dsp.pvalues[j] <= 1.0);
  }
}

TEST_CASE("fit_glm_lasso_cv: deterministic and on-grid") {
  RngStream rng(69);
  const Index n = 60, p = 10;
  Matrix X = gaussian_design(n, p, rng);
  Vector beta0 = Vector::Zero(p);
  beta0.head(2) << 1.5, -1.0;
  Vector y = bernoulli_response(X, beta0, rng);
  LossFamily fam = logistic_family();
  GlmOptions opts = no_intercept_opts();
  Vector grid =
      lasso_lambda_grid(glm_lambda_max(X, y, fam, false), 30, 0.05);
  GlmCvResult a = fit_glm_lasso_cv(X, y, fam, 5, grid, RngStream(4), opts);
  GlmCvResult b = fit_glm_lasso_cv(X, y, fam, 5, grid, RngStream(4), opts);
  CHECK(a.lambda == b.lambda);
  CHECK((a.fit.beta - b.fit.beta).cwiseAbs().maxCoeff() == 0.0);
  bool on_grid = false;
  for (Index k = 0; k < grid.size(); ++k) on_grid |= (grid[k] == a.lambda);
  CHECK(on_grid);
}

#include <doctest.h>

#include <cmath>

#include "hdi/cholesky.hpp"
#include "hdi/gaussian.hpp"
#include "hdi/rng.hpp"
#include "oracles.hpp"

using namespace hdi;

namespace {

Matrix toeplitz(Index p, double rho) {
  Matrix S(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index k = 0; k < p; ++k) {
      S(j, k) = std::pow(rho, std::abs(static_cast<double>(j - k)));
    }
  }
  return S;
}

}  // namespace

TEST_CASE("cholesky: identity and diagonal") {
  Matrix I = Matrix::Identity(2, 2);
  CHECK((cholesky_lower(I) - I).cwiseAbs().maxCoeff() == 0.0);

  Matrix D(2, 2);
  D << 4, 0, 0, 9;
  Matrix L = cholesky_lower(D);
  CHECK(L(0, 0) == doctest::Approx(2.0));
  CHECK(L(1, 1) == doctest::Approx(3.0));
  CHECK(L(0, 1) == 0.0);
  CHECK(L(1, 0) == 0.0);
}

TEST_CASE("cholesky: toeplitz reconstruction") {
  Matrix S = toeplitz(3, 0.9);
  Matrix L = cholesky_lower(S);
  CHECK((L * L.transpose() - S).cwiseAbs().maxCoeff() < 1e-10);
  // larger instance for the general reconstruction bound
  Matrix S2 = toeplitz(40, 0.9);
  Matrix L2 = cholesky_lower(S2);
  CHECK((L2 * L2.transpose() - S2).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("cholesky: failure reports the pivot") {
  Matrix S(2, 2);
  S << 1, 2, 2, 1;  // indefinite
  try {
    cholesky_lower(S);
    FAIL("expected FactorizationError");
  } catch (const FactorizationError& e) {
    CHECK(e.pivot() == 1);
  }

  Matrix A(2, 2);
  A << 1, 0.5, 0.2, 1;  // asymmetric
  CHECK_THROWS_AS(cholesky_lower(A), InputError);
}

TEST_CASE("normal quantile: reference values and domain") {
  CHECK(std_normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  // Frozen against the bisection oracle below.
  CHECK(std_normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(std::abs(std_normal_quantile(0.841345) - 1.0) < 1e-4);
  CHECK_THROWS_AS(std_normal_quantile(0.0), InputError);
  CHECK_THROWS_AS(std_normal_quantile(1.0), InputError);
  CHECK_THROWS_AS(std_normal_quantile(-0.3), InputError);
}

TEST_CASE("normal quantile: agrees with the erf-series bisection oracle") {
  for (double q : {0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.975, 0.999}) {
    double ref = oracle::normal_quantile_bisect(q);
    CHECK(std::abs(std_normal_quantile(q) - ref) < 1e-6);
  }
}

TEST_CASE("normal quantile: strictly increasing, cdf round trip") {
  double prev = -1e300;
  for (int k = 1; k <= 1000; ++k) {
    double x = std_normal_quantile(static_cast<double>(k) / 1001.0);
    CHECK(x > prev);
    prev = x;
  }
  for (double x = -5.0; x <= 5.0; x += 0.25) {
    CHECK(std::abs(std_normal_quantile(normal_cdf(x)) - x) < 1e-6);
  }
  // |Phi(quantile(q)) - q| stays tiny across the range used by p-values
  for (double q : {1e-12, 1e-8, 1e-4, 0.3, 0.9999}) {
    CHECK(std::abs(normal_cdf(std_normal_quantile(q)) - q) <= 1e-9 * 1.0);
  }
}

TEST_CASE("rng: determinism and splitting") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(42);
  Vector v1 = sample_standard_normal(c, 8);
  RngStream d(42);
  Vector v2 = sample_standard_normal(d, 8);
  CHECK((v1 - v2).cwiseAbs().maxCoeff() == 0.0);

  // Substreams differ from the parent and from each other.
  RngStream root(7);
  CHECK(root.split(0).next_u64() != root.split(1).next_u64());
  // Splitting is insensitive to parent consumption.
  RngStream r1(7);
  r1.next_u64();
  CHECK(r1.split(3).next_u64() == RngStream(7).split(3).next_u64());
}

TEST_CASE("sample_gaussian_vector: identity factor returns the raw draws") {
  RngStream rng(11);
  Vector z = sample_standard_normal(rng, 6);
  RngStream rng2(11);
  Vector v = sample_gaussian_vector(rng2, Matrix::Identity(6, 6));
  CHECK((z - v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample_gaussian_vector: empirical covariance matches") {
  const Index p = 4;
  Matrix S = toeplitz(p, 0.9);
  Matrix L = cholesky_lower(S);
  RngStream rng(2024);
  const int m = 50000;
  Matrix acc = Matrix::Zero(p, p);
  for (int i = 0; i < m; ++i) {
    Vector v = sample_gaussian_vector(rng, L);
    acc += v * v.transpose();
  }
  acc /= static_cast<double>(m);
  CHECK((acc - S).cwiseAbs().maxCoeff() < 0.03);
}

TEST_CASE("sample_scaled_t5: unit variance, zero mean, deterministic") {
  RngStream rng(5);
  Vector x = sample_scaled_t5(rng, 100000);
  double mean = x.mean();
  double var = (x.array() - mean).square().sum() / (x.size() - 1.0);
  CHECK(std::abs(var - 1.0) < 0.03);
  CHECK(std::abs(mean) < 0.02);

  RngStream r1(9), r2(9);
  Vector a = sample_scaled_t5(r1, 16);
  Vector b = sample_scaled_t5(r2, 16);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

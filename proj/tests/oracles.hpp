// Independent reference computations for the test suite. Everything here
// is deliberately written against the definitions, not against the library
// code paths it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hdi/types.hpp"

namespace oracle {

// erf by Taylor series (accurate to ~1e-12 for |x| <= 2.5, which covers
// every probability the tests probe).
inline double erf_series(double x) {
  double term = x;
  double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / static_cast<double>(n);
    double add = term / static_cast<double>(2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
  }
  return sum * 2.0 / std::sqrt(M_PI);
}

inline double normal_cdf_series(double x) {
  return 0.5 * (1.0 + erf_series(x / std::sqrt(2.0)));
}

// Quantile by bisection on the series cdf.
inline double normal_quantile_bisect(double q) {
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (normal_cdf_series(mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Grid-refinement minimizer of a convex objective over p coordinates.
// Each round lays a 21-point lattice per coordinate over the current box,
// keeps the best lattice point and shrinks the box around it; with a
// convex objective the optimum stays inside every shrunken box.
template <class Objective>
hdi::Vector grid_minimize(const Objective& f, int p, double radius,
                          int rounds = 12) {
  const int side = 21;
  hdi::Vector center = hdi::Vector::Zero(p);
  double h = radius;
  hdi::Vector best = center;
  for (int round = 0; round < rounds; ++round) {
    double fbest = std::numeric_limits<double>::infinity();
    std::vector<int> idx(static_cast<size_t>(p), 0);
    hdi::Vector point(p);
    for (;;) {
      for (int d = 0; d < p; ++d) {
        point[d] =
            center[d] + h * (2.0 * idx[static_cast<size_t>(d)] / (side - 1.0) -
                             1.0);
      }
      double v = f(point);
      if (v < fbest) {
        fbest = v;
        best = point;
      }
      int d = 0;
      while (d < p && ++idx[static_cast<size_t>(d)] == side) {
        idx[static_cast<size_t>(d)] = 0;
        ++d;
      }
      if (d == p) break;
    }
    center = best;
    h *= 0.2;  // new box spans two old lattice steps
  }
  return best;
}

// Two-sided Kolmogorov-Smirnov distance against a cdf.
template <class Cdf>
double ks_distance(std::vector<double> sample, const Cdf& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (size_t i = 0; i < sample.size(); ++i) {
    double F = cdf(sample[i]);
    d = std::max(d, std::abs(F - static_cast<double>(i + 1) / n));
    d = std::max(d, std::abs(F - static_cast<double>(i) / n));
  }
  return d;
}

// Stephens' approximation to the KS critical value at level 0.01.
inline double ks_critical_01(std::size_t n) {
  double sn = std::sqrt(static_cast<double>(n));
  return 1.628 / (sn + 0.12 + 0.11 / sn);
}

}  // namespace oracle

#pragma once

#include <string>
#include <vector>

#include "hdi/inference.hpp"
#include "hdi/rng.hpp"
#include "hdi/types.hpp"

namespace hdi {

struct AdjustedPvalues {
  Vector raw;
  Vector adjusted;
  std::string method;
};

/// Holm step-down adjustment. Sorted ascending (ties by original index),
/// adjusted_(k) = max_{i<=k} min(1, (m-i+1) p_(i)), mapped back.
AdjustedPvalues holm_adjust(const Vector& pvalues);

/// Monte-Carlo test of the maximum studentized chi-square statistic over a
/// coordinate group, using the known covariance of the Gaussian part.
struct MaxStatTest {
  std::vector<Index> group;
  double observed = 0.0;  // max_j n b_j^2 / (sigma^2 omega_jj)
  int mc_draws = 0;
  double pvalue = 1.0;    // (1 + #{draws >= observed}) / (1 + mc_draws)
};

MaxStatTest max_stat_group_test(const DesparsifiedFit& fit,
                                const Matrix& omega,
                                const std::vector<Index>& group, int mc_draws,
                                RngStream rng);

}  // namespace hdi

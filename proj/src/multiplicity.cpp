#include "hdi/multiplicity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hdi/cholesky.hpp"

namespace hdi {

AdjustedPvalues holm_adjust(const Vector& pvalues) {
  const Index m = pvalues.size();
  for (Index j = 0; j < m; ++j) {
    if (!(pvalues[j] >= 0.0 && pvalues[j] <= 1.0)) {
      throw InputError("holm_adjust: p-value outside [0,1]");
    }
  }
  std::vector<Index> order(static_cast<size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return pvalues[a] < pvalues[b];  // stable: ties keep original index order
  });

  AdjustedPvalues out;
  out.raw = pvalues;
  out.adjusted.resize(m);
  out.method = "holm";
  double running = 0.0;
  for (Index k = 0; k < m; ++k) {
    Index j = order[static_cast<size_t>(k)];
    double scaled = std::min(1.0, static_cast<double>(m - k) * pvalues[j]);
    running = std::max(running, scaled);
    out.adjusted[j] = running;
  }
  return out;
}

MaxStatTest max_stat_group_test(const DesparsifiedFit& fit,
                                const Matrix& omega,
                                const std::vector<Index>& group, int mc_draws,
                                RngStream rng) {
  if (group.empty()) throw InputError("max_stat_group_test: empty group");
  if (mc_draws < 1) throw InputError("max_stat_group_test: mc_draws < 1");
  const Index g = static_cast<Index>(group.size());
  const double n = static_cast<double>(fit.n);
  const double var = fit.sigma_eps * fit.sigma_eps;

  Matrix omega_gg(g, g);
  for (Index a = 0; a < g; ++a) {
    for (Index c = 0; c < g; ++c) {
      omega_gg(a, c) = omega(group[static_cast<size_t>(a)],
                             group[static_cast<size_t>(c)]);
    }
  }
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(omega_gg,
                                             Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8) {
      throw InputError(
          "max_stat_group_test: restricted omega is not PSD within "
          "tolerance");
    }
  }

  MaxStatTest out;
  out.group = group;
  out.mc_draws = mc_draws;
  Vector diag(g);
  for (Index a = 0; a < g; ++a) {
    Index j = group[static_cast<size_t>(a)];
    diag[a] = omega(j, j);
    double stat = n * fit.b[j] * fit.b[j] / (var * omega(j, j));
    out.observed = std::max(out.observed, stat);
  }

  Matrix L;
  double jitter = 0.0;
  for (;;) {
    try {
      Matrix S = omega_gg;
      if (jitter > 0.0) S.diagonal().array() += jitter;
      L = cholesky_lower(S);
      break;
    } catch (const FactorizationError&) {
      jitter = (jitter == 0.0) ? 1e-12 : jitter * 10.0;
      if (jitter > 1e-6) {
        throw FactorizationError(
            "max_stat_group_test: omega_GG not factorizable within max "
            "jitter 1e-6",
            -1);
      }
    }
  }

  long count = 0;
  Vector z(g);
  for (int d = 0; d < mc_draws; ++d) {
    for (Index a = 0; a < g; ++a) z[a] = rng.next_normal();
    Vector w = L.triangularView<Eigen::Lower>() * z;  // cov omega_gg
    double stat = 0.0;
    for (Index a = 0; a < g; ++a) {
      stat = std::max(stat, w[a] * w[a] / diag[a]);
    }
    if (stat >= out.observed) ++count;
  }
  out.pvalue = (1.0 + static_cast<double>(count)) /
               (1.0 + static_cast<double>(mc_draws));
  return out;
}

}  // namespace hdi

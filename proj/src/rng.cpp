#include "hdi/rng.hpp"

#include <algorithm>
#include <cmath>

namespace hdi {

Vector sample_standard_normal(RngStream& rng, Index len) {
  Vector z(len);
  for (Index i = 0; i < len; ++i) z[i] = rng.next_normal();
  return z;
}

Vector sample_gaussian_vector(RngStream& rng, const Matrix& chol_lower) {
  if (chol_lower.rows() != chol_lower.cols()) {
    throw InputError("sample_gaussian_vector: factor must be square");
  }
  Vector z = sample_standard_normal(rng, chol_lower.rows());
  return chol_lower.triangularView<Eigen::Lower>() * z;
}

Vector sample_scaled_t5(RngStream& rng, Index len) {
  const double scale = std::sqrt(3.0 / 5.0);
  Vector out(len);
  for (Index i = 0; i < len; ++i) {
    double num = rng.next_normal();
    double chisq = 0.0;
    for (int k = 0; k < 5; ++k) {
      double z = rng.next_normal();
      chisq += z * z;
    }
    out[i] = scale * num / std::sqrt(chisq / 5.0);
  }
  return out;
}

std::vector<Index> sample_permutation(RngStream& rng, Index n) {
  std::vector<Index> perm(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  for (Index i = n - 1; i > 0; --i) {
    Index j = static_cast<Index>(rng.next_u64() %
                                 static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  }
  return perm;
}

std::vector<Index> sample_without_replacement(RngStream& rng, Index n,
                                              Index s) {
  if (s > n) {
    throw InputError("sample_without_replacement: requested more than n");
  }
  std::vector<Index> perm = sample_permutation(rng, n);
  perm.resize(static_cast<size_t>(s));
  std::sort(perm.begin(), perm.end());
  return perm;
}

}  // namespace hdi

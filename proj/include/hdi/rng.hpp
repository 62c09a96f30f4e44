#pragma once

#include <cstdint>

#include "hdi/gaussian.hpp"
#include "hdi/types.hpp"

namespace hdi {

/// Counter-based pseudo-random stream (SplitMix64).
///
/// The state is a 64-bit Weyl counter; each output is a finalizing hash of
/// the counter, so the stream is a pure function of the seed and uses only
/// integer arithmetic — the same seed gives the same draws on every
/// platform. Substreams are derived by hashing (root seed, key) and are
/// independent of how much of the parent stream has been consumed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : root_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform draw strictly inside (0,1), 53 usable bits.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal draw via the inverse c.d.f.
  double next_normal() { return std_normal_quantile(next_uniform()); }

  /// Independent child stream; key selects the substream.
  RngStream split(std::uint64_t key) const {
    return RngStream(mix(root_ ^ mix(key + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t root_seed() const { return root_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t root_;
  std::uint64_t state_;
};

/// Vector of i.i.d. standard normals.
Vector sample_standard_normal(RngStream& rng, Index len);

/// Returns L * z with z i.i.d. standard normal, i.e. a draw from
/// N(0, L L^T) for a lower-triangular Cholesky factor L.
Vector sample_gaussian_vector(RngStream& rng, const Matrix& chol_lower);

/// i.i.d. draws from the t distribution with 5 degrees of freedom scaled
/// by sqrt(3/5) so the variance is exactly one. Each draw consumes six
/// normals: one numerator and five for the chi-square denominator.
Vector sample_scaled_t5(RngStream& rng, Index len);

/// Uniform permutation of {0, ..., n-1} (Fisher-Yates).
std::vector<Index> sample_permutation(RngStream& rng, Index n);

/// s distinct indices drawn without replacement from {0, ..., n-1},
/// returned in increasing order.
std::vector<Index> sample_without_replacement(RngStream& rng, Index n,
                                              Index s);

}  // namespace hdi

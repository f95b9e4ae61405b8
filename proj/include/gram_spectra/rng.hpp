#pragma once

#include <array>
#include <cstdint>

namespace gram_spectra::rng {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

/// Identifies one reproducible random stream: (master seed, trial index).
struct StreamKey {
  std::uint64_t master_seed = kDefaultSeed;
  std::uint64_t trial_index = 0;
};

/// SplitMix64 finalizer; used to hash stream keys into generator state.
std::uint64_t mix64(std::uint64_t x);

/// xoshiro256** seeded from a hashed StreamKey.
///
/// A generator is single-owner. Distinct keys give independent streams and the
/// same key always gives the same stream, independent of how trials are
/// scheduled across workers.
class Generator {
 public:
  explicit Generator(StreamKey key);

  std::uint64_t next_u64();

  /// Uniform on (0, 1]: exact zero is excluded, exact one is possible.
  double uniform();

 private:
  friend double standard_normal(Generator& gen);

  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// One N(0,1) draw (Marsaglia polar method).
double standard_normal(Generator& gen);

/// +1 or -1 with probability 1/2 each.
int rademacher(Generator& gen);

/// Inverse of F(u) = 1 / log(e/u): u = exp(1 - 1/q). q = 0 (or underflow)
/// maps to the smallest positive double.
double counterexample_u_from_uniform(double q);

/// One draw of U with CDF F(u) = 1 / log(e/u) on (0, 1].
double counterexample_u(Generator& gen);

/// F(u) = 1 / log(e/u) for u in (0, 1]; 0 for u <= 0 and 1 for u >= 1.
double counterexample_cdf(double u);

}  // namespace gram_spectra::rng

#include "gram_spectra/rng.hpp"

#include <cmath>
#include <limits>

namespace gram_spectra::rng {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kTrialSalt = 0xd1b54a32d192ed03ULL;

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Generator::Generator(StreamKey key) {
  // Two rounds of hashing keep nearby (seed, trial) pairs far apart.
  std::uint64_t s = mix64(key.master_seed + kGolden) ^ mix64(key.trial_index * kTrialSalt + kGolden);
  s = mix64(s);
  for (auto& word : state_) {
    s += kGolden;
    word = mix64(s);
  }
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = kGolden;
}

std::uint64_t Generator::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Generator::uniform() {
  // 53 random bits shifted by one ulp: the support is {1, ..., 2^53} / 2^53.
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double standard_normal(Generator& gen) {
  if (gen.has_cached_normal_) {
    gen.has_cached_normal_ = false;
    return gen.cached_normal_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * gen.uniform() - 1.0;
    v = 2.0 * gen.uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  gen.cached_normal_ = v * factor;
  gen.has_cached_normal_ = true;
  return u * factor;
}

int rademacher(Generator& gen) { return (gen.next_u64() >> 63) != 0 ? 1 : -1; }

double counterexample_u_from_uniform(double q) {
  if (q <= 0.0) return std::numeric_limits<double>::denorm_min();
  if (q >= 1.0) return 1.0;
  const double u = std::exp(1.0 - 1.0 / q);
  return u > 0.0 ? u : std::numeric_limits<double>::denorm_min();
}

double counterexample_u(Generator& gen) { return counterexample_u_from_uniform(gen.uniform()); }

double counterexample_cdf(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return 1.0 / (1.0 - std::log(u));
}

}  // namespace gram_spectra::rng

#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace s2p {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Deterministic, splittable generator. `split(key)` derives an independent
/// stream so that components seeded from one RunConfig::seed never share
/// state. Sampling helpers avoid std distributions, whose output is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {}

  Rng split(std::uint64_t key) const { return Rng(splitmix64(seed_ ^ splitmix64(key + 0x5132))); }
  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// RFC 4122 version-4 formatted identifier drawn from `rng`.
std::string make_uuid(Rng& rng);

}  // namespace s2p

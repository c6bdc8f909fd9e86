#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sensprune {

/// SplitMix64 finalizer. Used to derive substream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of substream `stream` under `seed`:
///   splitmix64(seed ^ splitmix64(stream + 0x9E3779B97F4A7C15)).
/// Whole-network pruning uses one substream per layer index; sweeps nest
/// substreams as (method, budget, trial).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Reproducible generator: mt19937_64 (sequence fixed by the C++ standard)
/// with hand-rolled conversions so results do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Inverse-CDF sampler over a fixed discrete distribution. Entries with zero
/// probability are never returned.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::span<const double> probabilities);

  std::size_t operator()(Rng& rng) const;
  std::size_t size() const noexcept { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
  std::size_t last_positive_ = 0;
};

}  // namespace sensprune

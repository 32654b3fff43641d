#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "multinst/core.hpp"

namespace multinst {

/// 64-bit mixing finalizer (the SplitMix64 output function). Used both as
/// the generator step and to derive independent substreams from a base seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

/// SplitMix64: a tiny counter-based generator. Substreams derived with
/// derive_stream are statistically independent, which makes parallel Monte
/// Carlo runs deterministic for a fixed (seed, stream) pair regardless of
/// how work is partitioned across threads.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1].
  double next_double_open0() { return 1.0 - next_double(); }

  /// Standard normal via Box-Muller. Draws exactly two uniforms per call so
  /// the stream position is input-independent.
  double next_normal() {
    const double u1 = next_double_open0();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

/// Deterministic substream seed for (base seed, stream tag, index).
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return mix64(seed ^ mix64(tag ^ mix64(index + 0x632BE59BD9B4E019ULL)));
}

/// Samples indices with probability proportional to a fixed non-negative
/// weight vector, by inverting the cumulative sum (with replacement).
class WeightedSampler {
 public:
  explicit WeightedSampler(std::span<const double> weights) : cumulative_(weights.size()) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (std::isnan(weights[i]) || weights[i] < 0.0) {
        throw invalid_instance_error("sampling weights must be non-negative");
      }
      total += weights[i];
      cumulative_[i] = total;
    }
    if (weights.empty() || !(total > 0.0)) {
      throw degenerate_dataset_error("cannot sample from an empty or zero-weight class");
    }
  }

  std::size_t draw(SplitMix64& rng) const {
    const double u = rng.next_double() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) {
      return cumulative_.size() - 1;
    }
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

}  // namespace multinst

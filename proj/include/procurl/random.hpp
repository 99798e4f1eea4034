#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace procurl {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent stream seed from a master seed and a stream index.
/// The mapping depends only on (master, stream), so adding streams never
/// perturbs existing ones.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream);

/// Seedable random source used throughout the library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform double in [0, 1) built from the top 53 bits of the engine output.
  double uniform();
  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);
  double normal();
  /// Index drawn proportionally to non-negative weights.
  std::size_t categorical(std::span<const double> weights);
  /// Index drawn with probability softmax(logits).
  std::size_t categorical_logits(std::span<const double> logits);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace procurl

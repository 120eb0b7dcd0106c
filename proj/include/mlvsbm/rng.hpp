#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace mlvsbm {

/// Deterministic counter-based generator (splitmix64, scheme "splitmix64/v1").
///
/// All sampling in the library goes through this class so that results are
/// bit-reproducible across platforms and compilers. std::<random>
/// distributions are deliberately not used (their output is
/// implementation-defined). Independent streams are derived with split(),
/// which is a pure function of the construction seed and the stream id,
/// regardless of how many draws were made.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Lemire multiply-shift reduction
  /// (bias below 2^-64, deterministic).
  std::uint64_t uniform_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn from an (unnormalized) nonnegative weight vector.
  int categorical(const Eigen::VectorXd& weights);

  /// Uniform random permutation of {0, ..., n-1} (Fisher-Yates).
  std::vector<int> permutation(int n);

  /// Independent child stream; pure function of (construction seed, id).
  Rng split(std::uint64_t stream_id) const {
    return Rng(mix(seed_ ^ mix(stream_id + 0x632BE59BD9B4E019ULL)));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace mlvsbm

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace irtcat {

/// Seedable random stream. Independent child streams are derived from a
/// (seed, path...) tuple, so a batch run yields the same numbers for
/// session i no matter which worker runs it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) { reseed(seed, {}); }

  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return Rng(seed, path);
  }

  /// Uniform in [0, 1).
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal(double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n); n must be positive.
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) { reseed(seed, path); }

  void reseed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * path.size() + 1);
    words.push_back(static_cast<std::uint32_t>(seed));
    words.push_back(static_cast<std::uint32_t>(seed >> 32));
    for (auto p : path) {
      words.push_back(static_cast<std::uint32_t>(p));
      words.push_back(static_cast<std::uint32_t>(p >> 32));
    }
    words.push_back(static_cast<std::uint32_t>(path.size()));
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
  }

  std::mt19937_64 engine_;
};

}  // namespace irtcat

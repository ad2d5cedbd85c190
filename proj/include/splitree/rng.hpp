#ifndef SPLITREE_RNG_HPP
#define SPLITREE_RNG_HPP

#include <cstdint>
#include <random>

namespace splitree {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of replicate `index` under `master`. Fixed forever: changing it breaks replay.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

/// Caller-owned random stream. Never shared between replicates.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double exponential(double rate);
  double normal();
  std::int64_t poisson(double mean);
  std::int64_t binomial(std::int64_t trials, double p);
  /// Failures before `successes` successes with success probability p.
  std::int64_t negative_binomial(std::int64_t successes, double p);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace splitree

#endif  // SPLITREE_RNG_HPP

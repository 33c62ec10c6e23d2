#pragma once

#include <cstdint>

namespace seisbed {

/// Counter-based random stream: the draw sequence is a pure function of
/// (seed, counter), so disjoint counters give independent reproducible streams
/// no matter which thread or in which order they are evaluated.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t counter);

  /// Uniform in the open interval (0,1).
  double uniform();
  /// Uniform in (a,b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  /// Standard normal (Box-Muller).
  double normal();

  std::uint64_t next_u64();

 private:
  std::uint64_t base_;
  std::uint64_t sub_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; also usable as a cheap string/config hash mixer.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace seisbed

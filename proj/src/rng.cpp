#include "seisbed/rng.hpp"

#include <cmath>

namespace seisbed {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t counter)
    : base_(splitmix64(seed ^ splitmix64(counter ^ 0x5eed0c0de5eed000ull))) {}

std::uint64_t CounterRng::next_u64() {
  return splitmix64(base_ + (++sub_) * 0x9E3779B97F4A7C15ull);
}

double CounterRng::uniform() {
  // 53-bit mantissa, offset by half an ulp so 0 and 1 are never returned.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

}  // namespace seisbed

#include "pavoc/rng.hpp"

#include <cmath>
#include <numbers>

namespace pavoc {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::next_u64() {
  // Two rounds keep (key, counter) pairs with small differences decorrelated.
  return mix64(mix64(key_) ^ (counter_++ * 0xD1B54A32D192ED03ull));
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::gaussian() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

void CounterRng::fill_gaussian(std::span<double> out) {
  for (auto& v : out) v = gaussian();
}

std::vector<double> CounterRng::gaussian_vector(std::size_t n) {
  std::vector<double> v(n);
  fill_gaussian(v);
  return v;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace pavoc

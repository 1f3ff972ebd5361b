#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pavoc {

/// Counter-based generator: the n-th output is a pure function of (key, n),
/// so a stream can be re-created at any position.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; the sine branch is cached.
  double gaussian();
  void fill_gaussian(std::span<double> out);
  std::vector<double> gaussian_vector(std::size_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Stateless 64-bit mix (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a over bytes, used to derive per-file seeds.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

}  // namespace pavoc

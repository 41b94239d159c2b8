#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

namespace rmdgraph {

/// SplitMix64 finalizer; decorrelates structured seed values.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a stage name
/// (FNV-1a of the name, mixed into the base). Every stage of a pipeline
/// draws from its own stream, so adding or reordering stages does not
/// shift the randomness seen by the others.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view stage) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : stage) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(base ^ h);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view stage,
                                 std::uint64_t index) {
  return mix64(derive_seed(base, stage) + 0x632be59bd9b4e019ULL * (index + 1));
}

/// Deterministic random source. The raw output of std::mt19937_64 is fully
/// specified by the standard; the distribution transforms below are our own,
/// so identical seeds give bit-identical streams on every platform (the
/// standard library's distribution objects make no such guarantee).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased integer in [0, n), n >= 1, by rejection.
  std::size_t index(std::size_t n) {
    const std::uint64_t span = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = span - span % n;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return static_cast<std::size_t>(x % n);
  }

  /// Standard normal draw, Box-Muller cosine branch. Two uniforms are
  /// consumed per call; no spare is cached so the stream position is a
  /// simple function of the call count.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace rmdgraph

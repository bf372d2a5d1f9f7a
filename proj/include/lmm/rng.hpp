#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace lmm {

/// SplitMix64 generator.
///
/// Every random draw in the library goes through this type so that outputs
/// are reproducible across platforms and standard-library vendors (the
/// <random> distributions are implementation-defined). Independent streams
/// are obtained with `split`, which hashes the parent seed with a stream tag.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Child stream keyed by `tag`; the parent state is not advanced.
  Rng split(std::uint64_t tag) const noexcept { return Rng(mix(state_ ^ mix(tag + 0x632be59bd9b4e019ULL))); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), rejection sampled (unbiased).
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = n == 0 ? 0 : (~std::uint64_t{0} - n + 1) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= limit) return r % n;
    }
  }

  /// Standard normal via Box-Muller; one uniform pair per draw.
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Index drawn from a categorical distribution given by `probs`.
  std::size_t categorical(std::span<const double> probs) noexcept {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t j = 0; j < probs.size(); ++j) {
      acc += probs[j];
      if (u < acc) return j;
    }
    // Rounding left u above the accumulated mass; return the last nonzero entry.
    for (std::size_t j = probs.size(); j-- > 0;)
      if (probs[j] > 0.0) return j;
    return probs.size() - 1;
  }

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Stream tags used across the library.
namespace stream {
inline constexpr std::uint64_t synth = 1;
inline constexpr std::uint64_t split = 2;
inline constexpr std::uint64_t noise = 3;
inline constexpr std::uint64_t init = 4;
inline constexpr std::uint64_t shuffle = 5;
inline constexpr std::uint64_t selftrain = 6;
}  // namespace stream

}  // namespace lmm

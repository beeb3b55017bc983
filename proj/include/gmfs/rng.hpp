#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace gmfs {

/// SplitMix64 finalizer. Used to derive independent stream seeds from keys.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a key tuple into one seed. Distinct tuples give unrelated streams,
/// which is what makes parallel sweeps schedule-independent.
constexpr std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

/// Stream tags keep streams for different purposes disjoint even when the
/// remaining key components coincide.
enum class StreamTag : std::uint64_t {
  kTrain = 1,
  kReward = 2,
  kNeighbors = 3,
  kTransition = 4,
  kInit = 5,
  kOffPolicy = 6,
  kDiagnostic = 7,
};

/// Thin wrapper over std::mt19937_64 with platform-stable uniform helpers.
/// std::uniform_real_distribution is implementation-defined, so the helpers
/// below are written out to keep results bit-identical across toolchains.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(StreamTag tag, std::initializer_list<std::uint64_t> key);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n);

  /// Inverse-CDF draw from a cumulative table whose last entry is ~1.
  std::size_t categorical_cdf(std::span<const double> cdf) {
    const double u = uniform();
    std::size_t k = 0;
    while (k + 1 < cdf.size() && u >= cdf[k]) ++k;
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gmfs

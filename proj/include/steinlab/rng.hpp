#pragma once

#include <cstdint>
#include <random>

namespace steinlab {

/// Named substreams of a master seed. Values are part of the reproducibility
/// contract: changing them changes every seeded result.
enum class Stream : std::uint64_t {
  Data = 1,
  NullSamples = 2,
  Bootstrap = 3,
  Model = 4,
  Perturbation = 5,
  Shuffle = 6,
  Probe = 7,
};

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// (master, stream, index) -> substream seed. Distinct triples give
/// unrelated seeds; the mapping is platform independent.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) + index);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                    std::uint64_t index) noexcept {
  return derive_seed(master, static_cast<std::uint64_t>(stream), index);
}

/// Seeded generator with platform-independent variates. std::mt19937_64 is
/// bit-specified by the standard; the distributions below are implemented
/// here because the standard library's are not.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, Stream stream, std::uint64_t index)
      : engine_(derive_seed(master, stream, index)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Standard normal (Box-Muller, second variate cached).
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// +1 or -1 with equal probability.
  int sign();

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace steinlab

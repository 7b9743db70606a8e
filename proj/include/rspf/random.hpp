#ifndef RSPF_RANDOM_HPP
#define RSPF_RANDOM_HPP

#include <cstdint>
#include <random>
#include <string_view>

/**
 * \file
 * \brief Seedable random source and counter-based seed derivation.
 */

namespace rspf {

/// One seedable stream of randomness.
/**
 * Every stochastic operation in the library takes a `RandomSource&` explicitly, so a filter run
 * is a pure function of its seed. The type also satisfies UniformRandomBitGenerator.
 */
class RandomSource {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit RandomSource(std::uint64_t seed) : engine_{seed} {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform draw in [0, 1).
  double uniform() { return uniform_(engine_); }

  /// Standard normal draw.
  double normal() { return normal_(engine_); }

  /// Uniform draw in [low, high).
  double uniform(double low, double high) { return low + (high - low) * uniform(); }

  /// Uniform index in {0, ..., count - 1}.
  std::size_t uniform_index(std::size_t count) {
    return std::uniform_int_distribution<std::size_t>{0, count - 1}(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Noise source that always returns the mean (zero noise). Useful for evaluating samplers.
struct ZeroNoise {
  double normal() { return 0.0; }
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

/// Derives the seed of sub-stream `counter` from `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) {
  return mix64(mix64(seed) ^ mix64(counter + 0x632be59bd9b4e019ULL));
}

/// FNV-1a hash, used to key sub-streams by name.
constexpr std::uint64_t stream_id(std::string_view name) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : name) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

/// Derives the seed of the named sub-stream of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  return derive_seed(seed, stream_id(name));
}

}  // namespace rspf

#endif

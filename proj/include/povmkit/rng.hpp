#pragma once

#include <cstdint>
#include <initializer_list>

namespace povmkit::rng {

/// Counter-based random stream: every variate is a pure function of a key
/// tuple (seed, stream, indices), so results do not depend on evaluation
/// order or worker count. The mixing core is the SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream tags keep draws for unrelated purposes on disjoint key spaces.
enum class Stream : std::uint64_t {
  SubSeed = 1,
  ObservableGen = 2,
  Settings = 3,
  ShotIdeal = 4,
  ShotReadout = 5,
  QdtIdeal = 6,
  QdtReadout = 7,
  Telegraph = 8,
  NoiseStatic = 9,
};

inline std::uint64_t keyed(std::uint64_t seed, Stream stream,
                           std::uint64_t a = 0, std::uint64_t b = 0,
                           std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ static_cast<std::uint64_t>(stream));
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return mix64(h);
}

/// Uniform double in [0, 1) with 53 bits of mantissa.
inline double uniform01(std::uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

inline double uniform01(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                        std::uint64_t b = 0, std::uint64_t c = 0) {
  return uniform01(keyed(seed, stream, a, b, c));
}

/// Derives an independent seed for a sub-experiment (repetition, module).
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
  return keyed(seed, Stream::SubSeed, index);
}

}  // namespace povmkit::rng

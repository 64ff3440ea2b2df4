#pragma once

#include <cstdint>
#include <utility>

namespace mlqmc {

// Keyed counter-mode generator built from the splitmix64 avalanche finalizer.
// Every random quantity in the library is a pure function of (key, counter),
// which is what makes replications, levels and coordinates reproducible and
// independent of thread scheduling.

inline constexpr std::uint64_t golden64 = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a child key; distinct (parent, tag) pairs give decorrelated streams.
inline constexpr std::uint64_t key_child(std::uint64_t parent, std::uint64_t tag) {
  return mix64(parent ^ (tag * 0xff51afd7ed558ccdULL + golden64));
}

// Element i of the stream named by key.
inline constexpr std::uint64_t stream_at(std::uint64_t key, std::uint64_t i) {
  return mix64(key + i * golden64);
}

// Maps a 64-bit word to [0, n) by 128-bit multiply-shift.
inline std::uint32_t bounded(std::uint64_t word, std::uint32_t n) {
  return std::uint32_t((unsigned __int128)word * n >> 64);
}

struct KeyedStream {
  std::uint64_t key = 0;
  std::uint64_t ctr = 0;

  std::uint64_t next() { return stream_at(key, ctr++); }
  std::uint32_t next_below(std::uint32_t n) { return bounded(next(), n); }
  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return double(next() >> 11) * 0x1.0p-53; }
};

// Fisher-Yates shuffle of {0..b-1} driven by the stream named by key.
inline void random_permutation(std::uint8_t* perm, std::uint32_t b, std::uint64_t key) {
  for (std::uint32_t i = 0; i < b; ++i) perm[i] = std::uint8_t(i);
  KeyedStream s{key};
  for (std::uint32_t i = b - 1; i > 0; --i) {
    std::uint32_t j = s.next_below(i + 1);
    std::swap(perm[i], perm[j]);
  }
}

}  // namespace mlqmc

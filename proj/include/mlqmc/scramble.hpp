#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace mlqmc {

// Nested (Owen-style) digit scrambling in base b, driven by a keyed counter
// PRF instead of stored permutation trees. Every permutation is addressed by
// (column key, digit level, digit prefix), so points that share a digit
// prefix see the same permutation at the next level and points that differ
// see independent ones. Columns (one per scrambled coordinate), replications
// and salts (one per multilevel level) all derive isolated keys, so no
// randomness is shared where independence is required.
struct ScrambleSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t replication = 0;
  std::uint64_t salt = 0;      // extra isolation tag, e.g. the level index
  unsigned depth = 32;         // output digits (clamped to at least the input digits)
  bool identity = false;       // test hook: pass digits through unchanged
};

inline std::uint64_t scramble_root_key(const ScrambleSpec& s) {
  return key_child(key_child(mix64(s.master_seed), s.replication), s.salt);
}

// One key per scrambled column. Distinct columns get unrelated permutation
// families even when they carry identical input digits.
inline std::uint64_t column_key(const ScrambleSpec& s, std::uint64_t column_tag) {
  return key_child(scramble_root_key(s), 0x636f6cULL ^ (column_tag << 8));
}

// Scramble numerator/b^m_in to `depth` output digits. Digits at levels
// 1..m_in pass through prefix-keyed permutations; deeper levels are fresh
// uniform digits keyed by the full input value, which matches nested
// scrambling whenever equal inputs are scrambled identically (they are) and
// distinct inputs have split at some input digit (they have).
inline double scramble_value(std::uint64_t col_key, std::uint64_t numerator, unsigned m_in,
                             std::uint32_t b, unsigned depth, bool identity = false) {
  if (b < 2) throw usage_error("scramble_value: base must be at least 2");
  if (m_in > 0 && std::pow(double(b), double(m_in)) > 9.2e18)
    throw usage_error("scramble_value: input precision overflows 64 bits");
  if (identity) return double(numerator) / std::pow(double(b), double(m_in));
  if (depth < m_in) depth = m_in;

  if (b == 2) {
    if (depth > 53) depth = 53;
    std::uint64_t out = 0;
    for (unsigned l = 1; l <= m_in; ++l) {
      std::uint64_t prefix = numerator >> (m_in - l + 1);
      std::uint64_t d = (numerator >> (m_in - l)) & 1u;
      std::uint64_t flip = stream_at(key_child(col_key, l), prefix) & 1u;
      out = (out << 1) | (d ^ flip);
    }
    if (depth > m_in) {
      unsigned tail = depth - m_in;
      std::uint64_t word = stream_at(key_child(col_key, 0x7461696cULL), numerator + 1);
      out = (out << tail) | (word >> (64 - tail));
    }
    return std::ldexp(double(out), -int(depth));
  }

  // General base: explicit per-node permutations (Fisher-Yates seeded by the
  // node key), digits accumulated from the deepest level up.
  if (b > 64) throw usage_error("scramble_value: base too large");
  unsigned max_depth = unsigned(52.0 / std::log2(double(b)));
  if (depth > std::max(max_depth, m_in)) depth = std::max(max_depth, m_in);
  std::vector<std::uint32_t> digits(depth, 0);
  std::uint64_t bpow = 1;
  for (unsigned i = 0; i < m_in; ++i) bpow *= b;
  std::uint64_t rem = numerator;
  std::uint64_t prefix = 0;
  std::uint8_t perm[64];
  for (unsigned l = 1; l <= m_in; ++l) {
    bpow /= b;
    std::uint32_t d = std::uint32_t(rem / bpow);
    rem %= bpow;
    random_permutation(perm, b, key_child(key_child(col_key, l), prefix));
    digits[l - 1] = perm[d];
    prefix = prefix * b + d;
  }
  if (depth > m_in) {
    KeyedStream tail{key_child(key_child(col_key, 0x7461696cULL), numerator + 1)};
    for (unsigned l = m_in + 1; l <= depth; ++l) digits[l - 1] = std::uint32_t(tail.next_below(b));
  }
  double x = 0;
  for (unsigned l = depth; l >= 1; --l) x = (x + digits[l - 1]) / b;
  return x;
}

// Scramble a whole column of values sharing one key (and precision m_in).
inline void scramble_column(std::uint64_t col_key, const std::uint64_t* nums, double* out,
                            std::size_t n, unsigned m_in, std::uint32_t b, unsigned depth,
                            bool identity = false) {
  if (b == 2 && !identity) {
    // Shared fast path: pre-derive level keys once.
    if (depth < m_in) depth = m_in;
    if (depth > 53) depth = 53;
    std::vector<std::uint64_t> level_key(m_in + 1);
    for (unsigned l = 1; l <= m_in; ++l) level_key[l] = key_child(col_key, l);
    std::uint64_t tail_key = key_child(col_key, 0x7461696cULL);
    unsigned tail = depth - m_in;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t numerator = nums[i];
      std::uint64_t o = 0;
      for (unsigned l = 1; l <= m_in; ++l) {
        std::uint64_t prefix = numerator >> (m_in - l + 1);
        std::uint64_t d = (numerator >> (m_in - l)) & 1u;
        o = (o << 1) | (d ^ (stream_at(level_key[l], prefix) & 1u));
      }
      if (tail) o = (o << tail) | (stream_at(tail_key, numerator + 1) >> (64 - tail));
      out[i] = std::ldexp(double(o), -int(depth));
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = scramble_value(col_key, nums[i], m_in, b, depth, identity);
}

}  // namespace mlqmc

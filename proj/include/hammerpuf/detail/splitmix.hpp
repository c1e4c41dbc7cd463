#pragma once

#include <cstdint>

namespace hammerpuf::detail {

/// Finalizer of the splitmix64 generator (Steele et al.). Bijective on
/// 64-bit words; used as the fixed mixing function for all per-cell and
/// per-measurement randomness.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Absorbs one word into a running hash. Chaining mix64 keeps every
/// coordinate order-sensitive: combine(combine(h,a),b) != combine(combine(h,b),a).
inline constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ v);
}

/// Hash of (seed, bank, row, column, parameter id). The single source of
/// per-cell randomness; identical inputs always give identical outputs.
inline constexpr std::uint64_t cell_hash(std::uint64_t seed, std::uint64_t bank,
                                         std::uint64_t row, std::uint64_t column,
                                         std::uint64_t param_id) {
  std::uint64_t h = mix64(seed);
  h = combine(h, bank);
  h = combine(h, row);
  h = combine(h, column);
  h = combine(h, param_id);
  return h;
}

/// Maps a hash word to a uniform double in the open interval (0, 1).
/// Uses the top 53 bits plus a half-step offset so 0 and 1 are unreachable,
/// keeping normal quantile transforms finite. The largest input would round
/// up to exactly 1.0, so it is clamped to the largest double below 1.
inline constexpr double to_unit_open(std::uint64_t x) {
  const double u = (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
  return u < 1.0 ? u : 1.0 - 0x1.0p-53;
}

}  // namespace hammerpuf::detail

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hammerpuf/errors.hpp"
#include "hammerpuf/geometry.hpp"

namespace hammerpuf {

enum class RhType { SSRH, DSRH };

inline std::string to_string(RhType t) {
  return t == RhType::SSRH ? "SSRH" : "DSRH";
}

inline RhType rh_type_from_string(const std::string& s) {
  if (s == "SSRH" || s == "ssrh") return RhType::SSRH;
  if (s == "DSRH" || s == "dsrh") return RhType::DSRH;
  throw ConfigError("unknown rh_type '" + s + "' (expected SSRH or DSRH)");
}

enum class RowRole { Hammer, Puf };

/// Interleaving of hammer and PUF (victim) rows for one query.
/// DSRH: H V H V ... H, every victim has both neighbors hammering.
/// SSRH: H V V H V V ... H, every victim has exactly one hammer neighbor.
struct RowPattern {
  RhType rh_type = RhType::SSRH;
  std::uint32_t start_row = 0;  // absolute row index of the first pattern row
  std::vector<RowRole> rows;    // roles of consecutive rows from start_row
  std::vector<std::uint32_t> hammer_row_indices;  // absolute
  std::vector<std::uint32_t> puf_row_indices;     // absolute

  std::uint32_t row_count() const { return static_cast<std::uint32_t>(rows.size()); }

  std::string pattern_string() const {
    std::string s;
    s.reserve(rows.size());
    for (RowRole r : rows) s.push_back(r == RowRole::Hammer ? 'H' : 'V');
    return s;
  }

  /// Absolute indices of the hammer rows adjacent to the given victim row.
  std::vector<std::uint32_t> aggressors_of(std::uint32_t victim_row) const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t h : hammer_row_indices) {
      if (h + 1 == victim_row || h == victim_row + 1) out.push_back(h);
    }
    return out;
  }
};

/// Per-row hammer access interval. Linear in the number of rows being
/// hammered in the loop; ~6 us for 2 rows, ~8 us for 17 rows.
inline double hammer_interval_seconds(std::uint32_t num_hammer_rows) {
  if (num_hammer_rows < 1) throw ConfigError("hammer row count must be >= 1");
  return (5.7333 + 0.1333 * static_cast<double>(num_hammer_rows)) * 1e-6;
}

/// Per-row access rate in 1/s.
inline double hammer_access_rate(std::uint32_t num_hammer_rows) {
  return 1.0 / hammer_interval_seconds(num_hammer_rows);
}

inline RowPattern build_row_pattern(RhType rh_type, std::uint64_t puf_size_bytes,
                                    const Geometry& geometry,
                                    std::uint32_t puf_address) {
  validate(geometry);
  if (puf_size_bytes == 0 || puf_size_bytes % geometry.row_size_bytes != 0) {
    throw ConfigError("puf_size must be a positive multiple of row_size_bytes");
  }
  const std::uint64_t victims = puf_size_bytes / geometry.row_size_bytes;

  RowPattern p;
  p.rh_type = rh_type;
  p.start_row = puf_address;
  if (rh_type == RhType::DSRH) {
    // (H V) repeated, terminated with H.
    for (std::uint64_t v = 0; v < victims; ++v) {
      p.rows.push_back(RowRole::Hammer);
      p.rows.push_back(RowRole::Puf);
    }
    p.rows.push_back(RowRole::Hammer);
  } else {
    if (victims % 2 != 0) {
      throw ConfigError(
          "SSRH requires an even number of PUF rows; requested " +
          std::to_string(victims));
    }
    // (H V V) repeated, terminated with H.
    for (std::uint64_t v = 0; v < victims / 2; ++v) {
      p.rows.push_back(RowRole::Hammer);
      p.rows.push_back(RowRole::Puf);
      p.rows.push_back(RowRole::Puf);
    }
    p.rows.push_back(RowRole::Hammer);
  }

  if (static_cast<std::uint64_t>(puf_address) + p.rows.size() >
      geometry.rows_per_bank) {
    throw ConfigError("row pattern exceeds the bank: needs " +
                      std::to_string(p.rows.size()) + " rows at row " +
                      std::to_string(puf_address) + ", bank has " +
                      std::to_string(geometry.rows_per_bank));
  }
  for (std::uint32_t i = 0; i < p.rows.size(); ++i) {
    const std::uint32_t abs_row = puf_address + i;
    if (p.rows[i] == RowRole::Hammer) {
      p.hammer_row_indices.push_back(abs_row);
    } else {
      p.puf_row_indices.push_back(abs_row);
    }
  }
  return p;
}

}  // namespace hammerpuf

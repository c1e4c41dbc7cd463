#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "hammerpuf/errors.hpp"

namespace hammerpuf {

/// Physical shape of the simulated DRAM region.
struct Geometry {
  std::uint32_t banks = 1;
  std::uint32_t rows_per_bank = 128;
  std::uint32_t row_size_bytes = 4096;

  std::uint64_t row_bits() const {
    return static_cast<std::uint64_t>(row_size_bytes) * 8;
  }

  std::uint64_t total_cells() const {
    return static_cast<std::uint64_t>(banks) * rows_per_bank * row_bits();
  }

  bool operator==(const Geometry&) const = default;
};

inline void validate(const Geometry& g) {
  if (g.banks < 1) throw ConfigError("geometry.banks must be >= 1");
  if (g.rows_per_bank < 3) throw ConfigError("geometry.rows_per_bank must be >= 3");
  if (g.row_size_bytes < 64 || (g.row_size_bytes & (g.row_size_bytes - 1)) != 0) {
    throw ConfigError(
        "geometry.row_size_bytes must be >= 64 and a power of two");
  }
}

inline void to_json(nlohmann::json& j, const Geometry& g) {
  j = nlohmann::json{{"banks", g.banks},
                     {"rows_per_bank", g.rows_per_bank},
                     {"row_size_bytes", g.row_size_bytes}};
}

inline void from_json(const nlohmann::json& j, Geometry& g) {
  j.at("banks").get_to(g.banks);
  j.at("rows_per_bank").get_to(g.rows_per_bank);
  j.at("row_size_bytes").get_to(g.row_size_bytes);
}

}  // namespace hammerpuf

#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "hammerpuf/detail/sha256.hpp"
#include "hammerpuf/errors.hpp"
#include "hammerpuf/geometry.hpp"
#include "hammerpuf/row_pattern.hpp"

namespace hammerpuf {

/// The query parameters: hammering pattern type, region, initial values,
/// hammering duration, and operating temperature. Defaults reproduce the
/// reference configuration (SSRH, 128 KB, IVs 0x55/0xAA, 120 s, 40 C).
struct PufConfig {
  RhType rh_type = RhType::SSRH;
  std::uint32_t puf_address = 0;       // first pattern row
  std::uint64_t puf_size = 131072;     // bytes of PUF rows
  std::uint8_t hammer_row_iv = 0x55;
  std::uint8_t puf_row_iv = 0xAA;
  double rh_time = 120.0;              // seconds of hammering
  double temperature_C = 40.0;

  std::uint64_t puf_bits() const { return puf_size * 8; }

  bool operator==(const PufConfig&) const = default;
};

inline void validate(const PufConfig& c, const Geometry& geometry) {
  if (c.rh_time <= 0) throw ConfigError("rh_time must be > 0");
  if (c.temperature_C < 0 || c.temperature_C > 100)
    throw ConfigError("temperature_C must be within [0, 100]");
  if (c.puf_size < 4096)
    throw ConfigError("puf_size must be at least 4096 bytes");
  build_row_pattern(c.rh_type, c.puf_size, geometry, c.puf_address);
}

inline void to_json(nlohmann::json& j, const PufConfig& c) {
  j = nlohmann::json{{"rh_type", to_string(c.rh_type)},
                     {"puf_address", c.puf_address},
                     {"puf_size", c.puf_size},
                     {"hammer_row_iv", c.hammer_row_iv},
                     {"puf_row_iv", c.puf_row_iv},
                     {"rh_time_s", c.rh_time},
                     {"temperature_C", c.temperature_C}};
}

inline void from_json(const nlohmann::json& j, PufConfig& c) {
  c.rh_type = rh_type_from_string(j.at("rh_type").get<std::string>());
  j.at("puf_address").get_to(c.puf_address);
  j.at("puf_size").get_to(c.puf_size);
  c.hammer_row_iv = static_cast<std::uint8_t>(j.at("hammer_row_iv").get<int>());
  c.puf_row_iv = static_cast<std::uint8_t>(j.at("puf_row_iv").get<int>());
  j.at("rh_time_s").get_to(c.rh_time);
  j.at("temperature_C").get_to(c.temperature_C);
}

/// Hash of the canonical config JSON. Identifies the measurement setup
/// without tying it to a particular device.
inline std::string config_fingerprint(const PufConfig& c) {
  return detail::sha256_hex(nlohmann::json(c).dump());
}

}  // namespace hammerpuf

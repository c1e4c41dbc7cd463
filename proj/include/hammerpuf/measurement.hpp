#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hammerpuf/cells.hpp"
#include "hammerpuf/detail/hex.hpp"
#include "hammerpuf/errors.hpp"
#include "hammerpuf/puf_config.hpp"
#include "hammerpuf/version.hpp"

namespace hammerpuf {

/// Readout of the PUF rows after one query, row-major over the victim rows.
struct Measurement {
  std::string device_id;
  PufConfig config;
  std::uint64_t measurement_seed = 0;
  bool decay_only = false;
  std::vector<std::uint8_t> readout;  // puf_size bytes
  std::string created_at;             // empty when unstamped

  int readout_bit(std::uint64_t index) const {
    return (readout[index / 8] >> (7 - (index % 8))) & 1;
  }

  std::uint64_t flip_count() const {
    std::uint64_t n = 0;
    const std::uint8_t iv = config.puf_row_iv;
    for (std::uint8_t byte : readout) n += __builtin_popcount(byte ^ iv);
    return n;
  }
};

inline nlohmann::json measurement_to_json(const Measurement& m) {
  nlohmann::json j{{"format_version", kFormatVersion},
                   {"device_id", m.device_id},
                   {"config", m.config},
                   {"measurement_seed", m.measurement_seed},
                   {"decay_only", m.decay_only},
                   {"flip_count", m.flip_count()},
                   {"readout_hex", detail::to_hex(m.readout)}};
  if (!m.created_at.empty()) j["created_at"] = m.created_at;
  return j;
}

inline Measurement measurement_from_json(const nlohmann::json& j) {
  if (!j.contains("format_version") ||
      j.at("format_version").get<int>() != kFormatVersion)
    throw ConfigError("measurement: unknown format_version");
  Measurement m;
  j.at("device_id").get_to(m.device_id);
  m.config = j.at("config").get<PufConfig>();
  j.at("measurement_seed").get_to(m.measurement_seed);
  if (j.contains("decay_only")) j.at("decay_only").get_to(m.decay_only);
  if (j.contains("created_at")) j.at("created_at").get_to(m.created_at);
  m.readout = detail::from_hex(j.at("readout_hex").get<std::string>());
  if (m.readout.size() != m.config.puf_size)
    throw ConfigError("measurement: readout length does not match puf_size");
  if (j.contains("flip_count") &&
      j.at("flip_count").get<std::uint64_t>() != m.flip_count())
    throw ConfigError("measurement: stored flip_count is inconsistent");
  return m;
}

}  // namespace hammerpuf

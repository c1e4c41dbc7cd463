#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hammerpuf/cells.hpp"
#include "hammerpuf/detail/hex.hpp"
#include "hammerpuf/detail/sha256.hpp"
#include "hammerpuf/detail/splitmix.hpp"
#include "hammerpuf/errors.hpp"
#include "hammerpuf/measurement.hpp"
#include "hammerpuf/version.hpp"

namespace hammerpuf {

/// Code-offset construction over a repetition code. Flip bitmaps are sparse
/// (~3% ones), so raw cell bits carry too little entropy per position: any
/// sparse readout would majority-decode to the enrolled key, and the mask
/// alone would leak it. Each code position therefore takes the XOR of
/// fold_width distinct cells, which drives the per-position bias close to
/// 1/2 while keeping position selection independent of the secret.
struct FeParams {
  std::uint32_t key_bits = 128;
  std::uint32_t repetition = 7;   // odd
  std::uint32_t enroll_count = 5;
  std::uint32_t fold_width = 32;  // cells XORed per code position
  std::uint64_t fe_seed = 0;

  std::uint64_t derived_bits() const {
    return static_cast<std::uint64_t>(repetition) * key_bits;
  }
  std::uint64_t cells_needed() const { return derived_bits() * fold_width; }

  bool operator==(const FeParams&) const = default;
};

inline void validate(const FeParams& p, std::uint64_t puf_bits) {
  if (p.repetition < 3 || p.repetition % 2 == 0)
    throw ConfigError("fe_params.repetition must be odd and >= 3");
  if (p.key_bits == 0 || p.key_bits % 8 != 0)
    throw ConfigError("fe_params.key_bits must be a positive multiple of 8");
  if (p.enroll_count == 0)
    throw ConfigError("fe_params.enroll_count must be >= 1");
  if (p.fold_width == 0) throw ConfigError("fe_params.fold_width must be >= 1");
  if (p.cells_needed() > puf_bits) {
    throw ConfigError("fe_params need " + std::to_string(p.cells_needed()) +
                      " cells but the PUF region has " +
                      std::to_string(puf_bits));
  }
}

inline void to_json(nlohmann::json& j, const FeParams& p) {
  j = nlohmann::json{{"key_bits", p.key_bits},
                     {"repetition", p.repetition},
                     {"enroll_count", p.enroll_count},
                     {"fold_width", p.fold_width},
                     {"fe_seed", p.fe_seed}};
}

inline void from_json(const nlohmann::json& j, FeParams& p) {
  j.at("key_bits").get_to(p.key_bits);
  j.at("repetition").get_to(p.repetition);
  j.at("enroll_count").get_to(p.enroll_count);
  j.at("fold_width").get_to(p.fold_width);
  j.at("fe_seed").get_to(p.fe_seed);
}

/// Public enrollment output. Reveals nothing useful without a measurement
/// from the enrolled device; key_check is a one-way commitment to the key.
struct HelperData {
  FeParams fe_params;
  std::vector<std::uint64_t> positions;  // sorted, distinct cell indices
  std::vector<std::uint8_t> mask;        // derived_bits() bits, MSB-first
  std::string key_check_hex;             // SHA-256 of the key
  std::string config_fingerprint;
};

/// Per-position majority over the measurements' readout bits; even-count
/// ties resolve to the initial value bit.
inline std::vector<std::uint8_t> majority_vector(
    const std::vector<Measurement>& measurements) {
  if (measurements.empty())
    throw ConfigError("majority_vector needs at least 1 measurement");
  const Measurement& first = measurements[0];
  for (const Measurement& m : measurements) {
    if (m.device_id != first.device_id || !(m.config == first.config))
      throw ConfigError("majority_vector: measurements must share device and config");
  }
  const std::size_t bytes = first.readout.size();
  std::vector<std::uint8_t> out(bytes, 0);
  std::vector<std::uint16_t> ones(8, 0);
  const std::size_t n = measurements.size();
  for (std::size_t byte = 0; byte < bytes; ++byte) {
    ones.assign(8, 0);
    for (const Measurement& m : measurements) {
      const std::uint8_t b = m.readout[byte];
      for (int j = 0; j < 8; ++j) ones[j] += (b >> (7 - j)) & 1;
    }
    std::uint8_t merged = 0;
    for (int j = 0; j < 8; ++j) {
      const std::size_t twice = 2 * ones[j];
      int bit;
      if (twice > n) {
        bit = 1;
      } else if (twice < n) {
        bit = 0;
      } else {
        bit = initial_bit(first.config.puf_row_iv, static_cast<std::uint64_t>(j));
      }
      merged |= static_cast<std::uint8_t>(bit << (7 - j));
    }
    out[byte] = merged;
  }
  return out;
}

namespace detail {

inline int bit_at(const std::vector<std::uint8_t>& bytes, std::uint64_t index) {
  return (bytes[index / 8] >> (7 - (index % 8))) & 1;
}

inline void set_bit(std::vector<std::uint8_t>& bytes, std::uint64_t index, int bit) {
  if (bit) {
    bytes[index / 8] |= static_cast<std::uint8_t>(0x80u >> (index % 8));
  } else {
    bytes[index / 8] &= static_cast<std::uint8_t>(~(0x80u >> (index % 8)));
  }
}

/// Distinct pseudorandom cell indices from fe_seed, sorted ascending.
inline std::vector<std::uint64_t> draw_positions(const FeParams& params,
                                                 std::uint64_t puf_bits) {
  const std::uint64_t need = params.cells_needed();
  std::unordered_set<std::uint64_t> seen;
  std::vector<std::uint64_t> out;
  out.reserve(need);
  std::uint64_t h = mix64(params.fe_seed);
  std::uint64_t counter = 0;
  while (out.size() < need) {
    const std::uint64_t candidate = combine(h, counter++) % puf_bits;
    if (seen.insert(candidate).second) out.push_back(candidate);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// XOR-folds the readout at the selected positions into one bit per code
/// position: group g covers positions [g*fold, (g+1)*fold).
inline std::vector<std::uint8_t> derive_bits(const std::vector<std::uint8_t>& readout,
                                             const std::vector<std::uint64_t>& positions,
                                             const FeParams& params) {
  const std::uint64_t groups = params.derived_bits();
  std::vector<std::uint8_t> out((groups + 7) / 8, 0);
  for (std::uint64_t g = 0; g < groups; ++g) {
    int acc = 0;
    const std::uint64_t base = g * params.fold_width;
    for (std::uint32_t i = 0; i < params.fold_width; ++i) {
      acc ^= bit_at(readout, positions[base + i]);
    }
    set_bit(out, g, acc);
  }
  return out;
}

inline std::vector<std::uint8_t> random_key(std::uint32_t key_bits,
                                            std::uint64_t rng_seed) {
  std::vector<std::uint8_t> key(key_bits / 8);
  std::uint64_t h = mix64(rng_seed ^ 0x6b65792d62697473ULL);
  for (std::size_t i = 0; i < key.size(); ++i) {
    h = mix64(h);
    key[i] = static_cast<std::uint8_t>(h >> 56);
  }
  return key;
}

}  // namespace detail

/// Enrollment: draws a fresh key, encodes it with the repetition code, and
/// publishes mask = codeword XOR folded-majority-reference plus a hash
/// commitment to the key.
inline std::pair<std::vector<std::uint8_t>, HelperData> enroll(
    const std::vector<Measurement>& measurements, const FeParams& params,
    std::uint64_t rng_seed) {
  if (measurements.empty()) throw ConfigError("enroll needs measurements");
  const Measurement& first = measurements[0];
  validate(params, first.config.puf_bits());
  if (params.enroll_count != measurements.size()) {
    throw ConfigError("enroll: fe_params.enroll_count is " +
                      std::to_string(params.enroll_count) + " but " +
                      std::to_string(measurements.size()) +
                      " measurements were given");
  }
  const std::vector<std::uint8_t> reference = majority_vector(measurements);

  HelperData helper;
  helper.fe_params = params;
  helper.positions = detail::draw_positions(params, first.config.puf_bits());
  helper.config_fingerprint = config_fingerprint(first.config);

  const std::vector<std::uint8_t> key = detail::random_key(params.key_bits, rng_seed);
  const std::vector<std::uint8_t> derived =
      detail::derive_bits(reference, helper.positions, params);

  const std::uint64_t nbits = params.derived_bits();
  helper.mask.assign((nbits + 7) / 8, 0);
  for (std::uint64_t d = 0; d < nbits; ++d) {
    const int key_bit = detail::bit_at(key, d / params.repetition);
    detail::set_bit(helper.mask, d, key_bit ^ detail::bit_at(derived, d));
  }
  const detail::Sha256Digest digest = detail::sha256(key);
  helper.key_check_hex = detail::to_hex(digest.data(), digest.size());
  return {key, helper};
}

/// Reproduction: folds the fresh measurement, removes the mask, majority-
/// decodes each repetition block, and accepts only if the hash commitment
/// matches. nullopt signals a failed reconstruction (wrong device or too
/// much noise), distinct from configuration errors.
inline std::optional<std::vector<std::uint8_t>> reconstruct(
    const Measurement& measurement, const HelperData& helper) {
  const FeParams& params = helper.fe_params;
  validate(params, measurement.config.puf_bits());
  if (config_fingerprint(measurement.config) != helper.config_fingerprint) {
    throw ConfigError(
        "reconstruct: measurement config does not match helper data");
  }
  if (helper.positions.size() != params.cells_needed())
    throw ConfigError("reconstruct: helper position count mismatch");

  const std::vector<std::uint8_t> derived =
      detail::derive_bits(measurement.readout, helper.positions, params);

  std::vector<std::uint8_t> key(params.key_bits / 8, 0);
  for (std::uint32_t b = 0; b < params.key_bits; ++b) {
    int ones = 0;
    for (std::uint32_t r = 0; r < params.repetition; ++r) {
      const std::uint64_t d = static_cast<std::uint64_t>(b) * params.repetition + r;
      ones += detail::bit_at(derived, d) ^ detail::bit_at(helper.mask, d);
    }
    detail::set_bit(key, b, ones * 2 > static_cast<int>(params.repetition));
  }
  const detail::Sha256Digest digest = detail::sha256(key);
  if (detail::to_hex(digest.data(), digest.size()) != helper.key_check_hex) {
    return std::nullopt;
  }
  return key;
}

/// Probability that a repetition-rho block decodes wrongly when each
/// position is independently in error with probability p.
inline double repetition_block_failure(double p, std::uint32_t rho) {
  double total = 0.0;
  for (std::uint32_t j = rho / 2 + 1; j <= rho; ++j) {
    double c = 1.0;
    for (std::uint32_t i = 1; i <= j; ++i) {
      c = c * static_cast<double>(rho - j + i) / static_cast<double>(i);
    }
    total += c * std::pow(p, j) * std::pow(1.0 - p, rho - j);
  }
  return total;
}

inline nlohmann::json helper_to_json(const HelperData& h) {
  nlohmann::json deltas = nlohmann::json::array();
  std::uint64_t prev = 0;
  for (std::size_t i = 0; i < h.positions.size(); ++i) {
    deltas.push_back(i == 0 ? h.positions[0] : h.positions[i] - prev);
    prev = h.positions[i];
  }
  return nlohmann::json{{"format_version", kFormatVersion},
                        {"fe_params", h.fe_params},
                        {"positions_delta", deltas},
                        {"mask_hex", detail::to_hex(h.mask)},
                        {"key_check_hex", h.key_check_hex},
                        {"config_fingerprint", h.config_fingerprint}};
}

inline HelperData helper_from_json(const nlohmann::json& j) {
  if (!j.contains("format_version") ||
      j.at("format_version").get<int>() != kFormatVersion)
    throw ConfigError("helper data: unknown format_version");
  HelperData h;
  h.fe_params = j.at("fe_params").get<FeParams>();
  std::uint64_t acc = 0;
  bool first = true;
  for (const auto& d : j.at("positions_delta")) {
    const std::uint64_t delta = d.get<std::uint64_t>();
    if (first) {
      acc = delta;
      first = false;
    } else {
      if (delta == 0) throw ConfigError("helper data: positions not strictly increasing");
      acc += delta;
    }
    h.positions.push_back(acc);
  }
  h.mask = detail::from_hex(j.at("mask_hex").get<std::string>());
  j.at("key_check_hex").get_to(h.key_check_hex);
  j.at("config_fingerprint").get_to(h.config_fingerprint);
  return h;
}

}  // namespace hammerpuf

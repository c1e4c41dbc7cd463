#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "hammerpuf/detail/normal.hpp"
#include "hammerpuf/detail/sha256.hpp"
#include "hammerpuf/detail/splitmix.hpp"
#include "hammerpuf/errors.hpp"
#include "hammerpuf/geometry.hpp"
#include "hammerpuf/model_params.hpp"
#include "hammerpuf/version.hpp"

namespace hammerpuf {

namespace param_id {
inline constexpr std::uint64_t kRetention = 1;
inline constexpr std::uint64_t kSusceptibilityGate = 2;
inline constexpr std::uint64_t kSusceptibilityValue = 3;
inline constexpr std::uint64_t kJitter = 4;
}  // namespace param_id

/// Immutable simulated DRAM device. All per-cell physical parameters are
/// pure functions of (device_seed, bank, row, column, parameter id); rows
/// touched by queries are cached on first use.
class DramDevice {
 public:
  struct RowParams {
    std::vector<double> retention_log;   // ln seconds at 40 C
    std::vector<double> susceptibility;  // 0 for non-susceptible cells
  };

  DramDevice(std::uint64_t device_seed, Geometry geometry, ModelParams params)
      : device_seed_(device_seed),
        geometry_(geometry),
        params_(params),
        cache_(std::make_unique<Cache>()) {
    validate(geometry_);
    validate(params_);
  }

  std::uint64_t device_seed() const { return device_seed_; }
  const Geometry& geometry() const { return geometry_; }
  const ModelParams& params() const { return params_; }

  /// ln of the cell's 40 C retention time in seconds.
  double retention_log_at(std::uint32_t bank, std::uint32_t row,
                          std::uint64_t column) const {
    const double z = detail::inverse_normal_cdf(detail::to_unit_open(
        detail::cell_hash(device_seed_, bank, row, column, param_id::kRetention)));
    return params_.retention_log_mean + params_.retention_log_sd * z;
  }

  /// Hammer susceptibility; exactly 0 for cells outside the susceptible
  /// fraction, lognormal otherwise.
  double susceptibility_at(std::uint32_t bank, std::uint32_t row,
                           std::uint64_t column) const {
    const double gate = detail::to_unit_open(detail::cell_hash(
        device_seed_, bank, row, column, param_id::kSusceptibilityGate));
    if (gate >= params_.susceptible_fraction) return 0.0;
    const double z = detail::inverse_normal_cdf(detail::to_unit_open(
        detail::cell_hash(device_seed_, bank, row, column,
                          param_id::kSusceptibilityValue)));
    return std::exp(params_.susceptibility_log_mean +
                    params_.susceptibility_log_sd * z);
  }

  double retention_log(std::uint64_t cell) const {
    check_cell(cell);
    return retention_log_at(cell_bank(cell), cell_row(cell), cell_column(cell));
  }

  double susceptibility(std::uint64_t cell) const {
    check_cell(cell);
    return susceptibility_at(cell_bank(cell), cell_row(cell), cell_column(cell));
  }

  /// Retention scaled by the temperature model: the decay rate doubles
  /// every temp_doubling_degC above the 40 C reference.
  double retention_time(std::uint64_t cell, double temperature_C) const {
    return std::exp(retention_log(cell)) * temperature_factor(temperature_C);
  }

  /// Multiplier on retention time at the given temperature.
  double temperature_factor(double temperature_C) const {
    if (temperature_C < 0.0 || temperature_C > 100.0)
      throw ConfigError("temperature_C must be within [0, 100]");
    return std::exp2(-(temperature_C - 40.0) / params_.temp_doubling_degC);
  }

  /// Cached per-cell parameters of one row. The returned reference stays
  /// valid for the device's lifetime.
  const RowParams& row_params(std::uint32_t bank, std::uint32_t row) const {
    if (bank >= geometry_.banks || row >= geometry_.rows_per_bank)
      throw std::out_of_range("row_params: bank/row out of range");
    const std::uint64_t key = (static_cast<std::uint64_t>(bank) << 32) | row;
    {
      std::shared_lock lock(cache_->mutex);
      auto it = cache_->rows.find(key);
      if (it != cache_->rows.end()) return *it->second;
    }
    auto fresh = std::make_unique<RowParams>(derive_row(bank, row));
    std::unique_lock lock(cache_->mutex);
    auto [it, inserted] = cache_->rows.try_emplace(key, std::move(fresh));
    return *it->second;
  }

  std::uint32_t cell_bank(std::uint64_t cell) const {
    return static_cast<std::uint32_t>(cell / geometry_.row_bits() /
                                      geometry_.rows_per_bank);
  }
  std::uint32_t cell_row(std::uint64_t cell) const {
    return static_cast<std::uint32_t>(cell / geometry_.row_bits() %
                                      geometry_.rows_per_bank);
  }
  std::uint64_t cell_column(std::uint64_t cell) const {
    return cell % geometry_.row_bits();
  }

  nlohmann::json descriptor_json() const {
    return nlohmann::json{{"format_version", kFormatVersion},
                          {"device_seed", device_seed_},
                          {"geometry", geometry_},
                          {"model_params", params_}};
  }

  /// Stable identifier: leading 16 hex digits of the SHA-256 of the
  /// canonical descriptor.
  std::string device_id() const {
    return detail::sha256_hex(descriptor_json().dump()).substr(0, 16);
  }

 private:
  struct Cache {
    mutable std::shared_mutex mutex;
    std::map<std::uint64_t, std::unique_ptr<RowParams>> rows;
  };

  void check_cell(std::uint64_t cell) const {
    if (cell >= geometry_.total_cells())
      throw std::out_of_range("cell index out of range");
  }

  RowParams derive_row(std::uint32_t bank, std::uint32_t row) const {
    const std::uint64_t n = geometry_.row_bits();
    RowParams rp;
    rp.retention_log.resize(n);
    rp.susceptibility.resize(n);
    for (std::uint64_t col = 0; col < n; ++col) {
      rp.retention_log[col] = retention_log_at(bank, row, col);
      rp.susceptibility[col] = susceptibility_at(bank, row, col);
    }
    return rp;
  }

  std::uint64_t device_seed_;
  Geometry geometry_;
  ModelParams params_;
  std::unique_ptr<Cache> cache_;
};

/// Loads a device descriptor previously produced by descriptor_json().
inline DramDevice device_from_json(const nlohmann::json& j) {
  if (!j.contains("format_version") || j.at("format_version").get<int>() != kFormatVersion)
    throw ConfigError("device descriptor: unknown format_version");
  return DramDevice(j.at("device_seed").get<std::uint64_t>(),
                    j.at("geometry").get<Geometry>(),
                    j.at("model_params").get<ModelParams>());
}

}  // namespace hammerpuf

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hammerpuf/cells.hpp"
#include "hammerpuf/device.hpp"
#include "hammerpuf/measurement.hpp"
#include "hammerpuf/puf_config.hpp"
#include "hammerpuf/row_pattern.hpp"

namespace hammerpuf {

/// One hammering neighbor of a victim cell: its access rate and whether the
/// aggressor cell in the same column currently holds charge.
struct Aggressor {
  double access_rate = 0.0;  // row activations per second
  bool charged = false;
};

namespace detail {

/// The flip law. A cell flips when combined leakage outpaces the query
/// duration: base decay rate (jittered, temperature-scaled retention) plus
/// the disturbance rate reaches 1/rh_time.
inline bool flip_rate_check(double retention_log, double susceptibility,
                            double jitter, double temp_factor,
                            double weighted_access_rate, double inv_rh_time) {
  const double retention = std::exp(retention_log) * temp_factor;
  const double base_rate = 1.0 / (retention * jitter);
  const double hammer_rate = susceptibility * weighted_access_rate;
  return base_rate + hammer_rate >= inv_rh_time;
}

/// Per-measurement lognormal jitter factor for one cell.
inline double jitter_factor(const ModelParams& params, std::uint64_t measurement_seed,
                            std::uint32_t bank, std::uint32_t row,
                            std::uint64_t column) {
  if (params.noise_log_sd == 0.0) return 1.0;
  const double z = inverse_normal_cdf(to_unit_open(
      cell_hash(measurement_seed, bank, row, column, param_id::kJitter)));
  return std::exp(params.noise_log_sd * z);
}

}  // namespace detail

/// Decides whether one charged cell flips during a query. Uncharged cells
/// never flip; charged aggressor cells disturb less (factor alpha).
inline bool flip_decision(const DramDevice& device, std::uint64_t cell,
                          const PufConfig& config,
                          const std::vector<Aggressor>& aggressors,
                          double jitter) {
  if (jitter <= 0.0) throw ConfigError("jitter must be > 0");
  if (!initial_charged(config.puf_row_iv, cell)) return false;
  const double alpha = device.params().charged_aggressor_factor;
  double weighted = 0.0;
  for (const Aggressor& a : aggressors) {
    weighted += a.access_rate * (a.charged ? alpha : 1.0);
  }
  return detail::flip_rate_check(
      device.retention_log(cell), device.susceptibility(cell), jitter,
      device.temperature_factor(config.temperature_C), weighted,
      1.0 / config.rh_time);
}

namespace detail {

inline Measurement simulate_impl(const DramDevice& device, const PufConfig& config,
                                 std::uint64_t measurement_seed, bool decay_only) {
  const Geometry& geom = device.geometry();
  validate(config, geom);
  const RowPattern pattern =
      build_row_pattern(config.rh_type, config.puf_size, geom, config.puf_address);
  const ModelParams& params = device.params();

  const double temp_factor = device.temperature_factor(config.temperature_C);
  const double inv_rh_time = 1.0 / config.rh_time;
  const double access_rate =
      hammer_access_rate(static_cast<std::uint32_t>(pattern.hammer_row_indices.size()));
  const std::uint64_t row_bits = geom.row_bits();
  constexpr std::uint32_t kBank = 0;  // the pattern always lives in bank 0

  // Charge states and per-column-parity disturbance weights repeat with the
  // byte-periodic polarity layout, so 8 entries cover every column.
  bool victim_charged[8];
  double kappa[8];
  for (int j = 0; j < 8; ++j) {
    victim_charged[j] = initial_charged(config.puf_row_iv, j);
    kappa[j] = initial_charged(config.hammer_row_iv, j)
                   ? params.charged_aggressor_factor
                   : 1.0;
  }
  bool any_charged = false;
  for (int j = 0; j < 8; ++j) any_charged |= victim_charged[j];

  Measurement m;
  m.device_id = device.device_id();
  m.config = config;
  m.measurement_seed = measurement_seed;
  m.decay_only = decay_only;
  m.readout.assign(config.puf_size, config.puf_row_iv);

  if (!any_charged) return m;  // nothing can flip

  const bool use_jitter = params.noise_log_sd != 0.0;
  for (std::uint64_t v = 0; v < pattern.puf_row_indices.size(); ++v) {
    const std::uint32_t row = pattern.puf_row_indices[v];
    const std::size_t n_aggressors = pattern.aggressors_of(row).size();
    const DramDevice::RowParams& rp = device.row_params(kBank, row);
    double rate_weight[8];
    for (int j = 0; j < 8; ++j) {
      rate_weight[j] = decay_only
                           ? 0.0
                           : static_cast<double>(n_aggressors) * access_rate * kappa[j];
    }
    std::uint8_t* out = m.readout.data() + v * geom.row_size_bytes;
    for (std::uint64_t col = 0; col < row_bits; ++col) {
      const int j = static_cast<int>(col % 8);
      if (!victim_charged[j]) continue;
      double jitter = 1.0;
      if (use_jitter) {
        const double z = inverse_normal_cdf(to_unit_open(
            cell_hash(measurement_seed, kBank, row, col, param_id::kJitter)));
        jitter = std::exp(params.noise_log_sd * z);
      }
      if (flip_rate_check(rp.retention_log[col], rp.susceptibility[col], jitter,
                          temp_factor, rate_weight[j], inv_rh_time)) {
        out[col / 8] ^= static_cast<std::uint8_t>(0x80u >> j);
      }
    }
  }
  return m;
}

}  // namespace detail

/// Runs one full query: initialize rows from IVs, hammer for rh_time with
/// refresh disabled, read the PUF rows back.
inline Measurement simulate_query(const DramDevice& device, const PufConfig& config,
                                  std::uint64_t measurement_seed) {
  return detail::simulate_impl(device, config, measurement_seed, false);
}

/// Same pipeline with hammering disabled: flips come from decay alone.
inline Measurement simulate_decay_only(const DramDevice& device,
                                       const PufConfig& config,
                                       std::uint64_t measurement_seed) {
  return detail::simulate_impl(device, config, measurement_seed, true);
}

}  // namespace hammerpuf

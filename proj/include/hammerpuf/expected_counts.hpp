#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <utility>

#include "hammerpuf/cells.hpp"
#include "hammerpuf/detail/normal.hpp"
#include "hammerpuf/geometry.hpp"
#include "hammerpuf/model_params.hpp"
#include "hammerpuf/puf_config.hpp"
#include "hammerpuf/row_pattern.hpp"

namespace hammerpuf {

/// Closed-form population expectations of the flip model. The calibration
/// search runs on these instead of Monte-Carlo simulation: they are smooth,
/// deterministic, and a few orders of magnitude faster.
class AnalyticModel {
 public:
  explicit AnalyticModel(const ModelParams& params) : p_(params) {}

  /// Probability that one charged cell with total weighted aggressor access
  /// rate `weighted_rate` flips within rh_time at the given temperature.
  double flip_probability(double rh_time, double temperature_C,
                          double weighted_rate) const {
    const double sd_tot = std::hypot(p_.retention_log_sd, p_.noise_log_sd);
    const double a = (std::log(rh_time) + temp_shift(temperature_C) -
                      p_.retention_log_mean) / sd_tot;
    const double p_decay = detail::normal_cdf(a);
    if (p_.susceptible_fraction <= 0.0 || weighted_rate <= 0.0) return p_decay;

    const double ln_rt = std::log(weighted_rate * rh_time);
    double p_susc = 0.0;
    const int n = kSusceptibilityNodes;
    const double dz = 16.0 / (n - 1);
    for (int i = 0; i < n; ++i) {
      const double z = -8.0 + i * dz;
      const double ln_u = p_.susceptibility_log_mean + p_.susceptibility_log_sd * z + ln_rt;
      double p_cell;
      if (ln_u >= 0.0) {
        p_cell = 1.0;  // disturbance alone reaches 1/rh_time
      } else {
        const double stretch = -std::log1p(-std::exp(ln_u));
        p_cell = detail::normal_cdf(a + stretch / sd_tot);
      }
      p_susc += phi(z) * p_cell * dz;
    }
    return (1.0 - p_.susceptible_fraction) * p_decay +
           p_.susceptible_fraction * p_susc;
  }

  /// First and second moments of the per-measurement flip probability over
  /// the cell population (measurement-to-measurement variation comes from
  /// jitter). Feed them to jintra_from_moments.
  std::pair<double, double> flip_moments(double rh_time, double temperature_C,
                                         double weighted_rate) const {
    const double base = std::log(rh_time) + temp_shift(temperature_C) -
                        p_.retention_log_mean;
    auto moments_at_stretch = [&](double stretch) {
      double e1 = 0.0, e2 = 0.0;
      const int n = kRetentionNodes;
      const double dz = 16.0 / (n - 1);
      for (int i = 0; i < n; ++i) {
        const double z = -8.0 + i * dz;
        const double m = (base + stretch - p_.retention_log_sd * z) /
                         std::max(p_.noise_log_sd, 1e-12);
        const double pc = detail::normal_cdf(m);
        const double w = phi(z) * dz;
        e1 += w * pc;
        e2 += w * pc * pc;
      }
      return std::pair<double, double>{e1, e2};
    };

    const auto [e1_0, e2_0] = moments_at_stretch(0.0);
    if (p_.susceptible_fraction <= 0.0 || weighted_rate <= 0.0)
      return {e1_0, e2_0};

    const double ln_rt = std::log(weighted_rate * rh_time);
    double e1_s = 0.0, e2_s = 0.0;
    const int n = kSusceptibilityNodes;
    const double dz = 16.0 / (n - 1);
    for (int i = 0; i < n; ++i) {
      const double z = -8.0 + i * dz;
      const double ln_u = p_.susceptibility_log_mean + p_.susceptibility_log_sd * z + ln_rt;
      double e1, e2;
      if (ln_u >= 0.0) {
        e1 = 1.0;
        e2 = 1.0;
      } else {
        const double stretch = -std::log1p(-std::exp(ln_u));
        std::tie(e1, e2) = moments_at_stretch(stretch);
      }
      const double w = phi(z) * dz;
      e1_s += w * e1;
      e2_s += w * e2;
    }
    const double f = p_.susceptible_fraction;
    return {(1.0 - f) * e1_0 + f * e1_s, (1.0 - f) * e2_0 + f * e2_s};
  }

  /// Expected flip count of a full query (pass weighted aggressor rates of
  /// zero via decay_only to model refresh-disabled decay alone).
  double expected_count(const PufConfig& config, const Geometry& geometry,
                        bool decay_only = false) const {
    const auto per_class = class_rates(config, geometry, decay_only);
    const double cells_per_class = static_cast<double>(config.puf_bits()) / 8.0;
    double total = 0.0;
    for (int j = 0; j < 8; ++j) {
      if (per_class[j] < 0.0) continue;  // uncharged class
      total += cells_per_class *
               flip_probability(config.rh_time, config.temperature_C, per_class[j]);
    }
    return total;
  }

  /// Expected mean pairwise intra-device Jaccard for a query configuration.
  double expected_jintra(const PufConfig& config, const Geometry& geometry,
                         bool decay_only = false) const {
    if (p_.noise_log_sd <= 0.0) return 1.0;
    const auto per_class = class_rates(config, geometry, decay_only);
    double e1 = 0.0, e2 = 0.0;
    for (int j = 0; j < 8; ++j) {
      if (per_class[j] < 0.0) continue;
      const auto [m1, m2] =
          flip_moments(config.rh_time, config.temperature_C, per_class[j]);
      e1 += m1 / 8.0;
      e2 += m2 / 8.0;
    }
    if (e1 <= 0.0) return 1.0;
    return e2 / (2.0 * e1 - e2);
  }

 private:
  static constexpr int kSusceptibilityNodes = 401;
  static constexpr int kRetentionNodes = 801;

  static double phi(double z) {
    return 0.3989422804014327 * std::exp(-0.5 * z * z);
  }

  double temp_shift(double temperature_C) const {
    return (temperature_C - 40.0) / p_.temp_doubling_degC * 0.6931471805599453;
  }

  /// Weighted aggressor rate per column class j = column % 8; -1 marks an
  /// uncharged victim class that can never flip.
  std::array<double, 8> class_rates(const PufConfig& config,
                                    const Geometry& geometry,
                                    bool decay_only) const {
    const RowPattern pattern = build_row_pattern(config.rh_type, config.puf_size,
                                                 geometry, config.puf_address);
    const double rate = hammer_access_rate(
        static_cast<std::uint32_t>(pattern.hammer_row_indices.size()));
    const double n_agg = config.rh_type == RhType::DSRH ? 2.0 : 1.0;
    std::array<double, 8> out{};
    for (int j = 0; j < 8; ++j) {
      if (!initial_charged(config.puf_row_iv, j)) {
        out[j] = -1.0;
        continue;
      }
      const double kappa = initial_charged(config.hammer_row_iv, j)
                               ? p_.charged_aggressor_factor
                               : 1.0;
      out[j] = decay_only ? 0.0 : n_agg * rate * kappa;
    }
    return out;
  }

  ModelParams p_;
};

}  // namespace hammerpuf

#pragma once

#include <json.hpp>

#include "hammerpuf/errors.hpp"

namespace hammerpuf {

/// Calibration knobs of the cell physics. Retention and susceptibility are
/// lognormal across cells; jitter is a per-measurement lognormal factor on
/// retention. Defaults are the shipped calibration (data/default-model-params.json).
struct ModelParams {
  double retention_log_mean = 7.40;       // ln seconds at 40 C
  double retention_log_sd = 1.21;
  double susceptibility_log_mean = -16.33;  // ln of per-access rate factor
  double susceptibility_log_sd = 0.485;
  double susceptible_fraction = 0.0222;
  double charged_aggressor_factor = 0.153;  // alpha
  double noise_log_sd = 0.0175;
  double temp_doubling_degC = 12.25;

  bool operator==(const ModelParams&) const = default;
};

inline void validate(const ModelParams& p) {
  if (p.retention_log_sd < 0 || p.susceptibility_log_sd < 0 || p.noise_log_sd < 0)
    throw ConfigError("model_params: standard deviations must be >= 0");
  if (p.susceptible_fraction < 0 || p.susceptible_fraction > 1)
    throw ConfigError("model_params.susceptible_fraction must be in [0, 1]");
  if (p.charged_aggressor_factor <= 0 || p.charged_aggressor_factor > 1)
    throw ConfigError("model_params.charged_aggressor_factor must be in (0, 1]");
  if (p.temp_doubling_degC <= 0)
    throw ConfigError("model_params.temp_doubling_degC must be > 0");
}

inline void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{
      {"retention_log_mean", p.retention_log_mean},
      {"retention_log_sd", p.retention_log_sd},
      {"susceptibility_log_mean", p.susceptibility_log_mean},
      {"susceptibility_log_sd", p.susceptibility_log_sd},
      {"susceptible_fraction", p.susceptible_fraction},
      {"charged_aggressor_factor", p.charged_aggressor_factor},
      {"noise_log_sd", p.noise_log_sd},
      {"temp_doubling_degC", p.temp_doubling_degC}};
}

inline void from_json(const nlohmann::json& j, ModelParams& p) {
  j.at("retention_log_mean").get_to(p.retention_log_mean);
  j.at("retention_log_sd").get_to(p.retention_log_sd);
  j.at("susceptibility_log_mean").get_to(p.susceptibility_log_mean);
  j.at("susceptibility_log_sd").get_to(p.susceptibility_log_sd);
  j.at("susceptible_fraction").get_to(p.susceptible_fraction);
  j.at("charged_aggressor_factor").get_to(p.charged_aggressor_factor);
  j.at("noise_log_sd").get_to(p.noise_log_sd);
  j.at("temp_doubling_degC").get_to(p.temp_doubling_degC);
}

}  // namespace hammerpuf

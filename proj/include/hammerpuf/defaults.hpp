#pragma once

namespace hammerpuf {

/// Embedded copy of data/calibration-targets.json so the CLI works without
/// locating the data directory. A unit test keeps the two in sync.
inline constexpr const char* kDefaultTargetsJson = R"json({
  "format_version": 1,
  "targets": [
    {"name": "flips_ssrh128_120s_40C", "min": 27968.4, "max": 37839.6, "aim": 32904.0, "weight": 3.0},
    {"name": "flips_hammer_iv_aa_120s", "min": 10663.5, "max": 17772.5, "aim": 14218.0, "weight": 1.0},
    {"name": "iv_zero_row_max", "min": 0.0, "max": 0.0, "aim": 0.0, "weight": 0.0},
    {"name": "iv_ordering_violations", "min": 0.0, "max": 0.0, "aim": 0.0, "weight": 0.0},
    {"name": "ratio_50C_over_40C", "min": 1.6, "max": 2.4, "aim": 2.0, "weight": 4.0},
    {"name": "ratio_60C_over_50C", "min": 1.6, "max": 2.4, "aim": 2.0, "weight": 4.0},
    {"name": "hammer_over_decay_60s", "min": 2.0, "max": 2.8, "aim": 2.4, "weight": 4.0},
    {"name": "hammer_over_decay_120s", "min": 1.7, "max": 2.3, "aim": 2.0, "weight": 4.0},
    {"name": "ratio_120s_over_60s", "min": 3.5, "max": 5.5, "aim": 4.2, "weight": 4.0},
    {"name": "dsrh_uplift_120s", "min": 0.05, "max": 0.25, "aim": 0.15, "weight": 4.0},
    {"name": "size_fraction_spread_120s", "min": 0.0, "max": 0.3, "aim": 0.12, "weight": 2.0},
    {"name": "jintra_mean_40C", "min": 0.95, "max": 0.995, "aim": 0.978, "weight": 2.0},
    {"name": "jintra_mean_60C", "min": 0.9647, "max": 0.9995, "aim": 0.9847, "weight": 2.0},
    {"name": "jintra_min_40C", "min": 0.9354, "max": 1.0, "aim": 0.975, "weight": 0.0},
    {"name": "jintra_min_all_temps", "min": 0.94, "max": 1.0, "aim": 0.975, "weight": 0.0},
    {"name": "separation_margin", "min": 0.0, "max": 1.0, "aim": 0.9, "weight": 0.0},
    {"name": "hammer_decay_jaccard", "min": 0.0, "max": 0.95, "aim": 0.5, "weight": 0.0},
    {"name": "entropy_fraction_uniqueness", "min": 0.17, "max": 0.23, "aim": 0.192, "weight": 0.0}
  ]
})json";

}  // namespace hammerpuf

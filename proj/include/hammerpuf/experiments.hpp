#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hammerpuf/defaults.hpp"
#include "hammerpuf/device.hpp"
#include "hammerpuf/engine.hpp"
#include "hammerpuf/errors.hpp"
#include "hammerpuf/expected_counts.hpp"
#include "hammerpuf/fuzzy_extractor.hpp"
#include "hammerpuf/metrics.hpp"
#include "hammerpuf/version.hpp"

namespace hammerpuf {

/// One named acceptance band: a value passes when it lies in [min, max].
/// aim and weight steer the calibration search toward the band's center.
struct Target {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double aim = 0.0;
  double weight = 0.0;
};

struct TargetSet {
  std::vector<Target> targets;

  const Target* find(const std::string& name) const {
    for (const Target& t : targets) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }

  static TargetSet from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") ||
        j.at("format_version").get<int>() != kFormatVersion)
      throw ConfigError("targets file: unknown format_version");
    TargetSet set;
    for (const auto& e : j.at("targets")) {
      Target t;
      e.at("name").get_to(t.name);
      e.at("min").get_to(t.min);
      e.at("max").get_to(t.max);
      e.at("aim").get_to(t.aim);
      e.at("weight").get_to(t.weight);
      if (t.min > t.max) throw ConfigError("target " + t.name + ": min > max");
      set.targets.push_back(std::move(t));
    }
    return set;
  }

  static TargetSet defaults() {
    return from_json(nlohmann::json::parse(kDefaultTargetsJson));
  }
};

/// Result of checking one value against its declared band.
struct TargetCheck {
  std::string name;
  double value = 0.0;
  double min = 0.0;
  double max = 0.0;
  bool pass = false;
  bool skipped = false;  // band not meaningful at this scale
};

inline void to_json(nlohmann::json& j, const TargetCheck& c) {
  j = nlohmann::json{{"name", c.name},   {"value", c.value},
                     {"min", c.min},     {"max", c.max},
                     {"pass", c.pass},   {"skipped", c.skipped}};
}

/// Bands that stay meaningful when --scale shrinks the PUF region: exact
/// structural checks and noise statistics. Absolute counts and rate ratios
/// depend on region size and are only checked at full scale.
inline bool target_is_scale_proof(const std::string& name) {
  static const char* kNames[] = {
      "iv_zero_row_max",       "iv_ordering_violations", "jintra_min_40C",
      "jintra_min_all_temps",  "jintra_mean_40C",        "jintra_mean_60C",
      "separation_margin",     "hammer_decay_jaccard",
      "entropy_fraction_uniqueness"};
  for (const char* n : kNames) {
    if (name == n) return true;
  }
  return false;
}

struct ExperimentReport {
  std::string experiment;
  std::uint64_t master_seed = 0;
  double scale = 1.0;
  Geometry geometry;
  ModelParams model_params;
  nlohmann::json base_config;
  nlohmann::json seeds;
  nlohmann::json grid = nlohmann::json::array();
  nlohmann::json summary = nlohmann::json::object();
  std::vector<TargetCheck> targets;
  std::vector<std::pair<std::string, std::string>> csv_files;  // name, content
  std::string histogram_svg;  // empty unless rendered
  long long elapsed_ms = 0;
  unsigned threads = 1;

  bool all_pass() const {
    for (const TargetCheck& t : targets) {
      if (!t.skipped && !t.pass) return false;
    }
    return true;
  }

  const TargetCheck* check(const std::string& name) const {
    for (const TargetCheck& t : targets) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"format_version", kFormatVersion},
                          {"experiment", experiment},
                          {"master_seed", master_seed},
                          {"scale", scale},
                          {"geometry", geometry},
                          {"model_params", model_params},
                          {"base_config", base_config},
                          {"seeds", seeds},
                          {"grid", grid},
                          {"summary", summary},
                          {"targets", targets},
                          {"all_targets_pass", all_pass()},
                          {"runtime", {{"elapsed_ms", elapsed_ms},
                                       {"threads", threads}}}};
  }
};

namespace detail {

inline constexpr std::uint64_t kSaltIvMatrix = 0x69762d6d61747278ULL;
inline constexpr std::uint64_t kSaltTemperature = 0x74656d7065726174ULL;
inline constexpr std::uint64_t kSaltRhType = 0x72682d747970652dULL;
inline constexpr std::uint64_t kSaltDecay = 0x64656361792d2d2dULL;
inline constexpr std::uint64_t kSaltUniqueness = 0x756e697175652d2dULL;
inline constexpr std::uint64_t kSaltDevice = 0x6465766963652d2dULL;

inline std::uint64_t experiment_seed(std::uint64_t master, std::uint64_t salt,
                                     std::uint64_t cell, std::uint64_t rep) {
  std::uint64_t h = mix64(master);
  h = combine(h, salt);
  h = combine(h, cell);
  h = combine(h, rep);
  return h;
}

/// Runs independent jobs on a small pool. Each job owns its result slot, so
/// the merged output is independent of scheduling.
inline void run_jobs(std::vector<std::function<void()>>& jobs, unsigned threads) {
  if (threads <= 1 || jobs.size() <= 1) {
    for (auto& job : jobs) job();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) {
    pool.emplace_back([&jobs, &next] {
      for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) jobs[i]();
    });
  }
  for (std::thread& th : pool) th.join();
}

inline std::uint32_t scaled_repetitions(std::uint32_t reps, double scale) {
  if (scale >= 1.0) return reps;
  const auto scaled = static_cast<std::uint32_t>(std::lround(reps * scale));
  return std::max<std::uint32_t>(2, scaled);
}

/// Shrinks the PUF region, keeping rows aligned, SSRH row counts even,
/// and at least one 4 KB row.
inline std::uint64_t scaled_puf_size(std::uint64_t puf_size, RhType rh_type,
                                     double scale, const Geometry& geometry) {
  if (scale >= 1.0) return puf_size;
  const std::uint64_t row = geometry.row_size_bytes;
  std::uint64_t rows = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::llround(
             static_cast<double>(puf_size / row) * scale)));
  if (rh_type == RhType::SSRH && rows % 2 != 0) ++rows;
  std::uint64_t size = rows * row;
  while (size < 4096) size += row;
  return size;
}

inline std::string iv_hex(std::uint8_t iv) {
  static constexpr char digits[] = "0123456789abcdef";
  return std::string("0x") + digits[iv >> 4] + digits[iv & 0x0f];
}

struct CountStats {
  double mean = 0.0;
  std::uint64_t min = 0;
  std::uint64_t max = 0;
};

inline CountStats count_stats(const std::vector<std::uint64_t>& counts) {
  CountStats s;
  if (counts.empty()) return s;
  s.min = *std::min_element(counts.begin(), counts.end());
  s.max = *std::max_element(counts.begin(), counts.end());
  double sum = 0.0;
  for (std::uint64_t c : counts) sum += static_cast<double>(c);
  s.mean = sum / static_cast<double>(counts.size());
  return s;
}

inline TargetCheck check_target(const TargetSet& set, const std::string& name,
                                double value, double scale) {
  TargetCheck c;
  c.name = name;
  c.value = value;
  const Target* t = set.find(name);
  if (t == nullptr) {
    c.skipped = true;
    c.pass = true;
    return c;
  }
  c.min = t->min;
  c.max = t->max;
  if (scale != 1.0 && !target_is_scale_proof(name)) {
    c.skipped = true;
    c.pass = true;
    return c;
  }
  c.pass = value >= t->min && value <= t->max;
  return c;
}

}  // namespace detail

/// Table of mean flip counts over the 4x4 grid of hammer/PUF initial
/// values, for both hammering types.
inline ExperimentReport run_iv_matrix(const DramDevice& device,
                                      const PufConfig& base_config,
                                      std::uint32_t repetitions,
                                      std::uint64_t master_seed,
                                      const TargetSet& targets,
                                      double scale = 1.0, unsigned threads = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  static constexpr std::uint8_t kIvs[] = {0x00, 0x55, 0xAA, 0xFF};
  const std::uint32_t reps = detail::scaled_repetitions(repetitions, scale);

  struct Cell {
    PufConfig config;
    std::vector<std::uint64_t> counts;
  };
  std::vector<Cell> cells;
  for (RhType type : {RhType::SSRH, RhType::DSRH}) {
    for (std::uint8_t puf_iv : kIvs) {
      for (std::uint8_t hammer_iv : kIvs) {
        PufConfig c = base_config;
        c.rh_type = type;
        c.puf_size = detail::scaled_puf_size(base_config.puf_size, type, scale,
                                             device.geometry());
        c.hammer_row_iv = hammer_iv;
        c.puf_row_iv = puf_iv;
        cells.push_back({c, std::vector<std::uint64_t>(reps, 0)});
      }
    }
  }

  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    jobs.emplace_back([&cells, i, &device, reps, master_seed] {
      for (std::uint32_t r = 0; r < reps; ++r) {
        const std::uint64_t seed = detail::experiment_seed(
            master_seed, detail::kSaltIvMatrix, i, r);
        cells[i].counts[r] =
            simulate_query(device, cells[i].config, seed).flip_count();
      }
    });
  }
  detail::run_jobs(jobs, threads);

  ExperimentReport rep;
  rep.experiment = "iv-matrix";
  rep.master_seed = master_seed;
  rep.scale = scale;
  rep.geometry = device.geometry();
  rep.model_params = device.params();
  rep.base_config = base_config;
  rep.seeds = {{"device_seed", device.device_seed()}};
  rep.threads = threads;

  auto mean_of = [&cells](RhType type, std::uint8_t hammer_iv,
                          std::uint8_t puf_iv) {
    for (const Cell& c : cells) {
      if (c.config.rh_type == type && c.config.hammer_row_iv == hammer_iv &&
          c.config.puf_row_iv == puf_iv) {
        return detail::count_stats(c.counts).mean;
      }
    }
    throw ConfigError("iv-matrix: missing grid cell");
  };

  std::ostringstream csv;
  csv << "rh_type,hammer_iv,puf_iv,mean_flips,min_flips,max_flips\n";
  double zero_row_max = 0.0;
  for (const Cell& c : cells) {
    const detail::CountStats s = detail::count_stats(c.counts);
    nlohmann::json cell{{"rh_type", to_string(c.config.rh_type)},
                        {"hammer_iv", c.config.hammer_row_iv},
                        {"puf_iv", c.config.puf_row_iv},
                        {"puf_size", c.config.puf_size},
                        {"counts", c.counts},
                        {"mean_flips", s.mean},
                        {"min_flips", s.min},
                        {"max_flips", s.max}};
    rep.grid.push_back(cell);
    csv << to_string(c.config.rh_type) << ',' << detail::iv_hex(c.config.hammer_row_iv)
        << ',' << detail::iv_hex(c.config.puf_row_iv) << ',' << s.mean << ','
        << s.min << ',' << s.max << '\n';
    if (c.config.puf_row_iv == 0x55) {
      zero_row_max = std::max(zero_row_max, static_cast<double>(s.max));
    }
  }
  rep.csv_files.emplace_back("iv-matrix.csv", csv.str());

  // Orderings hold per hammering type; 0x00 and 0xFF charge complementary
  // halves and are not ordered against each other.
  int violations = 0;
  for (RhType type : {RhType::SSRH, RhType::DSRH}) {
    const double m00 = mean_of(type, 0x00, 0xAA);
    const double m55 = mean_of(type, 0x55, 0xAA);
    const double mAA = mean_of(type, 0xAA, 0xAA);
    const double mFF = mean_of(type, 0xFF, 0xAA);
    if (!(m55 > mFF)) ++violations;
    if (!(m55 > m00)) ++violations;
    if (!(m00 > mAA)) ++violations;
    if (!(mFF > mAA)) ++violations;
    double best = 0.0;
    std::pair<std::uint8_t, std::uint8_t> arg{0, 0};
    for (std::uint8_t puf_iv : kIvs) {
      for (std::uint8_t hammer_iv : kIvs) {
        const double m = mean_of(type, hammer_iv, puf_iv);
        if (m > best) {
          best = m;
          arg = {hammer_iv, puf_iv};
        }
      }
    }
    if (!(arg.first == 0x55 && arg.second == 0xAA)) ++violations;
  }

  rep.targets.push_back(detail::check_target(targets, "iv_zero_row_max",
                                             zero_row_max, scale));
  rep.targets.push_back(detail::check_target(targets, "iv_ordering_violations",
                                             violations, scale));
  rep.targets.push_back(detail::check_target(
      targets, "flips_ssrh128_120s_40C", mean_of(RhType::SSRH, 0x55, 0xAA), scale));
  rep.targets.push_back(detail::check_target(
      targets, "flips_hammer_iv_aa_120s", mean_of(RhType::SSRH, 0xAA, 0xAA), scale));

  rep.summary = {{"zero_row_max", zero_row_max},
                 {"ordering_violations", violations},
                 {"ssrh_55_aa_mean", mean_of(RhType::SSRH, 0x55, 0xAA)},
                 {"dsrh_55_aa_mean", mean_of(RhType::DSRH, 0x55, 0xAA)}};
  rep.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Mean flips and J_intra across operating temperatures.
inline ExperimentReport run_temperature_sweep(
    const DramDevice& device, const PufConfig& base_config,
    const std::vector<double>& temps, std::uint32_t repetitions,
    std::uint64_t master_seed, const TargetSet& targets, double scale = 1.0,
    unsigned threads = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint32_t reps = detail::scaled_repetitions(repetitions, scale);

  struct Cell {
    PufConfig config;
    std::vector<Measurement> measurements;
  };
  std::vector<Cell> cells;
  for (double t : temps) {
    PufConfig c = base_config;
    c.temperature_C = t;
    c.puf_size = detail::scaled_puf_size(base_config.puf_size, c.rh_type, scale,
                                         device.geometry());
    cells.push_back({c, {}});
    cells.back().measurements.resize(reps);
  }

  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    jobs.emplace_back([&cells, i, &device, reps, master_seed] {
      for (std::uint32_t r = 0; r < reps; ++r) {
        const std::uint64_t seed = detail::experiment_seed(
            master_seed, detail::kSaltTemperature, i, r);
        cells[i].measurements[r] = simulate_query(device, cells[i].config, seed);
      }
    });
  }
  detail::run_jobs(jobs, threads);

  ExperimentReport rep;
  rep.experiment = "temperature";
  rep.master_seed = master_seed;
  rep.scale = scale;
  rep.geometry = device.geometry();
  rep.model_params = device.params();
  rep.base_config = base_config;
  rep.seeds = {{"device_seed", device.device_seed()}};
  rep.threads = threads;

  std::ostringstream csv;
  csv << "temperature_C,mean_flips,min_jintra,mean_jintra\n";
  std::vector<double> means;
  double min_jintra_all = 1.0;
  std::map<double, JaccardStats> jintra_by_temp;
  for (Cell& cell : cells) {
    std::vector<std::uint64_t> counts;
    counts.reserve(reps);
    for (const Measurement& m : cell.measurements) counts.push_back(m.flip_count());
    const detail::CountStats s = detail::count_stats(counts);
    const JaccardStats js = j_intra(cell.measurements);
    jintra_by_temp[cell.config.temperature_C] = js;
    means.push_back(s.mean);
    min_jintra_all = std::min(min_jintra_all, js.min);
    rep.grid.push_back({{"temperature_C", cell.config.temperature_C},
                        {"counts", counts},
                        {"mean_flips", s.mean},
                        {"min_flips", s.min},
                        {"max_flips", s.max},
                        {"jintra", js}});
    csv << cell.config.temperature_C << ',' << s.mean << ',' << js.min << ','
        << js.mean << '\n';
  }
  rep.csv_files.emplace_back("temperature.csv", csv.str());

  auto temp_index = [&temps](double t) -> int {
    for (std::size_t i = 0; i < temps.size(); ++i) {
      if (temps[i] == t) return static_cast<int>(i);
    }
    return -1;
  };
  const int i40 = temp_index(40.0), i50 = temp_index(50.0), i60 = temp_index(60.0);
  if (i40 >= 0 && i50 >= 0) {
    rep.targets.push_back(detail::check_target(
        targets, "ratio_50C_over_40C", means[i50] / means[i40], scale));
  }
  if (i50 >= 0 && i60 >= 0) {
    rep.targets.push_back(detail::check_target(
        targets, "ratio_60C_over_50C", means[i60] / means[i50], scale));
  }
  rep.targets.push_back(detail::check_target(targets, "jintra_min_all_temps",
                                             min_jintra_all, scale));
  if (i40 >= 0) {
    rep.targets.push_back(detail::check_target(
        targets, "jintra_mean_40C", jintra_by_temp[40.0].mean, scale));
  }
  if (i60 >= 0) {
    rep.targets.push_back(detail::check_target(
        targets, "jintra_mean_60C", jintra_by_temp[60.0].mean, scale));
  }

  rep.summary = {{"mean_flips_by_temp", means}, {"min_jintra", min_jintra_all}};
  rep.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Fractional flip rates across hammering types, PUF sizes, and durations.
inline ExperimentReport run_rh_type_comparison(
    const DramDevice& device, const PufConfig& base_config,
    std::vector<std::uint64_t> sizes, const std::vector<double>& times,
    std::uint32_t repetitions, std::uint64_t master_seed,
    const TargetSet& targets, double scale = 1.0, unsigned threads = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint32_t reps = detail::scaled_repetitions(repetitions, scale);

  if (scale < 1.0) {
    for (std::uint64_t& s : sizes) {
      s = detail::scaled_puf_size(s, RhType::DSRH, scale, device.geometry());
    }
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  }

  struct Cell {
    PufConfig config;
    bool valid = true;
    std::string invalid_reason;
    std::vector<std::uint64_t> counts;
  };
  std::vector<Cell> cells;
  for (RhType type : {RhType::SSRH, RhType::DSRH}) {
    for (std::uint64_t size : sizes) {
      for (double time : times) {
        Cell cell;
        cell.config = base_config;
        cell.config.rh_type = type;
        cell.config.puf_size = size;
        cell.config.rh_time = time;
        const std::uint64_t rows = size / device.geometry().row_size_bytes;
        if (type == RhType::SSRH && rows % 2 != 0) {
          cell.valid = false;
          cell.invalid_reason = "SSRH requires an even number of PUF rows";
        } else {
          cell.counts.resize(reps);
        }
        cells.push_back(std::move(cell));
      }
    }
  }

  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].valid) continue;
    jobs.emplace_back([&cells, i, &device, reps, master_seed] {
      for (std::uint32_t r = 0; r < reps; ++r) {
        const std::uint64_t seed = detail::experiment_seed(
            master_seed, detail::kSaltRhType, i, r);
        cells[i].counts[r] =
            simulate_query(device, cells[i].config, seed).flip_count();
      }
    });
  }
  detail::run_jobs(jobs, threads);

  ExperimentReport rep;
  rep.experiment = "rh-type";
  rep.master_seed = master_seed;
  rep.scale = scale;
  rep.geometry = device.geometry();
  rep.model_params = device.params();
  rep.base_config = base_config;
  rep.seeds = {{"device_seed", device.device_seed()}};
  rep.threads = threads;

  std::ostringstream csv;
  csv << "rh_type,puf_size,rh_time_s,valid,mean_flips,fraction\n";
  auto fraction_of = [](const Cell& c, double mean) {
    return mean / static_cast<double>(c.config.puf_bits());
  };
  for (const Cell& c : cells) {
    nlohmann::json cell{{"rh_type", to_string(c.config.rh_type)},
                        {"puf_size", c.config.puf_size},
                        {"rh_time_s", c.config.rh_time},
                        {"valid", c.valid}};
    if (c.valid) {
      const detail::CountStats s = detail::count_stats(c.counts);
      cell["counts"] = c.counts;
      cell["mean_flips"] = s.mean;
      cell["fraction"] = fraction_of(c, s.mean);
      csv << to_string(c.config.rh_type) << ',' << c.config.puf_size << ','
          << c.config.rh_time << ",1," << s.mean << ',' << fraction_of(c, s.mean)
          << '\n';
    } else {
      cell["invalid_reason"] = c.invalid_reason;
      csv << to_string(c.config.rh_type) << ',' << c.config.puf_size << ','
          << c.config.rh_time << ",0,," << '\n';
    }
    rep.grid.push_back(cell);
  }
  rep.csv_files.emplace_back("rh-type.csv", csv.str());

  auto mean_at = [&cells](RhType type, std::uint64_t size,
                          double time) -> std::optional<double> {
    for (const Cell& c : cells) {
      if (c.valid && c.config.rh_type == type && c.config.puf_size == size &&
          c.config.rh_time == time) {
        return detail::count_stats(c.counts).mean;
      }
    }
    return std::nullopt;
  };

  const std::uint64_t max_size = *std::max_element(sizes.begin(), sizes.end());
  const double t_long = *std::max_element(times.begin(), times.end());
  const double t_short = *std::min_element(times.begin(), times.end());

  const auto ssrh_long = mean_at(RhType::SSRH, max_size, t_long);
  const auto dsrh_long = mean_at(RhType::DSRH, max_size, t_long);
  const auto ssrh_short = mean_at(RhType::SSRH, max_size, t_short);
  if (ssrh_long && dsrh_long) {
    rep.targets.push_back(detail::check_target(
        targets, "dsrh_uplift_120s", *dsrh_long / *ssrh_long - 1.0, scale));
    rep.summary["dsrh_uplift_long"] = *dsrh_long / *ssrh_long - 1.0;
  }
  const auto ssrh_s = mean_at(RhType::SSRH, max_size, t_short);
  const auto dsrh_s = mean_at(RhType::DSRH, max_size, t_short);
  if (ssrh_s && dsrh_s) rep.summary["dsrh_uplift_short"] = *dsrh_s / *ssrh_s - 1.0;
  if (ssrh_long && ssrh_short) {
    rep.targets.push_back(detail::check_target(
        targets, "ratio_120s_over_60s", *ssrh_long / *ssrh_short, scale));
  }

  std::vector<double> fractions;
  for (const Cell& c : cells) {
    if (c.valid && c.config.rh_time == t_long) {
      fractions.push_back(fraction_of(c, detail::count_stats(c.counts).mean));
    }
  }
  if (fractions.size() >= 2) {
    const double lo = *std::min_element(fractions.begin(), fractions.end());
    const double hi = *std::max_element(fractions.begin(), fractions.end());
    double mean = 0.0;
    for (double f : fractions) mean += f;
    mean /= static_cast<double>(fractions.size());
    rep.targets.push_back(detail::check_target(
        targets, "size_fraction_spread_120s", (hi - lo) / mean, scale));
    rep.summary["fraction_spread_long"] = (hi - lo) / mean;
  }

  rep.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Hammer queries against refresh-disabled decay alone, at 60 s and 120 s.
inline ExperimentReport run_decay_comparison(
    const DramDevice& device, const PufConfig& base_config,
    const std::vector<double>& times, std::uint32_t repetitions,
    std::uint64_t master_seed, const TargetSet& targets, double scale = 1.0,
    unsigned threads = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint32_t reps = detail::scaled_repetitions(repetitions, scale);

  struct Cell {
    PufConfig config;
    std::vector<Measurement> hammer;
    std::vector<Measurement> decay;
  };
  std::vector<Cell> cells;
  for (double time : times) {
    PufConfig c = base_config;
    c.rh_time = time;
    c.puf_size = detail::scaled_puf_size(base_config.puf_size, c.rh_type, scale,
                                         device.geometry());
    cells.push_back({c, {}, {}});
    cells.back().hammer.resize(reps);
    cells.back().decay.resize(reps);
  }

  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    jobs.emplace_back([&cells, i, &device, reps, master_seed] {
      for (std::uint32_t r = 0; r < reps; ++r) {
        // Hammer and decay share the measurement seed: the decay run is the
        // same physical episode with the disturbance pathway switched off.
        const std::uint64_t seed = detail::experiment_seed(
            master_seed, detail::kSaltDecay, i, r);
        cells[i].hammer[r] = simulate_query(device, cells[i].config, seed);
        cells[i].decay[r] = simulate_decay_only(device, cells[i].config, seed);
      }
    });
  }
  detail::run_jobs(jobs, threads);

  ExperimentReport rep;
  rep.experiment = "decay";
  rep.master_seed = master_seed;
  rep.scale = scale;
  rep.geometry = device.geometry();
  rep.model_params = device.params();
  rep.base_config = base_config;
  rep.seeds = {{"device_seed", device.device_seed()}};
  rep.threads = threads;

  std::ostringstream csv;
  csv << "rh_time_s,hammer_mean,decay_mean,ratio,mean_jaccard\n";
  for (Cell& cell : cells) {
    std::vector<std::uint64_t> hcounts, dcounts;
    std::vector<double> jaccards;
    for (std::uint32_t r = 0; r < reps; ++r) {
      hcounts.push_back(cell.hammer[r].flip_count());
      dcounts.push_back(cell.decay[r].flip_count());
      jaccards.push_back(jaccard(extract_flip_set(cell.hammer[r]),
                                 extract_flip_set(cell.decay[r])));
    }
    const detail::CountStats hs = detail::count_stats(hcounts);
    const detail::CountStats ds = detail::count_stats(dcounts);
    double jmean = 0.0;
    for (double j : jaccards) jmean += j;
    jmean /= static_cast<double>(jaccards.size());
    const double ratio = hs.mean / ds.mean;
    rep.grid.push_back({{"rh_time_s", cell.config.rh_time},
                        {"hammer_counts", hcounts},
                        {"decay_counts", dcounts},
                        {"hammer_mean", hs.mean},
                        {"decay_mean", ds.mean},
                        {"ratio", ratio},
                        {"mean_jaccard", jmean}});
    csv << cell.config.rh_time << ',' << hs.mean << ',' << ds.mean << ','
        << ratio << ',' << jmean << '\n';

    const bool is60 = cell.config.rh_time == 60.0;
    const bool is120 = cell.config.rh_time == 120.0;
    if (is60) {
      rep.targets.push_back(detail::check_target(targets, "hammer_over_decay_60s",
                                                 ratio, scale));
    }
    if (is120) {
      rep.targets.push_back(detail::check_target(
          targets, "hammer_over_decay_120s", ratio, scale));
      rep.targets.push_back(detail::check_target(targets, "hammer_decay_jaccard",
                                                 jmean, scale));
    }
  }
  rep.csv_files.emplace_back("decay.csv", csv.str());
  rep.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0).count();
  return rep;
}

namespace detail {

/// Minimal bar rendering of the intra/inter histograms.
inline std::string histogram_svg(const JaccardStats& intra,
                                 const JaccardStats& inter) {
  const int width = 800, height = 320, margin = 40;
  const int bins = static_cast<int>(intra.bin_counts.size());
  std::uint64_t peak = 1;
  for (std::uint64_t c : intra.bin_counts) peak = std::max(peak, c);
  for (std::uint64_t c : inter.bin_counts) peak = std::max(peak, c);
  const double bar_w = static_cast<double>(width - 2 * margin) / bins;
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n";
  auto bars = [&](const JaccardStats& s, const char* color) {
    for (int i = 0; i < bins; ++i) {
      const std::uint64_t c = s.bin_counts[static_cast<std::size_t>(i)];
      if (c == 0) continue;
      const double h = static_cast<double>(height - 2 * margin) *
                       static_cast<double>(c) / static_cast<double>(peak);
      svg << "<rect x='" << margin + i * bar_w << "' y='"
          << height - margin - h << "' width='" << bar_w * 0.9 << "' height='"
          << h << "' fill='" << color << "' fill-opacity='0.6'/>\n";
    }
  };
  bars(inter, "#1f77b4");
  bars(intra, "#d62728");
  svg << "<line x1='" << margin << "' y1='" << height - margin << "' x2='"
      << width - margin << "' y2='" << height - margin
      << "' stroke='black'/>\n"
      << "<text x='" << margin << "' y='" << height - margin + 24
      << "' font-size='12'>0.0</text>\n"
      << "<text x='" << width - margin - 16 << "' y='" << height - margin + 24
      << "' font-size='12'>1.0</text>\n"
      << "<text x='" << margin << "' y='" << margin - 16
      << "' font-size='12' fill='#d62728'>intra</text>\n"
      << "<text x='" << margin + 50 << "' y='" << margin - 16
      << "' font-size='12' fill='#1f77b4'>inter</text>\n"
      << "</svg>\n";
  return svg.str();
}

}  // namespace detail

/// Robustness/uniqueness study over several simulated devices: pooled
/// J_intra, cross-device J_inter, histogram separation, and the entropy
/// bound from the smallest observed flip set.
inline ExperimentReport run_uniqueness(
    const std::vector<std::uint64_t>& device_seeds, const Geometry& geometry,
    const ModelParams& params, const PufConfig& base_config,
    std::uint32_t repetitions, std::uint64_t master_seed,
    const TargetSet& targets, double scale = 1.0, unsigned threads = 1,
    bool render_svg = false) {
  if (device_seeds.size() < 2)
    throw ConfigError("uniqueness experiment needs at least 2 device seeds");
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint32_t reps = detail::scaled_repetitions(repetitions, scale);

  PufConfig config = base_config;
  config.puf_size = detail::scaled_puf_size(base_config.puf_size, config.rh_type,
                                            scale, geometry);

  std::vector<DramDevice> devices;
  devices.reserve(device_seeds.size());
  for (std::uint64_t seed : device_seeds) {
    devices.emplace_back(seed, geometry, params);
  }
  std::vector<std::vector<Measurement>> groups(devices.size());
  for (auto& g : groups) g.resize(reps);

  std::vector<std::function<void()>> jobs;
  for (std::size_t d = 0; d < devices.size(); ++d) {
    jobs.emplace_back([&groups, &devices, &config, d, reps, master_seed] {
      for (std::uint32_t r = 0; r < reps; ++r) {
        const std::uint64_t seed = detail::experiment_seed(
            master_seed, detail::kSaltUniqueness, d, r);
        groups[d][r] = simulate_query(devices[d], config, seed);
      }
    });
  }
  detail::run_jobs(jobs, threads);

  ExperimentReport rep;
  rep.experiment = "uniqueness";
  rep.master_seed = master_seed;
  rep.scale = scale;
  rep.geometry = geometry;
  rep.model_params = params;
  rep.base_config = base_config;
  rep.seeds = {{"device_seeds", device_seeds}};
  rep.threads = threads;

  std::vector<std::vector<FlipSet>> sets(groups.size());
  std::uint64_t min_flips = UINT64_MAX;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const Measurement& m : groups[g]) {
      sets[g].push_back(extract_flip_set(m));
      min_flips = std::min(min_flips,
                           static_cast<std::uint64_t>(sets[g].back().size()));
    }
  }
  std::vector<PairRecord> pairs;
  for (std::size_t g = 0; g < sets.size(); ++g) {
    for (const PairRecord& p : intra_pairs(sets[g])) pairs.push_back(p);
  }
  const JaccardStats intra = jaccard_stats(pair_values(pairs));
  const std::vector<PairRecord> cross = inter_pairs(sets);
  const JaccardStats inter = jaccard_stats(pair_values(cross));
  for (const PairRecord& p : cross) pairs.push_back(p);

  std::ostringstream csv;
  csv << "id_a,id_b,jaccard,kind\n";
  for (const PairRecord& p : pairs) {
    csv << p.id_a << ',' << p.id_b << ',' << p.jaccard << ',' << p.kind << '\n';
  }
  rep.csv_files.emplace_back("pairs.csv", csv.str());

  std::ostringstream hist;
  hist << "bin_lo,bin_hi,intra_count,inter_count\n";
  for (std::size_t i = 0; i < intra.bin_counts.size(); ++i) {
    hist << intra.bin_edges[i] << ',' << intra.bin_edges[i + 1] << ','
         << intra.bin_counts[i] << ',' << inter.bin_counts[i] << '\n';
  }
  rep.csv_files.emplace_back("histogram.csv", hist.str());

  const double separation = intra.min - inter.max;
  const double frac = entropy_fraction(config.puf_bits(), min_flips);
  for (std::size_t g = 0; g < devices.size(); ++g) {
    std::vector<std::uint64_t> counts;
    for (const FlipSet& s : sets[g]) {
      counts.push_back(static_cast<std::uint64_t>(s.size()));
    }
    const JaccardStats device_intra = j_intra(groups[g]);
    rep.grid.push_back({{"device_id", devices[g].device_id()},
                        {"device_seed", device_seeds[g]},
                        {"flip_counts", counts},
                        {"jintra_min", device_intra.min},
                        {"jintra_mean", device_intra.mean}});
  }
  rep.summary = {{"jintra", intra},
                 {"jinter", inter},
                 {"separation", separation},
                 {"separated", separation > 0.0},
                 {"min_flip_count", min_flips},
                 {"entropy_bits", entropy_bits(config.puf_bits(), min_flips)},
                 {"entropy_fraction", frac},
                 {"key_bytes_for_128_bits", key_material_size(128, frac)}};

  rep.targets.push_back(detail::check_target(targets, "jintra_min_40C",
                                             intra.min, scale));
  rep.targets.push_back(detail::check_target(targets, "separation_margin",
                                             separation, scale));
  rep.targets.push_back(detail::check_target(
      targets, "entropy_fraction_uniqueness", frac, scale));

  if (render_svg) rep.histogram_svg = detail::histogram_svg(intra, inter);
  rep.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Calibration fit: coordinate descent on the analytic expectations against
/// the declared targets. Deterministic; never mutates shipped defaults.
struct CalibrationResult {
  ModelParams params;
  double objective = 0.0;
  std::uint64_t evaluations = 0;
  std::vector<TargetCheck> residuals;
  bool all_within = false;
};

namespace detail {

struct CalibrationSpace {
  // One entry per searched ModelParams field: accessor plus hard bounds.
  struct Dim {
    const char* name;
    double ModelParams::*field;
    double lo;
    double hi;
  };
  static const std::vector<Dim>& dims() {
    static const std::vector<Dim> d = {
        {"retention_log_mean", &ModelParams::retention_log_mean, 5.5, 9.5},
        {"retention_log_sd", &ModelParams::retention_log_sd, 0.6, 2.2},
        {"susceptibility_log_mean", &ModelParams::susceptibility_log_mean, -22.0, -12.0},
        {"susceptibility_log_sd", &ModelParams::susceptibility_log_sd, 0.4, 3.0},
        {"susceptible_fraction", &ModelParams::susceptible_fraction, 0.004, 0.25},
        {"charged_aggressor_factor", &ModelParams::charged_aggressor_factor, 0.02, 0.9},
        {"noise_log_sd", &ModelParams::noise_log_sd, 0.004, 0.12},
        {"temp_doubling_degC", &ModelParams::temp_doubling_degC, 10.0, 26.0},
    };
    return d;
  }
};

/// Analytic values for every target the calibration search understands.
inline std::map<std::string, double> analytic_observables(
    const ModelParams& params, const Geometry& geometry) {
  const AnalyticModel model(params);
  PufConfig ssrh128;  // defaults: SSRH, 128 KB, 0x55/0xAA, 120 s, 40 C
  auto with = [&](RhType type, std::uint64_t size, double time, double temp,
                  std::uint8_t hammer_iv) {
    PufConfig c = ssrh128;
    c.rh_type = type;
    c.puf_size = size;
    c.rh_time = time;
    c.temperature_C = temp;
    c.hammer_row_iv = hammer_iv;
    return c;
  };
  const std::uint64_t k128 = 131072, k32 = 32768, k4 = 4096;

  std::map<std::string, double> out;
  const double h120 = model.expected_count(ssrh128, geometry);
  const double h60 =
      model.expected_count(with(RhType::SSRH, k128, 60, 40, 0x55), geometry);
  const double h50C =
      model.expected_count(with(RhType::SSRH, k128, 120, 50, 0x55), geometry);
  const double h60C =
      model.expected_count(with(RhType::SSRH, k128, 120, 60, 0x55), geometry);
  const double d120 = model.expected_count(ssrh128, geometry, true);
  const double d60 = model.expected_count(
      with(RhType::SSRH, k128, 60, 40, 0x55), geometry, true);
  const double dsrh120 =
      model.expected_count(with(RhType::DSRH, k128, 120, 40, 0x55), geometry);
  out["flips_ssrh128_120s_40C"] = h120;
  out["flips_hammer_iv_aa_120s"] =
      model.expected_count(with(RhType::SSRH, k128, 120, 40, 0xAA), geometry);
  out["ratio_50C_over_40C"] = h50C / h120;
  out["ratio_60C_over_50C"] = h60C / h50C;
  out["hammer_over_decay_120s"] = h120 / d120;
  out["hammer_over_decay_60s"] = h60 / d60;
  out["ratio_120s_over_60s"] = h120 / h60;
  out["dsrh_uplift_120s"] = dsrh120 / h120 - 1.0;

  std::vector<double> fracs;
  for (auto [type, size] :
       std::vector<std::pair<RhType, std::uint64_t>>{{RhType::SSRH, k32},
                                                     {RhType::SSRH, k128},
                                                     {RhType::DSRH, k4},
                                                     {RhType::DSRH, k32},
                                                     {RhType::DSRH, k128}}) {
    const PufConfig c = with(type, size, 120, 40, 0x55);
    fracs.push_back(model.expected_count(c, geometry) /
                    static_cast<double>(c.puf_bits()));
  }
  const double lo = *std::min_element(fracs.begin(), fracs.end());
  const double hi = *std::max_element(fracs.begin(), fracs.end());
  double mean = 0.0;
  for (double f : fracs) mean += f;
  mean /= static_cast<double>(fracs.size());
  out["size_fraction_spread_120s"] = (hi - lo) / mean;

  out["jintra_mean_40C"] = model.expected_jintra(ssrh128, geometry);
  out["jintra_mean_60C"] =
      model.expected_jintra(with(RhType::SSRH, k128, 120, 60, 0x55), geometry);
  return out;
}

inline double calibration_objective(const std::map<std::string, double>& obs,
                                    const TargetSet& targets) {
  double total = 0.0;
  for (const Target& t : targets.targets) {
    if (t.weight <= 0.0) continue;
    auto it = obs.find(t.name);
    if (it == obs.end()) continue;
    const double span = std::max(t.max - t.min, 1e-12);
    const double v = it->second;
    const double pull = (v - t.aim) / span;
    total += t.weight * pull * pull;
    if (v < t.min) {
      const double d = (t.min - v) / span;
      total += 50.0 * t.weight * d * d;
    } else if (v > t.max) {
      const double d = (v - t.max) / span;
      total += 50.0 * t.weight * d * d;
    }
  }
  return total;
}

}  // namespace detail

inline CalibrationResult calibrate(const TargetSet& targets,
                                   const ModelParams& start,
                                   const Geometry& geometry,
                                   std::uint64_t budget = 800) {
  validate(start);
  const auto& dims = detail::CalibrationSpace::dims();

  CalibrationResult result;
  result.params = start;
  std::uint64_t evals = 0;
  auto objective = [&](const ModelParams& p) {
    ++evals;
    return detail::calibration_objective(
        detail::analytic_observables(p, geometry), targets);
  };

  // Clamp the start into the search box.
  for (const auto& dim : dims) {
    double& v = result.params.*(dim.field);
    v = std::clamp(v, dim.lo, dim.hi);
  }
  double best = objective(result.params);

  std::vector<double> steps;
  steps.reserve(dims.size());
  for (const auto& dim : dims) steps.push_back(0.08 * (dim.hi - dim.lo));

  while (evals < budget) {
    bool improved = false;
    for (std::size_t d = 0; d < dims.size() && evals < budget; ++d) {
      const auto& dim = dims[d];
      for (double direction : {+1.0, -1.0}) {
        if (evals >= budget) break;
        ModelParams trial = result.params;
        double& v = trial.*(dim.field);
        v = std::clamp(v + direction * steps[d], dim.lo, dim.hi);
        if (v == result.params.*(dim.field)) continue;
        const double score = objective(trial);
        if (score < best) {
          best = score;
          result.params = trial;
          improved = true;
          break;  // keep moving this dimension next round
        }
      }
    }
    if (!improved) {
      double max_step = 0.0;
      for (std::size_t d = 0; d < dims.size(); ++d) {
        steps[d] *= 0.5;
        max_step = std::max(max_step, steps[d] / (dims[d].hi - dims[d].lo));
      }
      if (max_step < 1e-5) break;
    }
  }

  result.objective = best;
  result.evaluations = evals;
  const auto obs = detail::analytic_observables(result.params, geometry);
  result.all_within = true;
  for (const Target& t : targets.targets) {
    auto it = obs.find(t.name);
    if (it == obs.end()) continue;
    TargetCheck c;
    c.name = t.name;
    c.value = it->second;
    c.min = t.min;
    c.max = t.max;
    c.pass = c.value >= t.min && c.value <= t.max;
    if (!c.pass) result.all_within = false;
    result.residuals.push_back(c);
  }
  return result;
}

}  // namespace hammerpuf

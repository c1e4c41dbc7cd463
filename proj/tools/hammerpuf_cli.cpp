// Command-line front end: device generation, PUF queries, flip-set metrics,
// key enrollment/reconstruction, and the experiment/calibration runners.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hammerpuf/hammerpuf.hpp"

namespace hp = hammerpuf;

namespace {

/// Reconstruction (or similar) failed on valid inputs: exit code 1.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint8_t parse_iv(const std::string& text) {
  std::size_t pos = 0;
  unsigned long value = 0;
  try {
    if (text.rfind("0x", 0) == 0 || text.rfind("0X", 0) == 0) {
      value = std::stoul(text.substr(2), &pos, 16);
      pos += 2;
    } else {
      value = std::stoul(text, &pos, 10);
    }
  } catch (const std::exception&) {
    throw hp::ConfigError("invalid IV byte '" + text + "' (use e.g. 0x55)");
  }
  if (pos != text.size() || value > 0xFF) {
    throw hp::ConfigError("invalid IV byte '" + text + "' (use e.g. 0x55)");
  }
  return static_cast<std::uint8_t>(value);
}

std::uint64_t parse_size(const std::string& text) {
  std::size_t pos = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &pos, 10);
  } catch (const std::exception&) {
    throw hp::ConfigError("invalid size '" + text + "'");
  }
  std::string suffix = text.substr(pos);
  for (char& c : suffix) c = static_cast<char>(std::tolower(c));
  if (suffix == "k" || suffix == "kb") {
    value *= 1024;
  } else if (suffix == "m" || suffix == "mb") {
    value *= 1024 * 1024;
  } else if (!suffix.empty() && suffix != "b") {
    throw hp::ConfigError("invalid size suffix '" + suffix +
                          "' (use K, KB, M, or MB)");
  }
  return value;
}

/// Model parameter precedence: explicit file > workspace calibration >
/// shipped defaults. A missing file falls back with a note, never an error.
hp::ModelParams resolve_model_params(const hp::Workspace& ws,
                                     const std::string& params_path) {
  auto load = [](const std::filesystem::path& p) {
    hp::ModelParams params = hp::load_json(p).get<hp::ModelParams>();
    hp::validate(params);
    return params;
  };
  if (!params_path.empty()) {
    if (std::filesystem::exists(params_path)) return load(params_path);
    std::cout << "note: params file " << params_path
              << " not found; using shipped calibration defaults\n";
    return hp::ModelParams{};
  }
  if (std::filesystem::exists(ws.calibration_file())) {
    std::cout << "note: using workspace calibration "
              << ws.calibration_file().string() << "\n";
    return load(ws.calibration_file());
  }
  return hp::ModelParams{};
}

hp::DramDevice load_device(const std::string& path) {
  return hp::device_from_json(hp::load_json(path));
}

hp::Measurement load_measurement(const std::string& path) {
  return hp::measurement_from_json(hp::load_json(path));
}

std::string short_id(const std::string& hex) { return hex.substr(0, 8); }

std::string pairs_csv(const std::vector<hp::PairRecord>& pairs) {
  std::ostringstream csv;
  csv << "id_a,id_b,jaccard,kind\n";
  for (const hp::PairRecord& p : pairs) {
    csv << p.id_a << ',' << p.id_b << ',' << p.jaccard << ',' << p.kind << '\n';
  }
  return csv.str();
}

void print_target_lines(const std::vector<hp::TargetCheck>& checks) {
  for (const hp::TargetCheck& c : checks) {
    const char* tag = c.skipped ? "SKIP" : (c.pass ? "PASS" : "FAIL");
    std::printf("[%s] %-28s value=%.6g", tag, c.name.c_str(), c.value);
    if (!c.skipped) std::printf("  band=[%.6g, %.6g]", c.min, c.max);
    std::printf("\n");
  }
}

struct CliState {
  std::string workspace_flag;

  hp::Workspace workspace() const {
    return hp::resolve_workspace(workspace_flag);
  }
};

struct DeviceGenOpts {
  std::uint64_t seed = 0;
  std::uint32_t banks = 1;
  std::uint32_t rows = 128;
  std::uint32_t row_size = 4096;
  std::string params_path;
  std::string out_path;
  bool force = false;
};

void add_device_gen(CLI::App& app, CliState& state) {
  auto* device = app.add_subcommand("device", "Simulated DRAM devices");
  device->require_subcommand(1);
  auto* gen = device->add_subcommand("gen", "Generate a device descriptor");
  auto opts = std::make_shared<DeviceGenOpts>();
  gen->add_option("--seed", opts->seed, "Device seed")->required();
  gen->add_option("--banks", opts->banks, "Banks")->capture_default_str();
  gen->add_option("--rows", opts->rows, "Rows per bank")->capture_default_str();
  gen->add_option("--row-size", opts->row_size, "Row size in bytes")
      ->capture_default_str();
  gen->add_option("--params", opts->params_path,
                  "Model parameter file (falls back to shipped defaults)");
  gen->add_option("--out", opts->out_path, "Output path");
  gen->add_flag("--force", opts->force, "Overwrite an existing file");

  gen->callback([opts, &state] {
    const hp::Workspace ws = state.workspace();
    hp::Geometry geometry{opts->banks, opts->rows, opts->row_size};
    hp::validate(geometry);
    const hp::ModelParams params = resolve_model_params(ws, opts->params_path);
    const hp::DramDevice dev(opts->seed, geometry, params);
    const std::string id = dev.device_id();
    const std::filesystem::path out = opts->out_path.empty()
        ? ws.devices_dir() / ("device-" + id + ".json")
        : std::filesystem::path(opts->out_path);
    hp::atomic_write(out, dev.descriptor_json().dump(2) + "\n", opts->force);
    std::printf("device %s\n%s\n", id.c_str(), out.string().c_str());
  });
}

struct QueryOpts {
  std::string device_path;
  std::string rh_type = "ssrh";
  std::uint32_t puf_address = 0;
  std::string puf_size = "128K";
  std::string hammer_iv = "0x55";
  std::string puf_iv = "0xaa";
  double rh_time = 120.0;
  double temperature = 40.0;
  std::uint64_t measurement_seed = 0;
  bool decay_only = false;
  std::string out_path;
  std::string flips_out;
  bool force = false;
  bool stamp = false;
};

void add_puf_query(CLI::App& app, CliState& state) {
  auto* puf = app.add_subcommand("puf", "PUF query procedure");
  puf->require_subcommand(1);
  auto* query = puf->add_subcommand("query", "Run one query on a device");
  auto opts = std::make_shared<QueryOpts>();
  query->add_option("--device", opts->device_path, "Device descriptor file")
      ->required();
  query->add_option("--rh-type", opts->rh_type, "ssrh or dsrh")
      ->capture_default_str();
  query->add_option("--puf-address", opts->puf_address,
                    "First row of the hammer/PUF pattern")
      ->capture_default_str();
  query->add_option("--puf-size", opts->puf_size,
                    "Total PUF row bytes (K/KB/M suffixes)")
      ->capture_default_str();
  query->add_option("--hammer-iv", opts->hammer_iv,
                    "Hammer row initial value byte")
      ->capture_default_str();
  query->add_option("--puf-iv", opts->puf_iv, "PUF row initial value byte")
      ->capture_default_str();
  query->add_option("--rh-time", opts->rh_time, "Hammer duration in seconds")
      ->capture_default_str();
  query->add_option("--temperature", opts->temperature,
                    "Operating temperature in deg C")
      ->capture_default_str();
  query->add_option("--measurement-seed", opts->measurement_seed,
                    "Per-measurement noise seed")
      ->capture_default_str();
  query->add_flag("--decay-only", opts->decay_only,
                  "Disable hammering; decay alone");
  query->add_option("--out", opts->out_path, "Measurement output path");
  query->add_option("--flips-out", opts->flips_out,
                    "Also write flipped cell indices as CSV");
  query->add_flag("--force", opts->force, "Overwrite existing files");
  query->add_flag("--stamp", opts->stamp, "Embed a creation timestamp");

  query->callback([opts, &state] {
    const hp::Workspace ws = state.workspace();
    const hp::DramDevice dev = load_device(opts->device_path);
    hp::PufConfig config;
    config.rh_type = hp::rh_type_from_string(opts->rh_type);
    config.puf_address = opts->puf_address;
    config.puf_size = parse_size(opts->puf_size);
    config.hammer_row_iv = parse_iv(opts->hammer_iv);
    config.puf_row_iv = parse_iv(opts->puf_iv);
    config.rh_time = opts->rh_time;
    config.temperature_C = opts->temperature;
    hp::validate(config, dev.geometry());

    hp::Measurement m = opts->decay_only
        ? hp::simulate_decay_only(dev, config, opts->measurement_seed)
        : hp::simulate_query(dev, config, opts->measurement_seed);
    if (opts->stamp) m.created_at = hp::now_iso8601_utc();

    std::filesystem::path out;
    if (opts->out_path.empty()) {
      std::ostringstream name;
      name << "measurement-" << short_id(dev.device_id()) << '-'
           << short_id(hp::config_fingerprint(config)) << "-s"
           << opts->measurement_seed << (opts->decay_only ? "-decay" : "")
           << ".json";
      out = ws.measurements_dir() / name.str();
    } else {
      out = opts->out_path;
    }
    hp::atomic_write(out, hp::measurement_to_json(m).dump(2) + "\n",
                     opts->force);
    if (!opts->flips_out.empty()) {
      const hp::FlipSet fs = hp::extract_flip_set(m);
      std::ostringstream lines;  // sorted global bit indices, one per line
      for (std::uint32_t idx : fs.indices) lines << idx << '\n';
      hp::atomic_write(opts->flips_out, lines.str(), opts->force);
    }
    std::printf("flips %llu\n%s\n",
                static_cast<unsigned long long>(m.flip_count()),
                out.string().c_str());
  });
}

struct MetricsOpts {
  std::string mode;
  std::vector<std::string> files;
  std::string pairs_out;
  std::string out_path;
  std::uint64_t cells = 0;
  std::uint64_t flips = 0;
  bool force = false;
};

void add_metrics(CLI::App& app) {
  auto* metrics = app.add_subcommand("metrics", "Flip-set statistics");
  auto opts = std::make_shared<MetricsOpts>();
  metrics->add_option("--mode", opts->mode, "intra, inter, or entropy")
      ->required()
      ->check(CLI::IsMember({"intra", "inter", "entropy"}));
  metrics->add_option("files", opts->files, "Measurement files");
  metrics->add_option("--pairs-out", opts->pairs_out,
                      "Write per-pair Jaccard values as CSV");
  metrics->add_option("--out", opts->out_path,
                      "Write the summary JSON to a file instead of stdout");
  CLI::Option* cells_opt =
      metrics->add_option("--cells", opts->cells,
                          "Entropy mode: total cell count");
  CLI::Option* flips_opt =
      metrics->add_option("--flips", opts->flips,
                          "Entropy mode: observed flip count");
  metrics->add_flag("--force", opts->force, "Overwrite existing files");

  metrics->callback([opts, cells_opt, flips_opt] {
    nlohmann::json summary;
    std::vector<hp::PairRecord> pairs;

    if (opts->mode == "entropy") {
      std::uint64_t n = opts->cells, k = opts->flips;
      if (cells_opt->count() == 0 || flips_opt->count() == 0) {
        if (opts->files.empty()) {
          throw hp::ConfigError(
              "entropy mode needs measurement files or --cells and --flips");
        }
        std::uint64_t min_flips = UINT64_MAX;
        std::optional<std::uint64_t> bits;
        for (const std::string& f : opts->files) {
          const hp::Measurement m = load_measurement(f);
          if (bits && *bits != m.config.puf_bits()) {
            throw hp::ConfigError(
                "entropy mode: PUF sizes differ across files");
          }
          bits = m.config.puf_bits();
          min_flips = std::min(min_flips, m.flip_count());
        }
        n = *bits;
        k = min_flips;
      }
      const double fraction = hp::entropy_fraction(n, k);
      summary = {{"mode", "entropy"},
                 {"cells", n},
                 {"flips", k},
                 {"entropy_bits", hp::entropy_bits(n, k)},
                 {"entropy_fraction", fraction},
                 {"key_bytes_for_128_bits",
                  hp::key_material_size(128, fraction)}};
    } else {
      if (opts->files.size() < 2) {
        throw hp::ConfigError(opts->mode + " mode needs at least 2 files");
      }
      std::vector<hp::Measurement> measurements;
      for (const std::string& f : opts->files) {
        measurements.push_back(load_measurement(f));
      }
      hp::JaccardStats stats;
      if (opts->mode == "intra") {
        stats = hp::j_intra(measurements);
        std::vector<hp::FlipSet> sets;
        for (const hp::Measurement& m : measurements) {
          sets.push_back(hp::extract_flip_set(m));
        }
        pairs = hp::intra_pairs(sets);
      } else {
        std::map<std::string, std::vector<hp::Measurement>> by_device;
        for (hp::Measurement& m : measurements) {
          by_device[m.device_id].push_back(std::move(m));
        }
        std::vector<std::vector<hp::Measurement>> groups;
        std::vector<std::vector<hp::FlipSet>> group_sets;
        for (auto& [id, group] : by_device) {
          std::vector<hp::FlipSet> sets;
          for (const hp::Measurement& m : group) {
            sets.push_back(hp::extract_flip_set(m));
          }
          groups.push_back(std::move(group));
          group_sets.push_back(std::move(sets));
        }
        stats = hp::j_inter(groups);
        pairs = hp::inter_pairs(group_sets);
      }
      summary = {{"mode", opts->mode},
                 {"count", stats.count},
                 {"min", stats.min},
                 {"max", stats.max},
                 {"mean", stats.mean}};
    }

    if (!opts->pairs_out.empty()) {
      hp::atomic_write(opts->pairs_out, pairs_csv(pairs), opts->force);
    }
    if (opts->out_path.empty()) {
      std::cout << summary.dump(2) << "\n";
    } else {
      hp::atomic_write(opts->out_path, summary.dump(2) + "\n", opts->force);
      std::cout << opts->out_path << "\n";
    }
  });
}

struct EnrollOpts {
  std::vector<std::string> files;
  std::uint32_t key_bits = 128;
  std::uint32_t repetition = 7;
  std::uint32_t fold_width = 32;
  std::uint64_t fe_seed = 0;
  std::uint64_t rng_seed = 0;
  std::string helper_out;
  bool reveal_key = false;
  bool force = false;
};

struct ReconstructOpts {
  std::string helper_path;
  std::string measurement_path;
  bool reveal_key = false;
};

void add_fe(CLI::App& app, CliState& state) {
  auto* fe = app.add_subcommand("fe", "Fuzzy extractor");
  fe->require_subcommand(1);

  auto* enroll = fe->add_subcommand("enroll", "Derive a key and helper data");
  auto eopts = std::make_shared<EnrollOpts>();
  enroll->add_option("files", eopts->files, "Enrollment measurement files")
      ->required();
  enroll->add_option("--key-bits", eopts->key_bits, "Key length in bits")
      ->capture_default_str();
  enroll->add_option("--repetition", eopts->repetition,
                     "Repetition code length (odd)")
      ->capture_default_str();
  enroll->add_option("--fold-width", eopts->fold_width,
                     "Cells XORed per code position")
      ->capture_default_str();
  enroll->add_option("--fe-seed", eopts->fe_seed,
                     "Seed for the public cell-position draw")
      ->capture_default_str();
  enroll->add_option("--rng-seed", eopts->rng_seed,
                     "Seed for the enrolled key bits")
      ->capture_default_str();
  enroll->add_option("--helper-out", eopts->helper_out, "Helper data path");
  enroll->add_flag("--reveal-key", eopts->reveal_key,
                   "Print the derived key in hex");
  enroll->add_flag("--force", eopts->force, "Overwrite an existing file");

  enroll->callback([eopts, &state] {
    const hp::Workspace ws = state.workspace();
    std::vector<hp::Measurement> measurements;
    for (const std::string& f : eopts->files) {
      measurements.push_back(load_measurement(f));
    }
    hp::FeParams params;
    params.key_bits = eopts->key_bits;
    params.repetition = eopts->repetition;
    params.enroll_count = static_cast<std::uint32_t>(measurements.size());
    params.fold_width = eopts->fold_width;
    params.fe_seed = eopts->fe_seed;

    auto [key, helper] = hp::enroll(measurements, params, eopts->rng_seed);
    const std::filesystem::path out = eopts->helper_out.empty()
        ? ws.helpers_dir() /
              ("helper-" + short_id(measurements.front().device_id) + '-' +
               short_id(helper.config_fingerprint) + ".json")
        : std::filesystem::path(eopts->helper_out);
    hp::atomic_write(out, hp::helper_to_json(helper).dump(2) + "\n",
                     eopts->force);
    std::printf("key_check %s\n%s\n", helper.key_check_hex.c_str(),
                out.string().c_str());
    if (eopts->reveal_key) {
      std::printf("key %s\n", hp::detail::to_hex(key).c_str());
    }
  });

  auto* rec = fe->add_subcommand("reconstruct",
                                 "Rebuild the key from one fresh measurement");
  auto ropts = std::make_shared<ReconstructOpts>();
  rec->add_option("--helper", ropts->helper_path, "Helper data file")
      ->required();
  rec->add_option("measurement", ropts->measurement_path,
                  "Fresh measurement file")
      ->required();
  rec->add_flag("--reveal-key", ropts->reveal_key,
                "Print the reconstructed key in hex");

  rec->callback([ropts] {
    const hp::HelperData helper =
        hp::helper_from_json(hp::load_json(ropts->helper_path));
    const hp::Measurement m = load_measurement(ropts->measurement_path);
    const auto key = hp::reconstruct(m, helper);
    if (!key) {
      throw DomainError(
          "reconstruction failed: decoded key does not match key_check");
    }
    std::printf("reconstructed key_check %s\n", helper.key_check_hex.c_str());
    if (ropts->reveal_key) {
      std::printf("key %s\n", hp::detail::to_hex(*key).c_str());
    }
  });
}

void write_report_files(const hp::ExperimentReport& report,
                        const std::filesystem::path& out_dir, bool force,
                        bool stamp) {
  nlohmann::json j = report.to_json();
  if (stamp) j["runtime"]["created_at"] = hp::now_iso8601_utc();
  hp::atomic_write(out_dir / "report.json", j.dump(2) + "\n", force);
  for (const auto& [name, content] : report.csv_files) {
    hp::atomic_write(out_dir / name, content, force);
  }
  if (!report.histogram_svg.empty()) {
    hp::atomic_write(out_dir / "histogram.svg", report.histogram_svg, force);
  }
}

struct ExperimentOpts {
  std::string name;
  std::uint64_t master_seed = 1;
  double scale = 1.0;
  std::uint32_t repetitions = 20;
  std::uint32_t devices = 3;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string out_dir;
  std::string params_path;
  std::string targets_path;
  std::uint64_t budget = 1500;
  std::string from_path;
  std::string calib_out;
  bool svg = false;
  bool force = false;
  bool stamp = false;
};

void add_experiment(CLI::App& app, CliState& state) {
  auto* exp = app.add_subcommand(
      "experiment", "Replication studies and the calibration fit");
  auto opts = std::make_shared<ExperimentOpts>();
  exp->add_option("name", opts->name, "Experiment name")
      ->required()
      ->check(CLI::IsMember({"iv-matrix", "temperature", "rh-type", "decay",
                             "uniqueness", "calibrate"}));
  exp->add_option("--master-seed", opts->master_seed,
                  "Master seed for devices and measurements")
      ->capture_default_str();
  exp->add_option("--scale", opts->scale,
                  "Shrink PUF size and repetitions (1.0 = full size)")
      ->check(CLI::Range(0.001, 1.0))
      ->capture_default_str();
  exp->add_option("--repetitions", opts->repetitions,
                  "Measurements per grid cell")
      ->capture_default_str();
  exp->add_option("--devices", opts->devices,
                  "Simulated devices (uniqueness experiment)")
      ->capture_default_str();
  exp->add_option("--threads", opts->threads, "Parallel workers")
      ->capture_default_str();
  exp->add_option("--out-dir", opts->out_dir, "Report output directory");
  exp->add_option("--params", opts->params_path, "Model parameter file");
  exp->add_option("--targets", opts->targets_path,
                  "Targets file (defaults to the shipped bands)");
  exp->add_option("--budget", opts->budget,
                  "Calibration: objective evaluation budget")
      ->capture_default_str();
  exp->add_option("--from", opts->from_path,
                  "Calibration: starting parameter file");
  exp->add_option("--out", opts->calib_out,
                  "Calibration: candidate parameter output path");
  exp->add_flag("--svg", opts->svg, "Render the uniqueness histogram as SVG");
  exp->add_flag("--force", opts->force, "Overwrite existing report files");
  exp->add_flag("--stamp", opts->stamp, "Embed a creation timestamp");

  exp->callback([opts, &state] {
    const hp::Workspace ws = state.workspace();
    const hp::TargetSet targets = opts->targets_path.empty()
        ? hp::TargetSet::defaults()
        : hp::TargetSet::from_json(hp::load_json(opts->targets_path));
    const std::filesystem::path out_dir = opts->out_dir.empty()
        ? ws.reports_dir() /
              (opts->name + "-" + std::to_string(opts->master_seed))
        : std::filesystem::path(opts->out_dir);
    const hp::Geometry geometry;

    if (opts->name == "calibrate") {
      hp::ModelParams start;
      if (!opts->from_path.empty()) {
        start = hp::load_json(opts->from_path).get<hp::ModelParams>();
      }
      const hp::CalibrationResult result =
          hp::calibrate(targets, start, geometry, opts->budget);
      const std::filesystem::path params_out = opts->calib_out.empty()
          ? ws.root / "calibration" / "candidate-model-params.json"
          : std::filesystem::path(opts->calib_out);
      hp::atomic_write(params_out,
                       nlohmann::json(result.params).dump(2) + "\n",
                       opts->force);
      nlohmann::json report{{"format_version", hp::kFormatVersion},
                            {"experiment", "calibrate"},
                            {"objective", result.objective},
                            {"evaluations", result.evaluations},
                            {"all_within", result.all_within},
                            {"params", result.params},
                            {"residuals", result.residuals}};
      hp::atomic_write(out_dir / "report.json", report.dump(2) + "\n",
                       opts->force);
      print_target_lines(result.residuals);
      std::printf(
          "objective %.6g after %llu evaluations%s\n", result.objective,
          static_cast<unsigned long long>(result.evaluations),
          result.all_within ? "" : " (partial: not all targets within band)");
      std::printf("%s\n%s\n", params_out.string().c_str(),
                  (out_dir / "report.json").string().c_str());
      return;
    }

    const hp::ModelParams params = resolve_model_params(ws, opts->params_path);
    const std::uint64_t device_seed = hp::detail::combine(
        hp::detail::mix64(opts->master_seed), hp::detail::kSaltDevice);
    hp::PufConfig base;  // defaults: SSRH, 128 KB, 0x55/0xAA, 120 s, 40 C

    hp::ExperimentReport report;
    if (opts->name == "iv-matrix") {
      const hp::DramDevice dev(device_seed, geometry, params);
      report = hp::run_iv_matrix(dev, base, opts->repetitions,
                                 opts->master_seed, targets, opts->scale,
                                 opts->threads);
    } else if (opts->name == "temperature") {
      const hp::DramDevice dev(device_seed, geometry, params);
      report = hp::run_temperature_sweep(dev, base, {40.0, 50.0, 60.0},
                                         opts->repetitions, opts->master_seed,
                                         targets, opts->scale, opts->threads);
    } else if (opts->name == "rh-type") {
      const hp::DramDevice dev(device_seed, geometry, params);
      report = hp::run_rh_type_comparison(
          dev, base, {4096, 32768, 131072}, {60.0, 120.0}, opts->repetitions,
          opts->master_seed, targets, opts->scale, opts->threads);
    } else if (opts->name == "decay") {
      const hp::DramDevice dev(device_seed, geometry, params);
      report = hp::run_decay_comparison(dev, base, {60.0, 120.0},
                                        opts->repetitions, opts->master_seed,
                                        targets, opts->scale, opts->threads);
    } else {  // uniqueness
      if (opts->devices < 2) {
        throw hp::ConfigError("uniqueness experiment needs --devices >= 2");
      }
      std::vector<std::uint64_t> seeds;
      for (std::uint32_t d = 0; d < opts->devices; ++d) {
        seeds.push_back(hp::detail::combine(device_seed, d + 1));
      }
      report = hp::run_uniqueness(seeds, geometry, params, base,
                                  opts->repetitions, opts->master_seed,
                                  targets, opts->scale, opts->threads,
                                  opts->svg);
    }

    write_report_files(report, out_dir, opts->force, opts->stamp);
    print_target_lines(report.targets);
    std::printf("%s %s in %lld ms\n", opts->name.c_str(),
                report.all_pass() ? "ok" : "targets failed",
                static_cast<long long>(report.elapsed_ms));
    std::printf("%s\n", (out_dir / "report.json").string().c_str());
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DRAM decay and disturbance simulator with PUF evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hammerpuf::kLibraryVersion);

  CliState state;
  app.add_option("--workspace", state.workspace_flag,
                 "Workspace root (or HAMMERPUF_WORKSPACE, default "
                 "./hammerpuf-workspace)");

  add_device_gen(app, state);
  add_puf_query(app, state);
  add_metrics(app);
  add_fe(app, state);
  add_experiment(app, state);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const hammerpuf::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

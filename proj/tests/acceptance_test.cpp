// Acceptance suite: one test per release criterion, each ending in an
// explicit "CRITERION n PASS/FAIL" line. Bands come from the checked-in
// calibration targets file, and the statistical criteria run at full scale
// (128 KB region, 20 repetitions, 3 devices).
#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "hammerpuf/hammerpuf.hpp"

namespace hp = hammerpuf;

namespace {

void report_criterion(int n, const std::string& text) {
  const bool ok = !::testing::Test::HasFailure();
  std::printf("CRITERION %d %s: %s\n", n, ok ? "PASS" : "FAIL", text.c_str());
  std::fflush(stdout);
}

const hp::TargetSet& bands() {
  static const hp::TargetSet set = hp::TargetSet::from_json(hp::load_json(
      std::string(HAMMERPUF_SOURCE_DIR) + "/data/calibration-targets.json"));
  return set;
}

// Same seed chain the experiment commands use for master seed 1, so the
// checks below reproduce the reference reports exactly.
std::uint64_t reference_device_seed() {
  return hp::detail::combine(hp::detail::mix64(1), hp::detail::kSaltDevice);
}

const hp::DramDevice& reference_device() {
  static const hp::DramDevice dev(reference_device_seed(), hp::Geometry{},
                                  hp::ModelParams{});
  return dev;
}

const hp::ExperimentReport& full_iv_report() {
  static const hp::ExperimentReport rep =
      hp::run_iv_matrix(reference_device(), hp::PufConfig{}, 20, 1, bands());
  return rep;
}

void expect_band(const hp::ExperimentReport& rep, const std::string& name) {
  const hp::TargetCheck* c = rep.check(name);
  ASSERT_NE(c, nullptr) << "missing check " << name;
  EXPECT_FALSE(c->skipped) << name << " was skipped";
  EXPECT_TRUE(c->pass) << name << " value " << c->value << " outside ["
                       << c->min << ", " << c->max << "]";
}

double grid_mean(const hp::ExperimentReport& rep, const char* rh_type,
                 int hammer_iv, int puf_iv) {
  for (const auto& cell : rep.grid) {
    if (cell.at("rh_type") == rh_type && cell.at("hammer_iv") == hammer_iv &&
        cell.at("puf_iv") == puf_iv) {
      return cell.at("mean_flips").get<double>();
    }
  }
  ADD_FAILURE() << "grid cell not found " << rh_type << " " << hammer_iv << "/"
                << puf_iv;
  return -1.0;
}

bool subset_of(const hp::FlipSet& small, const hp::FlipSet& big) {
  return std::includes(big.indices.begin(), big.indices.end(),
                       small.indices.begin(), small.indices.end());
}

void flip_readout_bit(hp::Measurement& m, std::uint64_t index) {
  m.readout[index / 8] ^= static_cast<std::uint8_t>(0x80 >> (index % 8));
}

}  // namespace

TEST(Acceptance, Criterion1ZeroFlipLaw) {
  hp::PufConfig config;  // full 128 KB region
  config.puf_row_iv = 0x55;
  for (int hammer_iv : {0x00, 0x55, 0xAA, 0xFF}) {
    config.hammer_row_iv = static_cast<std::uint8_t>(hammer_iv);
    const hp::Measurement m = hp::simulate_query(reference_device(), config, 1);
    EXPECT_EQ(m.flip_count(), 0u) << "hammer IV " << hammer_iv;
  }
  report_criterion(1, "PUF row IV 0x55 yields exactly 0 flips for every "
                      "hammer row IV (full 128 KB region)");
}

TEST(Acceptance, Criterion2IvMatrixOrdering) {
  const hp::ExperimentReport& rep = full_iv_report();
  const double m00 = grid_mean(rep, "SSRH", 0x00, 0xAA);
  const double m55 = grid_mean(rep, "SSRH", 0x55, 0xAA);
  const double mAA = grid_mean(rep, "SSRH", 0xAA, 0xAA);
  const double mFF = grid_mean(rep, "SSRH", 0xFF, 0xAA);
  EXPECT_GT(m55, mFF);
  EXPECT_GT(m55, m00);
  EXPECT_GT(m00, mAA);
  EXPECT_GT(mFF, mAA);

  // Largest mean over the whole 4x4 IV grid sits at (hammer 0x55, PUF 0xAA).
  for (int hammer_iv : {0x00, 0x55, 0xAA, 0xFF}) {
    for (int puf_iv : {0x00, 0xAA, 0xFF}) {
      if (hammer_iv == 0x55 && puf_iv == 0xAA) continue;
      EXPECT_LT(grid_mean(rep, "SSRH", hammer_iv, puf_iv), m55)
          << hammer_iv << "/" << puf_iv;
    }
  }
  expect_band(rep, "iv_ordering_violations");
  expect_band(rep, "iv_zero_row_max");
  report_criterion(2, "mean flips over 20 repetitions order strictly by "
                      "hammer IV (0x55 > 0xFF, 0x55 > 0x00, 0x00 > 0xAA, "
                      "0xFF > 0xAA) and peak at (0x55, 0xAA)");
}

TEST(Acceptance, Criterion3CalibratedMagnitude) {
  const hp::ExperimentReport& rep = full_iv_report();
  expect_band(rep, "flips_ssrh128_120s_40C");
  expect_band(rep, "flips_hammer_iv_aa_120s");
  EXPECT_TRUE(rep.all_pass());
  const hp::TargetCheck* c = rep.check("flips_ssrh128_120s_40C");
  report_criterion(3, "mean flips at the reference query (" +
                          std::to_string(c ? c->value : -1.0) +
                          ") lie within +/-15% of the calibrated 32904");
}

TEST(Acceptance, Criterion4TemperatureDoubling) {
  const hp::ExperimentReport rep = hp::run_temperature_sweep(
      reference_device(), hp::PufConfig{}, {40.0, 50.0, 60.0}, 20, 1, bands());
  expect_band(rep, "ratio_50C_over_40C");
  expect_band(rep, "ratio_60C_over_50C");
  expect_band(rep, "jintra_min_all_temps");
  expect_band(rep, "jintra_mean_40C");
  expect_band(rep, "jintra_mean_60C");
  EXPECT_TRUE(rep.all_pass());
  report_criterion(4, "flip counts double per +10 C step within [1.6, 2.4] "
                      "and min intra-device Jaccard stays >= 0.94 at "
                      "40/50/60 C");
}

TEST(Acceptance, Criterion5UniquenessSeparation) {
  std::vector<std::uint64_t> seeds;
  for (std::uint32_t d = 0; d < 3; ++d) {
    seeds.push_back(hp::detail::combine(reference_device_seed(), d + 1));
  }
  const hp::ExperimentReport rep =
      hp::run_uniqueness(seeds, hp::Geometry{}, hp::ModelParams{},
                         hp::PufConfig{}, 20, 1, bands());
  expect_band(rep, "jintra_min_40C");
  expect_band(rep, "separation_margin");
  expect_band(rep, "entropy_fraction_uniqueness");
  EXPECT_GT(rep.summary.at("jintra").at("min").get<double>(),
            rep.summary.at("jinter").at("max").get<double>());
  EXPECT_TRUE(rep.all_pass());
  report_criterion(5, "3 devices x 20 measurements: min intra-device "
                      "Jaccard >= 0.9354 and every cross-device Jaccard "
                      "falls below it");
}

TEST(Acceptance, Criterion6DoubleSidedUplift) {
  const hp::ExperimentReport rep = hp::run_rh_type_comparison(
      reference_device(), hp::PufConfig{}, {4096, 32768, 131072},
      {60.0, 120.0}, 20, 1, bands());
  expect_band(rep, "dsrh_uplift_120s");
  EXPECT_TRUE(rep.all_pass());
  const hp::TargetCheck* c = rep.check("dsrh_uplift_120s");
  report_criterion(6, "double-sided hammering flips " +
                          std::to_string(c ? c->value * 100.0 : -1.0) +
                          "% more cells than single-sided at 120 s "
                          "(band 5..25%)");
}

TEST(Acceptance, Criterion7DecayBaseline) {
  const hp::ExperimentReport rep = hp::run_decay_comparison(
      reference_device(), hp::PufConfig{}, {60.0, 120.0}, 20, 1, bands());
  expect_band(rep, "hammer_over_decay_60s");
  expect_band(rep, "hammer_over_decay_120s");
  expect_band(rep, "hammer_decay_jaccard");
  EXPECT_TRUE(rep.all_pass());
  report_criterion(7, "hammering beats pure decay by 2.0-2.8x at 60 s and "
                      "1.7-2.3x at 120 s, with flip-set Jaccard < 0.95");
}

TEST(Acceptance, Criterion8EntropyOracle) {
  // Independent oracle: exact 64-bit Pascal triangle (C(64,32) < 2^61).
  std::uint64_t binom[65][65] = {};
  for (int n = 0; n <= 64; ++n) {
    binom[n][0] = 1;
    for (int k = 1; k <= n; ++k) {
      binom[n][k] = binom[n - 1][k - 1] + (k <= n - 1 ? binom[n - 1][k] : 0);
    }
  }
  for (std::uint64_t n = 0; n <= 64; ++n) {
    for (std::uint64_t k = 0; k <= n; ++k) {
      const double exact =
          static_cast<double>(std::log2l(static_cast<long double>(binom[n][k])));
      const double got = hp::entropy_bits(n, k);
      if (exact == 0.0) {
        ASSERT_NEAR(got, 0.0, 1e-12) << n << " choose " << k;
      } else {
        ASSERT_NEAR(got, exact, 1e-9 * exact) << n << " choose " << k;
      }
    }
  }
  EXPECT_NEAR(hp::entropy_fraction(1048576, 30994), 0.192, 0.001);
  EXPECT_EQ(hp::key_material_size(128, 0.192), 84u);
  report_criterion(8, "entropy_bits matches exact log2-binomial to 1e-9 "
                      "relative for all N <= 64; fraction(1048576, 30994) = "
                      "0.192 +/- 0.001; 128-bit key needs 84 bytes");
}

TEST(Acceptance, Criterion9FuzzyExtractor) {
  // (a) Zero measurement noise: reconstruction is exact.
  {
    hp::ModelParams quiet;
    quiet.noise_log_sd = 0.0;
    const hp::DramDevice dev(3, hp::Geometry{}, quiet);
    hp::PufConfig config;
    config.puf_size = 16384;
    std::vector<hp::Measurement> enrollment;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      enrollment.push_back(hp::simulate_query(dev, config, s));
    }
    auto [key, helper] = hp::enroll(enrollment, hp::FeParams{}, 11);
    const auto out =
        hp::reconstruct(hp::simulate_query(dev, config, 99), helper);
    ASSERT_TRUE(out.has_value());
    EXPECT_EQ(*out, key);
  }

  // (b) Majority decoding equals exhaustive nearest-codeword search over
  // every noise pattern of one repetition block.
  {
    hp::PufConfig config;
    config.puf_size = 8192;
    const hp::Measurement m =
        hp::simulate_query(reference_device(), config, 7);
    for (std::uint32_t rho : {3u, 5u, 7u}) {
      hp::FeParams params;
      params.key_bits = 8;
      params.repetition = rho;
      params.enroll_count = 1;
      params.fold_width = 1;
      auto [key, helper] = hp::enroll({m}, params, 5);
      for (std::uint32_t pattern = 0; pattern < (1u << rho); ++pattern) {
        hp::Measurement noisy = m;
        for (std::uint32_t i = 0; i < rho; ++i) {
          if (pattern & (1u << i)) flip_readout_bit(noisy, helper.positions[i]);
        }
        const auto out = hp::reconstruct(noisy, helper);
        const bool nearest_is_correct =
            std::popcount(pattern) <= static_cast<int>(rho / 2);
        ASSERT_EQ(out.has_value(), nearest_is_correct)
            << "rho " << rho << " pattern " << pattern;
        if (out) {
          ASSERT_EQ(*out, key);
        }
      }
    }
  }

  // (c) Calibrated noise: >= 99 of 100 fresh measurements reproduce the key.
  {
    const hp::PufConfig config;  // full-size reference query
    std::vector<hp::Measurement> enrollment;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      enrollment.push_back(hp::simulate_query(reference_device(), config, s));
    }
    auto [key, helper] = hp::enroll(enrollment, hp::FeParams{}, 11);
    int ok = 0;
    for (std::uint64_t s = 100; s < 200; ++s) {
      const auto out = hp::reconstruct(
          hp::simulate_query(reference_device(), config, s), helper);
      if (out && *out == key) ++ok;
    }
    EXPECT_GE(ok, 99);
  }

  // (d) Cross-device measurements are rejected >= 999 of 1000 times.
  {
    hp::PufConfig config;
    config.rh_type = hp::RhType::DSRH;
    config.puf_size = 4096;
    const hp::DramDevice owner(500, hp::Geometry{}, hp::ModelParams{});
    std::vector<hp::Measurement> enrollment;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      enrollment.push_back(hp::simulate_query(owner, config, s));
    }
    auto [key, helper] = hp::enroll(enrollment, hp::FeParams{}, 11);
    int rejected = 0;
    for (std::uint64_t d = 0; d < 1000; ++d) {
      const hp::DramDevice foreign(10000 + d, hp::Geometry{},
                                   hp::ModelParams{});
      const auto out =
          hp::reconstruct(hp::simulate_query(foreign, config, 1), helper);
      if (!out.has_value()) ++rejected;
    }
    EXPECT_GE(rejected, 999);
  }
  report_criterion(9, "key reconstruction: exact under zero noise, majority "
                      "decode = nearest codeword on all patterns, >= 99/100 "
                      "fresh-measurement successes, >= 999/1000 cross-device "
                      "rejections");
}

TEST(Acceptance, Criterion10Determinism) {
  // Whole experiment suite, run twice with the same master seed but a
  // different worker count; reports (minus runtimes), CSVs, and the SVG
  // must be identical.
  const auto run_suite = [](unsigned threads) {
    std::vector<hp::ExperimentReport> reports;
    const hp::DramDevice& dev = reference_device();
    const double scale = 0.25;
    reports.push_back(
        hp::run_iv_matrix(dev, hp::PufConfig{}, 20, 7, bands(), scale, threads));
    reports.push_back(hp::run_temperature_sweep(dev, hp::PufConfig{},
                                                {40.0, 50.0, 60.0}, 20, 7,
                                                bands(), scale, threads));
    reports.push_back(hp::run_rh_type_comparison(
        dev, hp::PufConfig{}, {4096, 32768, 131072}, {60.0, 120.0}, 20, 7,
        bands(), scale, threads));
    reports.push_back(hp::run_decay_comparison(
        dev, hp::PufConfig{}, {60.0, 120.0}, 20, 7, bands(), scale, threads));
    std::vector<std::uint64_t> seeds;
    for (std::uint32_t d = 0; d < 3; ++d) {
      seeds.push_back(hp::detail::combine(reference_device_seed(), d + 1));
    }
    reports.push_back(hp::run_uniqueness(seeds, hp::Geometry{},
                                         hp::ModelParams{}, hp::PufConfig{},
                                         20, 7, bands(), scale, threads,
                                         true));
    return reports;
  };

  const std::vector<hp::ExperimentReport> first = run_suite(1);
  const std::vector<hp::ExperimentReport> second = run_suite(2);
  ASSERT_EQ(first.size(), second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    SCOPED_TRACE(first[i].experiment);
    const nlohmann::json a = hp::strip_volatile(first[i].to_json());
    const nlohmann::json b = hp::strip_volatile(second[i].to_json());
    EXPECT_EQ(hp::detail::sha256_hex(a.dump()), hp::detail::sha256_hex(b.dump()));
    EXPECT_EQ(first[i].csv_files, second[i].csv_files);
    EXPECT_EQ(first[i].histogram_svg, second[i].histogram_svg);
  }
  report_criterion(10, "experiment suite re-run with identical seeds hashes "
                       "to identical reports, CSVs, and plots (timestamps "
                       "and runtimes excluded), independent of worker count");
}

TEST(Acceptance, Criterion11StructureAndMonotonicity) {
  // Pattern builder layouts.
  const hp::Geometry geometry;
  EXPECT_EQ(hp::build_row_pattern(hp::RhType::DSRH, 12 * 1024, geometry, 0)
                .pattern_string(),
            "HVHVHVH");
  EXPECT_EQ(hp::build_row_pattern(hp::RhType::SSRH, 16 * 1024, geometry, 0)
                .pattern_string(),
            "HVVHVVH");
  EXPECT_EQ(hp::build_row_pattern(hp::RhType::SSRH, 131072, geometry, 0)
                .hammer_row_indices.size(),
            17u);

  // With jitter disabled the flip set can only grow with time/temperature.
  hp::ModelParams quiet;
  quiet.noise_log_sd = 0.0;
  const hp::DramDevice dev(9, geometry, quiet);
  hp::PufConfig config;
  config.puf_size = 16384;

  hp::FlipSet prev;
  for (double t : {30.0, 60.0, 120.0, 240.0}) {
    config.rh_time = t;
    const hp::FlipSet cur =
        hp::extract_flip_set(hp::simulate_query(dev, config, 1));
    if (!prev.indices.empty()) {
      EXPECT_TRUE(subset_of(prev, cur)) << "rh_time " << t;
      EXPECT_GT(cur.size(), prev.size()) << "rh_time " << t;
    }
    prev = cur;
  }

  config.rh_time = 120.0;
  prev = hp::FlipSet{};
  for (double temp : {40.0, 50.0, 60.0}) {
    config.temperature_C = temp;
    const hp::FlipSet cur =
        hp::extract_flip_set(hp::simulate_query(dev, config, 1));
    if (!prev.indices.empty()) {
      EXPECT_TRUE(subset_of(prev, cur)) << "temperature " << temp;
      EXPECT_GT(cur.size(), prev.size()) << "temperature " << temp;
    }
    prev = cur;
  }
  report_criterion(11, "hammer/victim layouts match the reference patterns "
                       "(17 hammer rows at 128 KB) and zero-jitter flip sets "
                       "grow monotonically with time and temperature");
}

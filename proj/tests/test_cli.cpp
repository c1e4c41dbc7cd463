#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hammerpuf/workspace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hammerpuf-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ws_ = dir_ / "ws";
  }

  void TearDown() override {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  std::string slurp(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
  }

  // Runs the CLI with the workspace flag prepended; args is a shell fragment.
  CmdResult run(const std::string& args, bool with_workspace = true) {
    static int counter = 0;
    const fs::path out = dir_ / ("stdout-" + std::to_string(counter));
    const fs::path err = dir_ / ("stderr-" + std::to_string(counter));
    ++counter;
    std::string cmd = std::string("\"") + HAMMERPUF_CLI_PATH + "\" ";
    if (with_workspace) cmd += "--workspace \"" + ws_.string() + "\" ";
    cmd += args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
    const int rc = std::system(cmd.c_str());
    CmdResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  // First whitespace-separated token after `key ` on any stdout line.
  static std::string value_after(const std::string& text,
                                 const std::string& key) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind(key + " ", 0) == 0) return line.substr(key.size() + 1);
    }
    return {};
  }

  static std::string line_at(const std::string& text, int index) {
    std::istringstream in(text);
    std::string line;
    for (int i = 0; std::getline(in, line); ++i) {
      if (i == index) return line;
    }
    return {};
  }

  fs::path dir_;
  fs::path ws_;
};

}  // namespace

TEST_F(CliTest, HelpAndVersionExitCleanly) {
  const CmdResult help = run("--help", false);
  EXPECT_EQ(help.code, 0);
  for (const char* sub : {"device", "puf", "metrics", "fe", "experiment"}) {
    EXPECT_NE(help.out.find(sub), std::string::npos) << sub;
  }
  const CmdResult version = run("--version", false);
  EXPECT_EQ(version.code, 0);
  EXPECT_NE(version.out.find('.'), std::string::npos);
}

TEST_F(CliTest, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(run("bogus").code, 2);
  EXPECT_EQ(run("").code, 2);  // subcommand required
}

TEST_F(CliTest, DeviceGenIsDeterministicAndGuarded) {
  const CmdResult first = run("device gen --seed 1");
  ASSERT_EQ(first.code, 0) << first.err;
  const std::string id = value_after(first.out, "device");
  EXPECT_EQ(id.size(), 16u);
  const fs::path path = line_at(first.out, 1);
  ASSERT_TRUE(fs::exists(path));

  // Existing descriptor is protected.
  const CmdResult again = run("device gen --seed 1");
  EXPECT_EQ(again.code, 2);
  EXPECT_NE(again.err.find("--force"), std::string::npos);

  // Same seed regenerates byte-identical content.
  const std::string bytes = slurp(path);
  const CmdResult forced = run("device gen --seed 1 --force");
  ASSERT_EQ(forced.code, 0);
  EXPECT_EQ(slurp(path), bytes);
  EXPECT_EQ(value_after(forced.out, "device"), id);

  const CmdResult other = run("device gen --seed 2");
  ASSERT_EQ(other.code, 0);
  EXPECT_NE(value_after(other.out, "device"), id);
}

TEST_F(CliTest, DeviceGenRejectsBadGeometry) {
  const CmdResult r = run("device gen --seed 1 --rows 2");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("rows"), std::string::npos);
}

TEST_F(CliTest, QueryIsDeterministicAndParsesIvForms) {
  ASSERT_EQ(run("device gen --seed 1").code, 0);
  const fs::path dev = ws_ / "devices";
  const std::string dev_file = fs::directory_iterator(dev)->path().string();

  const std::string base = "puf query --device \"" + dev_file +
                           "\" --puf-size 16K --measurement-seed 3";
  const CmdResult a = run(base + " --out \"" + (dir_ / "a.json").string() + "\"");
  ASSERT_EQ(a.code, 0) << a.err;
  const CmdResult b = run(base + " --out \"" + (dir_ / "b.json").string() + "\"");
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(slurp(dir_ / "a.json"), slurp(dir_ / "b.json"));
  const std::string flips = value_after(a.out, "flips");
  EXPECT_GT(std::stoull(flips), 0u);

  // 0x prefix and decimal IVs are both accepted and equivalent.
  const CmdResult hex_iv = run(base + " --puf-iv 0xAA --hammer-iv 85 --out \"" +
                               (dir_ / "c.json").string() + "\"");
  ASSERT_EQ(hex_iv.code, 0);
  EXPECT_EQ(slurp(dir_ / "c.json"), slurp(dir_ / "a.json"));

  const CmdResult bad = run(base + " --puf-iv 0x1ZZ --force");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("IV"), std::string::npos);

  const CmdResult big = run(base + " --puf-iv 256 --force");
  EXPECT_EQ(big.code, 2);
}

TEST_F(CliTest, DecayOnlyFlipsFewerCells) {
  ASSERT_EQ(run("device gen --seed 1").code, 0);
  const std::string dev_file =
      fs::directory_iterator(ws_ / "devices")->path().string();
  const std::string base = "puf query --device \"" + dev_file +
                           "\" --puf-size 32K --measurement-seed 1";
  const CmdResult hammer = run(base);
  ASSERT_EQ(hammer.code, 0) << hammer.err;
  const CmdResult decay = run(base + " --decay-only");
  ASSERT_EQ(decay.code, 0);
  const auto nh = std::stoull(value_after(hammer.out, "flips"));
  const auto nd = std::stoull(value_after(decay.out, "flips"));
  EXPECT_GT(nd, 0u);
  EXPECT_GT(nh, nd);
}

TEST_F(CliTest, FlipsOutIsOneIndexPerLine) {
  ASSERT_EQ(run("device gen --seed 1").code, 0);
  const std::string dev_file =
      fs::directory_iterator(ws_ / "devices")->path().string();
  const fs::path flips_path = dir_ / "flips.txt";
  const CmdResult r = run("puf query --device \"" + dev_file +
                          "\" --puf-size 16K --measurement-seed 3 "
                          "--flips-out \"" + flips_path.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto expected = std::stoull(value_after(r.out, "flips"));
  std::ifstream in(flips_path);
  std::string line;
  std::uint64_t count = 0, prev = 0;
  bool first = true;
  while (std::getline(in, line)) {
    const std::uint64_t v = std::stoull(line);  // throws on non-numeric
    if (!first) {
      EXPECT_GT(v, prev);
    }
    prev = v;
    first = false;
    ++count;
  }
  EXPECT_EQ(count, expected);
  EXPECT_LT(prev, 16u * 1024u * 8u);
}

TEST_F(CliTest, MetricsModesProduceSummaries) {
  ASSERT_EQ(run("device gen --seed 1").code, 0);
  ASSERT_EQ(run("device gen --seed 2").code, 0);
  std::vector<std::string> devs;
  for (const auto& e : fs::directory_iterator(ws_ / "devices")) {
    devs.push_back(e.path().string());
  }
  ASSERT_EQ(devs.size(), 2u);

  std::vector<std::string> files_a, files_b;
  for (int s = 1; s <= 3; ++s) {
    const fs::path out = dir_ / ("a" + std::to_string(s) + ".json");
    ASSERT_EQ(run("puf query --device \"" + devs[0] +
                  "\" --puf-size 16K --measurement-seed " + std::to_string(s) +
                  " --out \"" + out.string() + "\"").code, 0);
    files_a.push_back(out.string());
    const fs::path outb = dir_ / ("b" + std::to_string(s) + ".json");
    ASSERT_EQ(run("puf query --device \"" + devs[1] +
                  "\" --puf-size 16K --measurement-seed " + std::to_string(s) +
                  " --out \"" + outb.string() + "\"").code, 0);
    files_b.push_back(outb.string());
  }

  const CmdResult intra = run("metrics --mode intra \"" + files_a[0] + "\" \"" +
                              files_a[1] + "\" \"" + files_a[2] + "\"");
  ASSERT_EQ(intra.code, 0) << intra.err;
  const json ji = json::parse(intra.out);
  EXPECT_EQ(ji.at("mode"), "intra");
  EXPECT_EQ(ji.at("count"), 3);
  EXPECT_GT(ji.at("min").get<double>(), 0.9);
  EXPECT_LE(ji.at("max").get<double>(), 1.0);

  const fs::path inter_out = dir_ / "inter.json";
  const fs::path pairs_out = dir_ / "pairs.csv";
  const CmdResult inter = run(
      "metrics --mode inter \"" + files_a[0] + "\" \"" + files_a[1] + "\" \"" +
      files_b[0] + "\" \"" + files_b[1] + "\" --out \"" + inter_out.string() +
      "\" --pairs-out \"" + pairs_out.string() + "\"");
  ASSERT_EQ(inter.code, 0) << inter.err;
  const json jx = hammerpuf::load_json(inter_out);
  EXPECT_EQ(jx.at("mode"), "inter");
  EXPECT_EQ(jx.at("count"), 4);
  EXPECT_LT(jx.at("max").get<double>(), 0.5);
  const std::string csv = slurp(pairs_out);
  EXPECT_EQ(csv.rfind("id_a,id_b,jaccard,kind", 0), 0u);

  const CmdResult ent = run("metrics --mode entropy \"" + files_a[0] + "\" \"" +
                            files_a[1] + "\"");
  ASSERT_EQ(ent.code, 0) << ent.err;
  const json je = json::parse(ent.out);
  EXPECT_GT(je.at("entropy_bits").get<double>(), 0.0);
  EXPECT_GT(je.at("entropy_fraction").get<double>(), 0.0);

  const CmdResult flags = run("metrics --mode entropy --cells 1048576 --flips 30994");
  ASSERT_EQ(flags.code, 0) << flags.err;
  const json jf = json::parse(flags.out);
  EXPECT_NEAR(jf.at("entropy_fraction").get<double>(), 0.192, 0.001);
}

TEST_F(CliTest, EnrollAndReconstructRoundTrip) {
  ASSERT_EQ(run("device gen --seed 1").code, 0);
  const std::string dev_file =
      fs::directory_iterator(ws_ / "devices")->path().string();
  std::string files;
  for (int s = 1; s <= 5; ++s) {
    const fs::path out = dir_ / ("m" + std::to_string(s) + ".json");
    ASSERT_EQ(run("puf query --device \"" + dev_file +
                  "\" --puf-size 16K --measurement-seed " + std::to_string(s) +
                  " --out \"" + out.string() + "\"").code, 0);
    files += " \"" + out.string() + "\"";
  }
  const fs::path helper = dir_ / "helper.json";
  const CmdResult enroll = run("fe enroll" + files + " --helper-out \"" +
                               helper.string() + "\" --reveal-key");
  ASSERT_EQ(enroll.code, 0) << enroll.err;
  const std::string key_check = value_after(enroll.out, "key_check");
  const std::string key = value_after(enroll.out, "key");
  EXPECT_EQ(key_check.size(), 64u);
  EXPECT_EQ(key.size(), 32u);  // 128-bit key in hex
  ASSERT_TRUE(fs::exists(helper));

  // A fresh measurement from the same device reproduces the key.
  const fs::path fresh = dir_ / "fresh.json";
  ASSERT_EQ(run("puf query --device \"" + dev_file +
                "\" --puf-size 16K --measurement-seed 99 --out \"" +
                fresh.string() + "\"").code, 0);
  const CmdResult rec = run("fe reconstruct --helper \"" + helper.string() +
                            "\" \"" + fresh.string() + "\" --reveal-key");
  ASSERT_EQ(rec.code, 0) << rec.err;
  EXPECT_EQ(value_after(rec.out, "reconstructed"), "key_check " + key_check);
  EXPECT_EQ(value_after(rec.out, "key"), key);

  // Same enrollment inputs and seeds give the same helper bytes.
  const CmdResult enroll2 = run("fe enroll" + files + " --helper-out \"" +
                                helper.string() + "\" --force");
  ASSERT_EQ(enroll2.code, 0);
  EXPECT_EQ(value_after(enroll2.out, "key_check"), key_check);
}

TEST_F(CliTest, ReconstructFailureModes) {
  ASSERT_EQ(run("device gen --seed 1").code, 0);
  ASSERT_EQ(run("device gen --seed 2").code, 0);
  std::vector<std::string> devs;
  for (const auto& e : fs::directory_iterator(ws_ / "devices")) {
    devs.push_back(e.path().string());
  }
  std::sort(devs.begin(), devs.end());

  std::string files;
  for (int s = 1; s <= 5; ++s) {
    const fs::path out = dir_ / ("m" + std::to_string(s) + ".json");
    ASSERT_EQ(run("puf query --device \"" + devs[0] +
                  "\" --puf-size 16K --measurement-seed " + std::to_string(s) +
                  " --out \"" + out.string() + "\"").code, 0);
    files += " \"" + out.string() + "\"";
  }
  const fs::path helper = dir_ / "helper.json";
  ASSERT_EQ(run("fe enroll" + files + " --helper-out \"" + helper.string() +
                "\"").code, 0);

  // Wrong device: clean domain failure, exit 1.
  const fs::path foreign = dir_ / "foreign.json";
  ASSERT_EQ(run("puf query --device \"" + devs[1] +
                "\" --puf-size 16K --measurement-seed 1 --out \"" +
                foreign.string() + "\"").code, 0);
  const CmdResult cross = run("fe reconstruct --helper \"" + helper.string() +
                              "\" \"" + foreign.string() + "\"");
  EXPECT_EQ(cross.code, 1);
  EXPECT_NE(cross.err.find("error"), std::string::npos);

  // Wrong configuration: usage error, exit 2.
  const fs::path other_cfg = dir_ / "other-cfg.json";
  ASSERT_EQ(run("puf query --device \"" + devs[0] +
                "\" --puf-size 16K --rh-time 60 --measurement-seed 1 --out \"" +
                other_cfg.string() + "\"").code, 0);
  const CmdResult mismatch = run("fe reconstruct --helper \"" +
                                 helper.string() + "\" \"" +
                                 other_cfg.string() + "\"");
  EXPECT_EQ(mismatch.code, 2);

  // Corrupted helper JSON: usage error, exit 2.
  const fs::path broken = dir_ / "broken.json";
  std::ofstream(broken) << "{ nope";
  EXPECT_EQ(run("fe reconstruct --helper \"" + broken.string() + "\" \"" +
                foreign.string() + "\"").code, 2);
}

TEST_F(CliTest, ExperimentRunsDeterministicallyAtReducedScale) {
  const fs::path out1 = dir_ / "r1";
  const fs::path out2 = dir_ / "r2";
  const std::string base =
      "experiment iv-matrix --master-seed 5 --scale 0.05 --repetitions 4 "
      "--threads 2 --out-dir ";
  const CmdResult a = run(base + "\"" + out1.string() + "\"");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("[PASS]"), std::string::npos);
  EXPECT_NE(a.out.find("[SKIP]"), std::string::npos);
  EXPECT_NE(a.out.find("iv-matrix ok"), std::string::npos);
  ASSERT_TRUE(fs::exists(out1 / "report.json"));
  ASSERT_TRUE(fs::exists(out1 / "iv-matrix.csv"));

  const CmdResult b = run(base + "\"" + out2.string() + "\"");
  ASSERT_EQ(b.code, 0) << b.err;
  const json r1 = hammerpuf::load_json(out1 / "report.json");
  const json r2 = hammerpuf::load_json(out2 / "report.json");
  EXPECT_EQ(hammerpuf::strip_volatile(r1), hammerpuf::strip_volatile(r2));
  EXPECT_EQ(slurp(out1 / "iv-matrix.csv"), slurp(out2 / "iv-matrix.csv"));
  EXPECT_TRUE(r1.at("all_targets_pass").get<bool>());
  EXPECT_TRUE(r1.contains("runtime"));

  // Refuses to clobber an existing report without --force.
  EXPECT_EQ(run(base + "\"" + out1.string() + "\"").code, 2);
}

TEST_F(CliTest, ExperimentValidatesArguments) {
  EXPECT_EQ(run("experiment bogus-name").code, 2);
  EXPECT_EQ(run("experiment iv-matrix --scale 0").code, 2);
  EXPECT_EQ(run("experiment uniqueness --devices 1 --scale 0.05").code, 2);
}

TEST_F(CliTest, MissingParamsFileFallsBackWithNote) {
  const CmdResult r = run("device gen --seed 4 --params \"" +
                          (dir_ / "nope.json").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("note:"), std::string::npos);
  EXPECT_NE(r.out.find("defaults"), std::string::npos);
}

TEST_F(CliTest, WorkspaceCalibrationIsPickedUp) {
  // Drop a calibration file into the workspace; the CLI should announce it.
  const fs::path calib = ws_ / "calibration" / "model-params.json";
  fs::create_directories(calib.parent_path());
  json params = hammerpuf::load_json(
      fs::path(HAMMERPUF_SOURCE_DIR) / "data" / "default-model-params.json");
  params["noise_log_sd"] = 0.02;
  std::ofstream(calib) << params.dump(2);
  const CmdResult r = run("device gen --seed 5");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("workspace calibration"), std::string::npos);
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "thinline/io.hpp"
#include "thinline/synth.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

CliResult run(const std::string& args) {
  const std::string cmd = std::string(THINLINE_CLI_PATH) + " " + args + " 2>&1";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("thinline_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return path(name);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, HelpExitsZero) {
  const CliResult r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"detect", "batch", "synth", "undistort", "report"})
    EXPECT_NE(r.output.find(sub), std::string::npos) << sub;
}

TEST_F(CliTest, MissingSubcommandIsUsageError) { EXPECT_EQ(run("").code, 2); }

TEST_F(CliTest, DetectFindsSyntheticWire) {
  thinline::SceneSpec s = thinline::profile_template(thinline::NoiseProfile::clean);
  s.wire_x = 300.0;
  s.wire_contrast = 0.5;
  thinline::save_image(thinline::generate(s).first, dir_ / "wire.png");
  const CliResult r = run("detect --image " + path("wire.png") + " --config " + write("gch.json", R"({"name": "GCH"})") +
                    " --overlay " + path("overlay.png"));
  ASSERT_EQ(r.code, 0) << r.output;
  double x = 0.0;
  ASSERT_EQ(std::sscanf(r.output.c_str(), "x_bar=%lf", &x), 1) << r.output;
  EXPECT_LE(std::abs(x - 300.0), 2.0);
  EXPECT_NE(r.output.find("support="), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "overlay.png"));
}

TEST_F(CliTest, DetectOnBlackImageReportsNone) {
  thinline::save_image(thinline::GrayImage(64, 64, 0.0), dir_ / "black.png");
  const CliResult r = run("detect --image " + path("black.png") + " --config " + write("gch.json", R"({"name": "GCH"})"));
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(r.output, "x_bar=none\n");
}

TEST_F(CliTest, ErrorsMapToExitCodes) {
  thinline::save_image(thinline::GrayImage(64, 64, 0.0), dir_ / "black.png");
  const std::string img = path("black.png");
  EXPECT_EQ(run("detect --image " + img + " --config " + write("bad.json", "{nope")).code, 2);
  EXPECT_EQ(run("detect --image " + img + " --config " + write("odd.json", R"({"name": "GCH", "gaussian_size": 4})")).code, 2);
  EXPECT_EQ(run("detect --image " + path("missing.png") + " --config " + write("g.json", R"({"name": "GCH"})")).code, 3);
  thinline::save_image(thinline::GrayImage(2, 2, 0.0), dir_ / "tiny.png");
  const CliResult tiny = run("detect --image " + path("tiny.png") + " --config " + path("g.json"));
  EXPECT_EQ(tiny.code, 4);
  EXPECT_NE(tiny.output.find("gaussian"), std::string::npos) << tiny.output;
}

TEST_F(CliTest, UnknownNamesListTheValidOnes) {
  const CliResult p = run("synth --profile foggy --n 1 --seed 1 --out " + path("c"));
  EXPECT_EQ(p.code, 2);
  EXPECT_NE(p.output.find("cracked+rope"), std::string::npos) << p.output;
  thinline::save_image(thinline::GrayImage(8, 8, 0.0), dir_ / "a.png");
  const CliResult c = run("undistort --image " + path("a.png") + " --camera-preset C7 --out " + path("b.png"));
  EXPECT_EQ(c.code, 2);
  EXPECT_NE(c.output.find("C4"), std::string::npos) << c.output;
}

TEST_F(CliTest, SynthWithZeroImagesWritesHeaderOnly) {
  ASSERT_EQ(run("synth --profile clean --n 0 --seed 1 --out " + path("c")).code, 0);
  EXPECT_EQ(slurp(dir_ / "c" / "truth.csv"), "filename,wire_x,present\n");
}

TEST_F(CliTest, SynthIsDeterministic) {
  ASSERT_EQ(run("synth --profile cracked --n 3 --seed 9 --out " + path("a")).code, 0);
  ASSERT_EQ(run("synth --profile cracked --n 3 --seed 9 --out " + path("b")).code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "truth.csv"), slurp(dir_ / "b" / "truth.csv"));
  for (const char* f : {"img_00000.png", "img_00001.png", "img_00002.png"}) EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f));
  const auto truth = slurp(dir_ / "a" / "truth.csv");
  EXPECT_EQ(truth.rfind("filename,wire_x,present\nimg_00000.png,", 0), 0u) << truth;
}

TEST_F(CliTest, BatchIsReproducibleAcrossJobCounts) {
  ASSERT_EQ(run("synth --profile clean --n 6 --seed 4 --out " + path("corpus")).code, 0);
  const std::string cfgs = write("g.json", R"({"name": "GCH@RtoR"})") + " " + write("f.json", R"({"name": "FCH@RtoR"})");
  const std::string base = "batch --corpus " + path("corpus") + " --truth " + path("corpus/truth.csv") + " --configs " + cfgs;
  ASSERT_EQ(run(base + " --out " + path("r1.csv")).code, 0);
  ASSERT_EQ(run(base + " --out " + path("r2.csv")).code, 0);
  ASSERT_EQ(run(base + " --jobs 4 --out " + path("r4.csv")).code, 0);
  const std::string r1 = slurp(dir_ / "r1.csv");
  EXPECT_EQ(r1, slurp(dir_ / "r2.csv"));
  EXPECT_EQ(r1, slurp(dir_ / "r4.csv"));
  EXPECT_NE(r1.find("GCH@RtoR,corpus,6,"), std::string::npos) << r1;
  EXPECT_NE(r1.find("FCH@RtoR,corpus,6,"), std::string::npos) << r1;

  const CliResult rep = run("report --in " + path("r1.csv"));
  EXPECT_EQ(rep.code, 0);
  EXPECT_NE(rep.output.find("GCH@RtoR"), std::string::npos);
}

TEST_F(CliTest, BatchRejectsImagesWithoutTruth) {
  ASSERT_EQ(run("synth --profile clean --n 2 --seed 4 --out " + path("corpus")).code, 0);
  write("corpus/truth.csv", "filename,wire_x,present\nimg_00000.png,256,1\n");
  const CliResult r = run("batch --corpus " + path("corpus") + " --truth " + path("corpus/truth.csv") + " --configs " +
                    write("g.json", R"({"name": "GCH"})") + " --out " + path("r.csv"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find("img_00001.png"), std::string::npos) << r.output;
}

TEST_F(CliTest, UndistortWritesSameSizeImage) {
  thinline::save_image(thinline::GrayImage(40, 30, 0.5), dir_ / "in.png");
  ASSERT_EQ(run("undistort --image " + path("in.png") + " --camera-preset C1 --out " + path("out.png")).code, 0);
  const auto out = thinline::load_image(dir_ / "out.png");
  EXPECT_EQ(out.width(), 40);
  EXPECT_EQ(out.height(), 30);
}

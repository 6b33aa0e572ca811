#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "thinline/config.hpp"

using namespace thinline;
using nlohmann::json;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, NamedExperimentWithDefaults) {
  const auto cfg = parse_config(R"({"name": "GECH"})");
  EXPECT_EQ(cfg, PipelineConfig::named(Experiment::GECH));
}

TEST(Config, DatasetFromSuffixOrKey) {
  EXPECT_EQ(parse_config(R"({"name": "FCH@LtoR"})"), PipelineConfig::named(Experiment::FCH, "LtoR"));
  EXPECT_EQ(parse_config(R"({"name": "FCH", "dataset": "RtoL"})"), PipelineConfig::named(Experiment::FCH, "RtoL"));
  EXPECT_NE(error_of(R"({"name": "FCH@LtoR", "dataset": "RtoL"})").find("contradicts"), std::string::npos);
  EXPECT_NE(error_of(R"({"name": "GCH", "dataset": "Sideways"})"), "");
}

TEST(Config, OverridesTouchOnlyTheirStage) {
  const auto cfg = parse_config(R"({"name": "GSCH", "gaussian_size": 3, "gaussian_sigma": 0.9, "sharpen_center": 9,
                                   "canny_low": 5, "canny_high": 60, "hough_threshold": 40, "min_line_length": 70,
                                   "max_line_gap": 4, "vertical_tol": 1, "cluster_window": 12.5})");
  EXPECT_EQ(cfg.find_stage<GaussianStage>()->size, 3);
  EXPECT_EQ(cfg.find_stage<GaussianStage>()->sigma, 0.9);
  EXPECT_EQ(cfg.find_stage<SharpenStage>()->center, 9.0);
  EXPECT_EQ(cfg.canny, (CannyThresholds{5.0, 60.0}));
  EXPECT_EQ(cfg.hough, (HoughParams{40, 70, 4}));
  EXPECT_EQ(cfg.vertical_tol, 1);
  EXPECT_EQ(cfg.cluster_window, 12.5);
  EXPECT_EQ(cfg.stages().size(), 2u);
}

TEST(Config, OverrideWithoutMatchingStageIsAnError) {
  EXPECT_NE(error_of(R"({"name": "GCH", "sharpen_center": 3})").find("sharpen_center"), std::string::npos);
  EXPECT_NE(error_of(R"({"name": "FCH", "gaussian_size": 3})").find("gaussian_size"), std::string::npos);
}

TEST(Config, CustomPipelines) {
  const auto cfg = parse_config(R"({"name": "mine", "preprocessing": [
      {"type": "gaussian", "size": 3},
      {"type": "emboss", "kernel": [[1, 0, 0], [0, 0, 0], [0, 0, -1]]},
      {"type": "fourier", "radius": 12}]})");
  ASSERT_EQ(cfg.stages().size(), 3u);
  EXPECT_EQ(cfg.find_stage<EmbossStage>()->kernel.at(-1, -1), 1.0);
  EXPECT_EQ(cfg.find_stage<FourierStage>()->radius, 12.0);
  EXPECT_EQ(parse_config(R"({"name": "raw", "preprocessing": []})").stages().size(), 0u);
}

TEST(Config, StructuralErrors) {
  EXPECT_NE(error_of("{not json"), "");
  EXPECT_NE(error_of(R"({"dataset": "LtoL"})"), "");                              // no name
  EXPECT_NE(error_of(R"({"name": "GCH", "colour": 1})").find("colour"), std::string::npos);
  EXPECT_NE(error_of(R"({"name": "GCH", "preprocessing": []})"), "");            // fixed stage list
  EXPECT_NE(error_of(R"({"name": "mine"})"), "");                                 // custom needs stages
  EXPECT_NE(error_of(R"({"name": "mine", "dataset": "LtoR", "preprocessing": []})"), "");
  EXPECT_NE(error_of(R"({"name": "mine", "preprocessing": [{"type": "median"}]})").find("median"), std::string::npos);
  EXPECT_NE(error_of(R"({"name": "GCH", "canny_low": "low"})"), "");
  EXPECT_NE(error_of(R"({"name": "GCH", "roi": {"x": 0, "y": 0, "width": 4, "height": 4}})"), "");
}

TEST(Config, ValidationErrorsBecomeConfigErrors) {
  EXPECT_NE(error_of(R"({"name": "GCH", "gaussian_size": 4})"), "");
  EXPECT_NE(error_of(R"({"name": "GCH", "canny_low": 200})"), "");
  EXPECT_NE(error_of(R"({"name": "FCH", "fourier_mask_radius": -3})"), "");
  EXPECT_NE(error_of(R"({"name": "mine", "preprocessing": [{"type": "emboss", "kernel": [[1, 2], [3, 4]]}]})"), "");
}

TEST(Config, CameraPresetAndExplicit) {
  const auto a = parse_config(R"({"name": "GCH", "camera": {"preset": "C2"}, "roi": {"x": 1, "y": 2, "width": 30, "height": 40}})");
  ASSERT_TRUE(a.calibration);
  EXPECT_EQ(a.calibration->camera, *camera_preset("C2"));
  EXPECT_EQ(a.calibration->roi, (RegionOfInterest{1, 2, 30, 40}));

  const auto b = parse_config(R"({"name": "GCH", "camera": {"fx": 10, "fy": 11, "cx": 5, "cy": 6, "dist": [0.1, 0.2]}})");
  EXPECT_EQ(b.calibration->camera.k1, 0.1);
  EXPECT_EQ(b.calibration->camera.k2, 0.2);
  EXPECT_EQ(b.calibration->camera.k3, 0.0);

  const std::string err = error_of(R"({"name": "GCH", "camera": {"preset": "C9"}})");
  EXPECT_NE(err.find("C9"), std::string::npos);
  EXPECT_NE(err.find("C1, C2, C3, C4"), std::string::npos);
  EXPECT_NE(error_of(R"({"name": "GCH", "camera": {"fx": 0, "fy": 1, "cx": 0, "cy": 0}})"), "");
  EXPECT_NE(error_of(R"({"name": "GCH", "camera": {"fx": 1, "fy": 1, "cx": 0, "cy": 0, "dist": [0,0,0,0,0,0,0,0,0]}})"), "");
}

TEST(ConfigProperty, JsonRoundTrip) {
  std::vector<PipelineConfig> configs;
  for (const auto& d : kDatasets)
    for (const auto& [n, e] : kExperiments) configs.push_back(PipelineConfig::named(e, d.name));
  auto tuned = PipelineConfig::named(Experiment::GECH, "RtoR");
  tuned.find_stage<GaussianStage>()->sigma = 1.3;
  tuned.canny = {3.5, 77.25};
  tuned.calibration = Calibration{*camera_preset("C3"), RegionOfInterest{4, 5, 60, 70}};
  configs.push_back(tuned);
  configs.push_back(PipelineConfig::custom("mix", {GaussianStage{3, std::nullopt}, SharpenStage{2.5}, EmbossStage{},
                                                   FourierStage{33.0}}));
  for (const auto& c : configs) {
    const std::string text = config_to_json(c).dump(2);
    EXPECT_EQ(parse_config(text), c) << text;
  }
}

TEST(Config, LoadFromFilePrefixesPath) {
  const auto dir = std::filesystem::temp_directory_path() / "thinline_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "good.json") << R"({"name": "FCH@RtoR"})";
    std::ofstream(dir / "bad.json") << R"({"name": "FCH", "bogus": 1})";
  }
  EXPECT_EQ(load_config(dir / "good.json"), PipelineConfig::named(Experiment::FCH, "RtoR"));
  try {
    load_config(dir / "bad.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.json"), std::string::npos);
  }
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
  std::filesystem::remove_all(dir);
}

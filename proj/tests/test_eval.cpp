#include <gtest/gtest.h>

#include <sstream>

#include "thinline/eval.hpp"

using namespace thinline;

namespace {

Sample wire_sample(double x, std::uint64_t seed) {
  SceneSpec s = profile_template(NoiseProfile::clean);
  s.width = s.height = 192;
  s.wire_x = x;
  s.wire_contrast = 0.5;
  s.seed = seed;
  auto [img, truth] = generate(s);
  return {std::move(img), truth};
}

std::vector<Sample> three_wires_one_blank() {
  std::vector<Sample> c{wire_sample(60.0, 1), wire_sample(100.0, 2), wire_sample(140.0, 3)};
  c.push_back({GrayImage(192, 192, 0.0), GroundTruth{96.0, true}});
  return c;
}

}  // namespace

TEST(Evaluate, ThreeOfFourIsSeventyFivePercent) {
  const auto report = evaluate({PipelineConfig::named(Experiment::GCH)}, three_wires_one_blank(), "mini");
  ASSERT_EQ(report.rows.size(), 1u);
  const EvalRow& r = report.rows[0];
  EXPECT_EQ(r.config, "GCH");
  EXPECT_EQ(r.corpus, "mini");
  EXPECT_EQ(r.n, 4u);
  EXPECT_EQ(r.hits, 3u);
  EXPECT_EQ(r.rate_pct, 75.0);
  ASSERT_TRUE(r.mean_abs_err_px);
  EXPECT_LE(*r.mean_abs_err_px, 5.0);
  EXPECT_FALSE(r.mean_time_s);
  EXPECT_NE(report_to_csv(report).find("GCH,mini,4,3,75.00,"), std::string::npos);
}

TEST(Evaluate, AbsentWireIsNeverAHit) {
  std::vector<Sample> c{wire_sample(80.0, 5)};
  c[0].truth.present = false;
  EXPECT_EQ(evaluate({PipelineConfig::named(Experiment::GCH)}, c, "x").rows[0].hits, 0u);
}

TEST(Evaluate, TimingOnlyWhenRequested) {
  EvalOptions opt;
  opt.record_timing = true;
  const auto r = evaluate({PipelineConfig::named(Experiment::GCH)}, {wire_sample(90.0, 4)}, "t", opt);
  ASSERT_TRUE(r.rows[0].mean_time_s);
  EXPECT_GT(*r.rows[0].mean_time_s, 0.0);
}

TEST(Evaluate, RejectsEmptyCorpusAndBadTolerance) {
  EXPECT_THROW(evaluate({PipelineConfig::named(Experiment::GCH)}, {}, "none"), std::invalid_argument);
  EvalOptions opt;
  opt.tolerance_px = 0.0;
  EXPECT_THROW(evaluate({PipelineConfig::named(Experiment::GCH)}, {wire_sample(50.0, 1)}, "x", opt),
               std::invalid_argument);
}

TEST(Evaluate, ThreadCountDoesNotChangeTheReport) {
  const auto corpus = make_corpus(NoiseProfile::cracked, 12, 3);
  std::vector<PipelineConfig> configs;
  for (const auto& [n, e] : kExperiments) configs.push_back(PipelineConfig::named(e, "RtoR"));
  EvalOptions one, four;
  four.jobs = 4;
  EXPECT_EQ(report_to_csv(evaluate(configs, corpus, "c", one)), report_to_csv(evaluate(configs, corpus, "c", four)));
}

TEST(Evaluate, RowsAreSortedByConfigThenCorpus) {
  const std::vector<PipelineConfig> configs{PipelineConfig::named(Experiment::GSCH), PipelineConfig::named(Experiment::FCH)};
  const auto r = evaluate(configs, {wire_sample(70.0, 1)}, "z");
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].config, "FCH");
  EXPECT_EQ(r.rows[1].config, "GSCH");
}

TEST(EvaluateProperty, HitsAddOverConcatenatedCorpora) {
  const auto a = make_corpus(NoiseProfile::cracked_rope, 5, 21);
  const auto b = make_corpus(NoiseProfile::dark, 5, 22);
  auto ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  for (const auto& [n, e] : kExperiments) {
    const std::vector<PipelineConfig> cfg{PipelineConfig::named(e, "RtoR")};
    const auto ra = evaluate(cfg, a, "a").rows[0];
    const auto rb = evaluate(cfg, b, "b").rows[0];
    const auto rab = evaluate(cfg, ab, "ab").rows[0];
    EXPECT_EQ(rab.n, 10u);
    EXPECT_EQ(rab.hits, ra.hits + rb.hits) << n;
  }
}

TEST(ReportCsv, RoundingAndEmptyFields) {
  EvalReport r;
  r.rows.push_back({"GCH", "clean", 200, 168, 84.0425, std::nullopt, std::nullopt});
  r.rows.push_back({"FCH", "clean", 3, 1, 100.0 / 3.0, 1.23456, 0.5});
  EXPECT_EQ(report_to_csv(r), std::string(kReportHeader) +
                                  "\n"
                                  "FCH,clean,3,1,33.33,1.2346,0.500000\n"
                                  "GCH,clean,200,168,84.04,,\n");
}

TEST(ReportCsv, EmptyReportIsHeaderOnly) { EXPECT_EQ(report_to_csv({}), std::string(kReportHeader) + "\n"); }

TEST(ReportCsv, RoundTripIsStable) {
  EvalReport r;
  r.rows.push_back({"GECH@RtoR", "cracked+rope", 200, 110, 55.0, 2.5, std::nullopt});
  r.rows.push_back({"GCH", "dark", 200, 0, 0.0, std::nullopt, 0.031234});
  const std::string csv = report_to_csv(r);
  std::istringstream in(csv);
  const EvalReport back = parse_report(in);
  EXPECT_EQ(report_to_csv(back), csv);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.find("GCH", "dark")->hits, 0u);
  EXPECT_FALSE(back.find("GCH", "dark")->mean_abs_err_px);
}

TEST(ReportCsv, MalformedInputIsRejected) {
  std::istringstream no_header("a,b\n");
  EXPECT_THROW(parse_report(no_header), std::runtime_error);
  std::istringstream short_row(std::string(kReportHeader) + "\nGCH,clean,1\n");
  EXPECT_THROW(parse_report(short_row), std::runtime_error);
  std::istringstream bad_number(std::string(kReportHeader) + "\nGCH,clean,x,1,2,,\n");
  EXPECT_THROW(parse_report(bad_number), std::runtime_error);
}

TEST(ReportMerge, CombinesAndSorts) {
  EvalReport a, b;
  a.rows.push_back({"GCH", "z", 1, 1, 100.0, 0.0, std::nullopt});
  b.rows.push_back({"GCH", "a", 1, 0, 0.0, std::nullopt, std::nullopt});
  a.merge(b);
  ASSERT_EQ(a.rows.size(), 2u);
  EXPECT_EQ(a.rows[0].corpus, "a");
}

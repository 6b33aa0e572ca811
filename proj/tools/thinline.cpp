// thinline: detect, batch, synth, undistort and report subcommands.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thinline/config.hpp"
#include "thinline/eval.hpp"
#include "thinline/io.hpp"
#include "thinline/synth.hpp"

namespace fs = std::filesystem;
using namespace thinline;

namespace {

enum Exit : int { kOk = 0, kUsage = 2, kIo = 3, kPipeline = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Names>
std::string join_names(const Names& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

std::string shortest(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

PipelineConfig read_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw IoError("cannot read config " + path.string());
  return load_config(path);
}

void draw_overlay(const GrayImage& base, const DetectionResult& r, int ox, int oy, const fs::path& out) {
  RgbImage rgb(base.width(), base.height());
  for (int y = 0; y < base.height(); ++y)
    for (int x = 0; x < base.width(); ++x) {
      const double v = std::clamp(base(x, y), 0.0, 1.0);
      rgb.set(x, y, {v, v, v});
    }
  auto plot = [&](int x, int y, std::array<double, 3> c) {
    if (x >= 0 && y >= 0 && x < rgb.width && y < rgb.height) rgb.set(x, y, c);
  };
  for (const auto& s : r.segments) {
    const int n = std::max(std::abs(s.x2 - s.x1), std::abs(s.y2 - s.y1));
    for (int i = 0; i <= n; ++i) {
      const double t = n == 0 ? 0.0 : static_cast<double>(i) / n;
      plot(ox + static_cast<int>(std::lround(s.x1 + t * (s.x2 - s.x1))),
           oy + static_cast<int>(std::lround(s.y1 + t * (s.y2 - s.y1))), {0.0, 1.0, 0.0});
    }
  }
  if (r.reference) {
    const int x = ox + static_cast<int>(std::lround(r.reference->x_bar));
    for (int y = 0; y < rgb.height; ++y) plot(x, y, {1.0, 0.0, 0.0});
  }
  save_rgb_png(rgb, out);
}

int cmd_detect(const fs::path& image, const fs::path& config, const std::string& overlay) {
  const PipelineConfig cfg = read_config(config);
  const GrayImage img = load_image(image);
  const DetectionResult r = run_pipeline(cfg, img);
  if (r.reference) {
    std::printf("x_bar=%.2f\nsupport=%d\n", r.reference->x_bar, r.reference->support);
  } else {
    std::printf("x_bar=none\n");
  }
  if (!overlay.empty()) {
    int ox = 0, oy = 0;
    if (cfg.calibration && cfg.calibration->roi) {
      ox = cfg.calibration->roi->x0;
      oy = cfg.calibration->roi->y0;
    }
    draw_overlay(img, r, ox, oy, overlay);
  }
  return kOk;
}

struct TruthRow {
  std::string filename;
  GroundTruth truth;
};

std::vector<TruthRow> read_truth(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open truth CSV " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "filename,wire_x,present")
    throw IoError(path.string() + ": expected header 'filename,wire_x,present'");
  std::vector<TruthRow> rows;
  for (int n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string name, x, present;
    if (!std::getline(ss, name, ',') || !std::getline(ss, x, ',') || !std::getline(ss, present))
      throw IoError(path.string() + ": line " + std::to_string(n) + " needs 3 fields");
    TruthRow row{name, {}};
    const auto [p, ec] = std::from_chars(x.data(), x.data() + x.size(), row.truth.wire_x);
    if (ec != std::errc{} || p != x.data() + x.size() || (present != "0" && present != "1"))
      throw IoError(path.string() + ": line " + std::to_string(n) + " is malformed");
    row.truth.present = present == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_batch(const fs::path& corpus_dir, const fs::path& truth_csv, const std::vector<std::string>& config_paths,
              const fs::path& out, unsigned jobs, double tol, bool timing) {
  if (!fs::is_directory(corpus_dir)) throw IoError("corpus directory not found: " + corpus_dir.string());
  std::vector<PipelineConfig> configs;
  for (const auto& p : config_paths) configs.push_back(read_config(p));

  const auto truth = read_truth(truth_csv);
  std::set<std::string> listed;
  for (const auto& t : truth) listed.insert(t.filename);
  std::vector<std::string> images;
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".png" || ext == ".pgm")) images.push_back(entry.path().filename().string());
  }
  std::sort(images.begin(), images.end());
  for (const auto& name : images)
    if (!listed.contains(name)) throw IoError("no truth row for " + (corpus_dir / name).string());

  std::vector<Sample> corpus;
  corpus.reserve(truth.size());
  for (const auto& t : truth) {
    const fs::path p = corpus_dir / t.filename;
    if (!fs::is_regular_file(p)) throw IoError(truth_csv.string() + " lists missing image " + p.string());
    corpus.push_back({load_image(p), t.truth});
  }
  if (corpus.empty()) throw IoError("corpus " + corpus_dir.string() + " has no images");

  fs::path name = corpus_dir;
  if (!name.has_filename()) name = name.parent_path();
  const EvalReport report = evaluate(configs, corpus, name.filename().string(), {tol, jobs, timing});
  write_report(report, out);
  return kOk;
}

int cmd_synth(const std::string& profile_name_arg, std::size_t n, std::uint64_t seed, const fs::path& out) {
  const auto profile = parse_profile(profile_name_arg);
  if (!profile) {
    std::vector<std::string> names;
    for (const auto& [name, _] : kNoiseProfiles) names.emplace_back(name);
    throw UsageError("unknown profile '" + profile_name_arg + "' (valid: " + join_names(names) + ")");
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  std::string csv = "filename,wire_x,present\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto [img, truth] = generate(corpus_scene(*profile, seed, i));
    char name[32];
    std::snprintf(name, sizeof name, "img_%05zu.png", i);
    save_image(img, out / name);
    csv += std::string(name) + ',' + shortest(truth.wire_x) + ',' + (truth.present ? "1" : "0") + '\n';
  }
  std::ofstream f(out / "truth.csv", std::ios::binary | std::ios::trunc);
  f << csv;
  if (!f) throw IoError("cannot write " + (out / "truth.csv").string());
  return kOk;
}

int cmd_undistort(const fs::path& image, const std::string& preset, const fs::path& out) {
  const auto camera = camera_preset(preset);
  if (!camera) {
    std::vector<std::string> names(kCameraPresetNames.begin(), kCameraPresetNames.end());
    throw UsageError("unknown camera preset '" + preset + "' (valid: " + join_names(names) + ")");
  }
  save_image(undistort(load_image(image), *camera), out);
  return kOk;
}

int cmd_report(const fs::path& in) {
  if (!fs::is_regular_file(in)) throw IoError("cannot read report " + in.string());
  const EvalReport report = read_report(in);
  std::size_t wc = 6, wk = 6;
  for (const auto& r : report.rows) {
    wc = std::max(wc, r.config.size());
    wk = std::max(wk, r.corpus.size());
  }
  std::printf("%-*s  %-*s  %6s  %6s  %8s  %10s  %10s\n", static_cast<int>(wc), "config", static_cast<int>(wk), "corpus",
              "n", "hits", "rate", "err_px", "time_s");
  for (const auto& r : report.rows) {
    const std::string err = r.mean_abs_err_px ? detail::format_fixed(*r.mean_abs_err_px, 4) : "-";
    const std::string time = r.mean_time_s ? detail::format_fixed(*r.mean_time_s, 6) : "-";
    std::printf("%-*s  %-*s  %6zu  %6zu  %7.2f%%  %10s  %10s\n", static_cast<int>(wc), r.config.c_str(),
                static_cast<int>(wk), r.corpus.c_str(), r.n, r.hits, r.rate_pct, err.c_str(), time.c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reference-wire detection for elevator shaft images"};
  app.require_subcommand(1);

  std::string image, config, overlay;
  auto* detect = app.add_subcommand("detect", "Detect the reference line in one image");
  detect->add_option("--image", image, "Input image (PNG or PGM)")->required();
  detect->add_option("--config", config, "Pipeline config (JSON)")->required();
  detect->add_option("--overlay", overlay, "Write an RGB PNG with segments and the detected line");

  std::string corpus, truth, out;
  std::vector<std::string> configs;
  unsigned jobs = 1;
  double tol = 5.0;
  bool timing = false;
  auto* batch = app.add_subcommand("batch", "Evaluate configs over a corpus and write a CSV report");
  batch->add_option("--corpus", corpus, "Directory of images")->required();
  batch->add_option("--truth", truth, "Truth CSV (filename,wire_x,present)")->required();
  batch->add_option("--configs", configs, "One or more pipeline configs (JSON)")->required();
  batch->add_option("--out", out, "Report CSV path")->required();
  batch->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u));
  batch->add_option("--tol", tol, "Hit tolerance, pixels")->check(CLI::PositiveNumber);
  batch->add_flag("--timing", timing, "Fill the mean_time_s column (wall clock, not reproducible)");

  std::string profile;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  auto* synth = app.add_subcommand("synth", "Write a seeded synthetic corpus with truth.csv");
  synth->add_option("--profile", profile, "clean, cracked, cracked+rope or dark")->required();
  synth->add_option("--n", n, "Number of images")->required();
  synth->add_option("--seed", seed, "Corpus seed")->required();
  synth->add_option("--out", out, "Output directory")->required();

  std::string preset;
  auto* undist = app.add_subcommand("undistort", "Undistort an image with a calibrated camera preset");
  undist->add_option("--image", image, "Input image")->required();
  undist->add_option("--camera-preset", preset, "C1, C2, C3 or C4")->required();
  undist->add_option("--out", out, "Output image")->required();

  std::string in;
  auto* report = app.add_subcommand("report", "Pretty-print a CSV report");
  report->add_option("--in", in, "Report CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*detect) return cmd_detect(image, config, overlay);
    if (*batch) return cmd_batch(corpus, truth, configs, out, jobs, tol, timing);
    if (*synth) return cmd_synth(profile, n, seed, out);
    if (*undist) return cmd_undistort(image, preset, out);
    if (*report) return cmd_report(in);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const ImageIoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const PipelineError& e) {
    std::fprintf(stderr, "pipeline error in stage %s\n", e.what());
    return kPipeline;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  }
  return kUsage;
}

#pragma once

// Stage composition: optional calibration, a preprocessing chain, Canny,
// Hough, the vertical filter and Hough averaging, with per-stage timing.

#include <array>
#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "thinline/calibration.hpp"
#include "thinline/denoise.hpp"
#include "thinline/edge.hpp"
#include "thinline/line.hpp"

namespace thinline {

struct GaussianStage {
  int size = 5;
  std::optional<double> sigma;
  friend bool operator==(const GaussianStage&, const GaussianStage&) = default;
};
struct SharpenStage {
  double center = 5.0;
  friend bool operator==(const SharpenStage&, const SharpenStage&) = default;
};
struct EmbossStage {
  Kernel kernel = default_emboss_kernel();
  friend bool operator==(const EmbossStage&, const EmbossStage&) = default;
};
struct FourierStage {
  double radius = 500.0;
  friend bool operator==(const FourierStage&, const FourierStage&) = default;
};

using PreprocessStage = std::variant<GaussianStage, SharpenStage, EmbossStage, FourierStage>;

inline std::string_view stage_name(const PreprocessStage& s) {
  return std::visit(
      [](const auto& st) -> std::string_view {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, GaussianStage>) return "gaussian";
        else if constexpr (std::is_same_v<T, SharpenStage>) return "sharpen";
        else if constexpr (std::is_same_v<T, EmbossStage>) return "emboss";
        else return "fourier";
      },
      s);
}

inline GrayImage apply_stage(const GrayImage& img, const PreprocessStage& stage) {
  return std::visit(
      [&](const auto& st) -> GrayImage {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, GaussianStage>) return gaussian_blur(img, st.size, st.sigma);
        else if constexpr (std::is_same_v<T, SharpenStage>) return sharpen(img, st.center);
        else if constexpr (std::is_same_v<T, EmbossStage>) return emboss(img, st.kernel);
        else return fft_highpass(img, FourierMask{st.radius});
      },
      stage);
}

enum class Experiment { GCH, GSCH, GECH, FCH, custom };

inline constexpr std::array<std::pair<std::string_view, Experiment>, 4> kExperiments{{
    {"GCH", Experiment::GCH},
    {"GSCH", Experiment::GSCH},
    {"GECH", Experiment::GECH},
    {"FCH", Experiment::FCH},
}};

inline std::optional<Experiment> parse_experiment(std::string_view name) {
  for (const auto& [n, e] : kExperiments)
    if (n == name) return e;
  return std::nullopt;
}

/// Per-dataset threshold bundle of the shaft experiments.
struct DatasetThresholds {
  std::string_view name;
  double fourier_radius;
  int min_line_length;
};

inline constexpr std::array<DatasetThresholds, 4> kDatasets{{
    {"LtoL", 500.0, 50},
    {"LtoR", 40.0, 160},
    {"RtoL", 400.0, 50},
    {"RtoR", 200.0, 150},
}};

inline std::optional<DatasetThresholds> dataset_thresholds(std::string_view name) {
  for (const auto& d : kDatasets)
    if (d.name == name) return d;
  return std::nullopt;
}

struct Calibration {
  CameraModel camera;
  std::optional<RegionOfInterest> roi;
  friend bool operator==(const Calibration&, const Calibration&) = default;
};

/// One runnable experiment. Named experiments carry exactly their fixed stage
/// list; only parameters of those stages can be changed afterwards.
class PipelineConfig {
 public:
  CannyThresholds canny{1.0, 100.0};
  HoughParams hough{100, 50, 10};
  int vertical_tol = 2;
  double cluster_window = 20.0;
  std::optional<Calibration> calibration;

  static PipelineConfig named(Experiment e, std::string_view dataset = "LtoL") {
    if (e == Experiment::custom) throw std::invalid_argument("PipelineConfig::named: custom is not a named experiment");
    const auto d = dataset_thresholds(dataset);
    if (!d) throw std::invalid_argument("unknown dataset threshold bundle '" + std::string(dataset) + "'");
    PipelineConfig cfg;
    cfg.experiment_ = e;
    cfg.dataset_ = std::string(d->name);
    for (const auto& [n, x] : kExperiments)
      if (x == e) cfg.name_ = std::string(n);
    switch (e) {
      case Experiment::GCH: cfg.stages_ = {GaussianStage{5, std::nullopt}}; break;
      case Experiment::GSCH: cfg.stages_ = {GaussianStage{7, std::nullopt}, SharpenStage{5.0}}; break;
      case Experiment::GECH: cfg.stages_ = {GaussianStage{5, std::nullopt}, EmbossStage{}}; break;
      case Experiment::FCH: cfg.stages_ = {FourierStage{d->fourier_radius}}; break;
      case Experiment::custom: break;
    }
    cfg.hough.min_length = d->min_line_length;
    return cfg;
  }

  static PipelineConfig custom(std::string name, std::vector<PreprocessStage> stages) {
    if (parse_experiment(name))
      throw std::invalid_argument("custom pipeline may not reuse the reserved name '" + name + "'");
    PipelineConfig cfg;
    cfg.experiment_ = Experiment::custom;
    cfg.name_ = std::move(name);
    cfg.stages_ = std::move(stages);
    return cfg;
  }

  const std::string& name() const noexcept { return name_; }
  Experiment experiment() const noexcept { return experiment_; }
  const std::string& dataset() const noexcept { return dataset_; }
  const std::vector<PreprocessStage>& stages() const noexcept { return stages_; }

  /// Row label, e.g. "GCH" or "FCH@LtoR" when not on the default bundle.
  std::string label() const { return dataset_.empty() || dataset_ == "LtoL" ? name_ : name_ + "@" + dataset_; }

  template <typename Stage>
  Stage* find_stage() {
    for (auto& s : stages_)
      if (auto* p = std::get_if<Stage>(&s)) return p;
    return nullptr;
  }
  template <typename Stage>
  const Stage* find_stage() const {
    for (const auto& s : stages_)
      if (const auto* p = std::get_if<Stage>(&s)) return p;
    return nullptr;
  }

  void validate() const {
    for (const auto& s : stages_) {
      if (const auto* g = std::get_if<GaussianStage>(&s); g && (g->size < 1 || g->size % 2 == 0))
        throw std::invalid_argument(name_ + ": gaussian size must be odd and >= 1");
      if (const auto* sh = std::get_if<SharpenStage>(&s); sh && !(sh->center >= 1.0))
        throw std::invalid_argument(name_ + ": sharpen center must be >= 1");
      if (const auto* f = std::get_if<FourierStage>(&s); f && !(f->radius >= 0.0))
        throw std::invalid_argument(name_ + ": fourier mask radius must be >= 0");
    }
    if (canny.low < 0.0 || canny.low > canny.high) throw std::invalid_argument(name_ + ": need 0 <= canny_low <= canny_high");
    if (hough.threshold < 1 || hough.min_length < 1 || hough.max_gap < 0)
      throw std::invalid_argument(name_ + ": invalid hough parameters");
    if (vertical_tol < 0) throw std::invalid_argument(name_ + ": vertical_tol must be >= 0");
    if (!(cluster_window >= 0.0)) throw std::invalid_argument(name_ + ": cluster_window must be >= 0");
    if (calibration) calibration->camera.validate();
  }

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;

 private:
  std::string name_ = "custom";
  Experiment experiment_ = Experiment::custom;
  std::string dataset_;
  std::vector<PreprocessStage> stages_;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct DetectionResult {
  std::optional<ReferenceLine> reference;
  std::vector<LineSegment> segments;  // Hough output
  std::vector<LineSegment> vertical;  // segments that passed the vertical filter
  std::vector<StageTiming> stage_timings;

  double total_seconds() const noexcept {
    double t = 0.0;
    for (const auto& s : stage_timings) t += s.seconds;
    return t;
  }
};

/// A stage failure, tagged with the stage that raised it.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

namespace detail {

template <typename F>
auto timed_stage(std::vector<StageTiming>& timings, std::string name, F&& fn) {
  const auto start = std::chrono::steady_clock::now();
  try {
    auto out = std::forward<F>(fn)();
    timings.push_back({std::move(name), std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
    return out;
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(std::move(name), e.what());
  }
}

}  // namespace detail

/// Intermediate products of one run, for overlays and debugging.
struct PipelineTrace {
  GrayImage preprocessed;
  std::optional<EdgeMap> edges;
};

inline DetectionResult run_pipeline(const PipelineConfig& cfg, const GrayImage& input, PipelineTrace* trace = nullptr) {
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw PipelineError("config", e.what());
  }
  DetectionResult result;
  auto& t = result.stage_timings;
  GrayImage img = input;
  if (cfg.calibration) {
    img = detail::timed_stage(t, "undistort", [&] { return undistort(img, cfg.calibration->camera); });
    if (cfg.calibration->roi)
      img = detail::timed_stage(t, "roi", [&] { return roi_crop(img, *cfg.calibration->roi); });
  }
  for (const auto& stage : cfg.stages())
    img = detail::timed_stage(t, std::string(stage_name(stage)), [&] { return apply_stage(img, stage); });
  EdgeMap edges = detail::timed_stage(t, "canny", [&] { return canny(img, cfg.canny); });
  result.segments = detail::timed_stage(t, "hough", [&] { return hough_segments(edges, cfg.hough); });
  result.vertical = detail::timed_stage(t, "vertical", [&] { return filter_vertical(result.segments, cfg.vertical_tol); });
  result.reference = detail::timed_stage(t, "average", [&] { return hough_average(result.vertical, cfg.cluster_window); });
  if (trace) {
    trace->preprocessed = std::move(img);
    trace->edges = std::move(edges);
  }
  return result;
}

}  // namespace thinline

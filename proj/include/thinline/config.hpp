#pragma once

// JSON form of PipelineConfig.
//
//   {"name": "FCH", "dataset": "RtoR", "canny_high": 90}
//   {"name": "GCH@LtoR"}
//   {"name": "mine", "preprocessing": [{"type": "gaussian", "size": 3}, {"type": "fourier", "radius": 64}]}
//
// Named experiments take their stage list from the name; per-stage keys
// (gaussian_size, sharpen_center, ...) only retune stages that exist.

#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "thinline/pipeline.hpp"

namespace thinline {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline void require_known_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get_as(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": key '" + key + "' is missing or has the wrong type");
  }
}

inline Kernel kernel_from_json(const json& j, const std::string& where) {
  try {
    return Kernel::from_rows(j.get<std::vector<std::vector<double>>>());
  } catch (const json::exception&) {
    throw ConfigError(where + ": kernel must be an array of numeric rows");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline json kernel_to_json(const Kernel& k) {
  json rows = json::array();
  for (int y = 0; y < k.height(); ++y) {
    json row = json::array();
    for (int x = 0; x < k.width(); ++x) row.push_back(k.at(x - k.radius_x(), y - k.radius_y()));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline PreprocessStage stage_from_json(const json& j) {
  const std::string where = "preprocessing stage";
  if (!j.is_object() || !j.contains("type")) throw ConfigError(where + ": expected an object with a 'type'");
  const auto type = get_as<std::string>(j, "type", where);
  if (type == "gaussian") {
    require_known_keys(j, {"type", "size", "sigma"}, "gaussian stage");
    GaussianStage g;
    if (j.contains("size")) g.size = get_as<int>(j, "size", "gaussian stage");
    if (j.contains("sigma")) g.sigma = get_as<double>(j, "sigma", "gaussian stage");
    return g;
  }
  if (type == "sharpen") {
    require_known_keys(j, {"type", "center"}, "sharpen stage");
    SharpenStage s;
    if (j.contains("center")) s.center = get_as<double>(j, "center", "sharpen stage");
    return s;
  }
  if (type == "emboss") {
    require_known_keys(j, {"type", "kernel"}, "emboss stage");
    EmbossStage e;
    if (j.contains("kernel")) e.kernel = kernel_from_json(j.at("kernel"), "emboss stage");
    return e;
  }
  if (type == "fourier") {
    require_known_keys(j, {"type", "radius"}, "fourier stage");
    FourierStage f;
    if (j.contains("radius")) f.radius = get_as<double>(j, "radius", "fourier stage");
    return f;
  }
  throw ConfigError(where + ": unknown type '" + type + "' (expected gaussian, sharpen, emboss or fourier)");
}

inline json stage_to_json(const PreprocessStage& stage) {
  return std::visit(
      [](const auto& st) -> json {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, GaussianStage>) {
          json j{{"type", "gaussian"}, {"size", st.size}};
          if (st.sigma) j["sigma"] = *st.sigma;
          return j;
        } else if constexpr (std::is_same_v<T, SharpenStage>) {
          return json{{"type", "sharpen"}, {"center", st.center}};
        } else if constexpr (std::is_same_v<T, EmbossStage>) {
          return json{{"type", "emboss"}, {"kernel", kernel_to_json(st.kernel)}};
        } else {
          return json{{"type", "fourier"}, {"radius", st.radius}};
        }
      },
      stage);
}

template <typename Stage>
Stage& stage_for_override(PipelineConfig& cfg, const std::string& key) {
  if (auto* s = cfg.find_stage<Stage>()) return *s;
  throw ConfigError("config '" + cfg.name() + "': key '" + key + "' has no matching preprocessing stage");
}

}  // namespace detail

inline nlohmann::json camera_to_json(const CameraModel& m) {
  const auto d = m.coefficients();
  return {{"fx", m.fx}, {"fy", m.fy}, {"cx", m.cx}, {"cy", m.cy}, {"dist", std::vector<double>(d.begin(), d.end())}};
}

/// Either {"preset": "C1"} or explicit {"fx", "fy", "cx", "cy", "dist": [k1, k2, p1, p2, k3, k4, k5, k6]}.
/// A shorter dist list leaves the remaining coefficients at zero.
inline CameraModel camera_from_json(const nlohmann::json& j) {
  const std::string where = "camera";
  if (j.is_object() && j.contains("preset")) {
    detail::require_known_keys(j, {"preset"}, where);
    const auto name = detail::get_as<std::string>(j, "preset", where);
    if (auto m = camera_preset(name)) return *m;
    std::string valid;
    for (auto n : kCameraPresetNames) valid += (valid.empty() ? "" : ", ") + std::string(n);
    throw ConfigError("camera: unknown preset '" + name + "' (valid: " + valid + ")");
  }
  detail::require_known_keys(j, {"fx", "fy", "cx", "cy", "dist"}, where);
  std::array<double, 8> d{};
  if (j.contains("dist")) {
    const auto v = detail::get_as<std::vector<double>>(j, "dist", where);
    if (v.size() > 8) throw ConfigError("camera: dist has more than 8 coefficients");
    std::copy(v.begin(), v.end(), d.begin());
  }
  try {
    return CameraModel::from_coefficients(detail::get_as<double>(j, "fx", where), detail::get_as<double>(j, "fy", where),
                                          detail::get_as<double>(j, "cx", where), detail::get_as<double>(j, "cy", where), d);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  using detail::get_as;
  const std::string where = "config";
  detail::require_known_keys(j,
                             {"name", "dataset", "preprocessing", "gaussian_size", "gaussian_sigma", "sharpen_center",
                              "emboss_kernel", "fourier_mask_radius", "canny_low", "canny_high", "hough_threshold",
                              "min_line_length", "max_line_gap", "vertical_tol", "cluster_window", "camera", "roi"},
                             where);
  std::string name = get_as<std::string>(j, "name", where);
  std::string dataset = "LtoL";
  if (const auto at = name.find('@'); at != std::string::npos) {
    dataset = name.substr(at + 1);
    name.resize(at);
  }
  if (j.contains("dataset")) {
    const auto ds = get_as<std::string>(j, "dataset", where);
    if (name.size() != get_as<std::string>(j, "name", where).size() && ds != dataset)
      throw ConfigError("config: dataset '" + ds + "' contradicts the name suffix '@" + dataset + "'");
    dataset = ds;
  }

  PipelineConfig cfg;
  const auto experiment = parse_experiment(name);
  try {
    if (experiment) {
      if (j.contains("preprocessing"))
        throw ConfigError("config '" + name + "': named experiments have a fixed stage list; use a custom name");
      cfg = PipelineConfig::named(*experiment, dataset);
    } else {
      if (j.contains("dataset") || dataset != "LtoL")
        throw ConfigError("config '" + name + "': dataset bundles apply only to GCH, GSCH, GECH and FCH");
      if (!j.contains("preprocessing") || !j.at("preprocessing").is_array())
        throw ConfigError("config '" + name + "': custom configs need a 'preprocessing' array");
      std::vector<PreprocessStage> stages;
      for (const auto& s : j.at("preprocessing")) stages.push_back(detail::stage_from_json(s));
      cfg = PipelineConfig::custom(name, std::move(stages));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (j.contains("gaussian_size"))
    detail::stage_for_override<GaussianStage>(cfg, "gaussian_size").size = get_as<int>(j, "gaussian_size", where);
  if (j.contains("gaussian_sigma"))
    detail::stage_for_override<GaussianStage>(cfg, "gaussian_sigma").sigma = get_as<double>(j, "gaussian_sigma", where);
  if (j.contains("sharpen_center"))
    detail::stage_for_override<SharpenStage>(cfg, "sharpen_center").center = get_as<double>(j, "sharpen_center", where);
  if (j.contains("emboss_kernel"))
    detail::stage_for_override<EmbossStage>(cfg, "emboss_kernel").kernel =
        detail::kernel_from_json(j.at("emboss_kernel"), "emboss_kernel");
  if (j.contains("fourier_mask_radius"))
    detail::stage_for_override<FourierStage>(cfg, "fourier_mask_radius").radius =
        get_as<double>(j, "fourier_mask_radius", where);
  if (j.contains("canny_low")) cfg.canny.low = get_as<double>(j, "canny_low", where);
  if (j.contains("canny_high")) cfg.canny.high = get_as<double>(j, "canny_high", where);
  if (j.contains("hough_threshold")) cfg.hough.threshold = get_as<int>(j, "hough_threshold", where);
  if (j.contains("min_line_length")) cfg.hough.min_length = get_as<int>(j, "min_line_length", where);
  if (j.contains("max_line_gap")) cfg.hough.max_gap = get_as<int>(j, "max_line_gap", where);
  if (j.contains("vertical_tol")) cfg.vertical_tol = get_as<int>(j, "vertical_tol", where);
  if (j.contains("cluster_window")) cfg.cluster_window = get_as<double>(j, "cluster_window", where);

  if (j.contains("camera")) {
    Calibration cal{camera_from_json(j.at("camera")), std::nullopt};
    if (j.contains("roi")) {
      const auto& r = j.at("roi");
      detail::require_known_keys(r, {"x", "y", "width", "height"}, "roi");
      cal.roi = RegionOfInterest{get_as<int>(r, "x", "roi"), get_as<int>(r, "y", "roi"), get_as<int>(r, "width", "roi"),
                                 get_as<int>(r, "height", "roi")};
      if (cal.roi->width <= 0 || cal.roi->height <= 0 || cal.roi->x0 < 0 || cal.roi->y0 < 0)
        throw ConfigError("roi: origin must be >= 0 and extent positive");
    }
    cfg.calibration = std::move(cal);
  } else if (j.contains("roi")) {
    throw ConfigError("config: 'roi' requires 'camera'");
  }

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

/// Fully explicit JSON; config_from_json(config_to_json(c)) == c.
inline nlohmann::json config_to_json(const PipelineConfig& cfg) {
  nlohmann::json j;
  j["name"] = cfg.name();
  if (cfg.experiment() != Experiment::custom) {
    j["dataset"] = cfg.dataset();
    if (const auto* g = cfg.find_stage<GaussianStage>()) {
      j["gaussian_size"] = g->size;
      if (g->sigma) j["gaussian_sigma"] = *g->sigma;
    }
    if (const auto* s = cfg.find_stage<SharpenStage>()) j["sharpen_center"] = s->center;
    if (const auto* e = cfg.find_stage<EmbossStage>()) j["emboss_kernel"] = detail::kernel_to_json(e->kernel);
    if (const auto* f = cfg.find_stage<FourierStage>()) j["fourier_mask_radius"] = f->radius;
  } else {
    j["preprocessing"] = nlohmann::json::array();
    for (const auto& s : cfg.stages()) j["preprocessing"].push_back(detail::stage_to_json(s));
  }
  j["canny_low"] = cfg.canny.low;
  j["canny_high"] = cfg.canny.high;
  j["hough_threshold"] = cfg.hough.threshold;
  j["min_line_length"] = cfg.hough.min_length;
  j["max_line_gap"] = cfg.hough.max_gap;
  j["vertical_tol"] = cfg.vertical_tol;
  j["cluster_window"] = cfg.cluster_window;
  if (cfg.calibration) {
    j["camera"] = camera_to_json(cfg.calibration->camera);
    if (const auto& r = cfg.calibration->roi)
      j["roi"] = {{"x", r->x0}, {"y", r->y0}, {"width", r->width}, {"height", r->height}};
  }
  return j;
}

inline PipelineConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace thinline

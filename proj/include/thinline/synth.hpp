#pragma once

// Seeded synthetic shaft scenes: a thin bright vertical wire over a lit
// concrete-like background, with optional cracks, a hoist rope and noise.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "thinline/image.hpp"

namespace thinline {

struct RopeSpec {
  double x = 0.0;         // band center, pixels
  double width = 12.0;    // pixels
  double contrast = 0.1;  // intensity delta at the band center
};

struct SceneSpec {
  int width = 512;
  int height = 512;
  double wire_x = 256.0;
  double wire_width = 1.0;
  double wire_contrast = 0.12;
  double background_level = 0.45;
  double lighting_gradient = 0.0;  // intensity added from top row to bottom row
  int crack_count = 0;
  double crack_contrast = -0.15;
  std::optional<RopeSpec> rope;
  double noise_sigma = 0.02;
  double texture_amplitude = 0.0;  // std of the correlated wall texture
  double texture_scale = 3.0;      // texture correlation length, pixels
  std::uint64_t seed = 0;

  void validate() const {
    if (width < 1 || height < 1) throw std::invalid_argument("SceneSpec: dimensions must be positive");
    if (!(wire_x >= 0.0 && wire_x < width)) throw std::invalid_argument("SceneSpec: wire_x outside the frame");
    if (!(wire_width >= 1.0)) throw std::invalid_argument("SceneSpec: wire_width must be >= 1");
    if (crack_count < 0) throw std::invalid_argument("SceneSpec: crack_count must be >= 0");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("SceneSpec: noise_sigma must be >= 0");
    if (rope && !(rope->width > 0.0)) throw std::invalid_argument("SceneSpec: rope width must be positive");
    if (!(texture_amplitude >= 0.0) || !(texture_scale > 0.0))
      throw std::invalid_argument("SceneSpec: texture amplitude must be >= 0 and scale > 0");
  }
};

struct GroundTruth {
  double wire_x = 0.0;
  bool present = true;
  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Crack {
  std::vector<Point2> points;
  double width = 1.0;
};

namespace detail {

// Independent generator streams per purpose so crack geometry can be replayed
// without drawing the noise field.
enum class Stream : std::uint32_t { noise = 1, cracks = 2, corpus = 3, texture = 4 };

inline std::mt19937_64 make_stream(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Uniform in [0, 1) from the top 53 bits; portable across standard libraries.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Box-Muller, one variate per call.
inline double standard_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double interval_overlap(double a0, double a1, double b0, double b1) noexcept {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

inline double distance_to_segment(double px, double py, Point2 a, Point2 b) noexcept {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - a.x) * vx + (py - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (a.x + t * vx), py - (a.y + t * vy));
}

// Unit-variance white noise smoothed by a separable Gaussian of the given scale,
// rescaled back to unit variance.
inline GrayImage correlated_texture(int w, int h, double scale, std::mt19937_64& rng) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * scale)));
  std::vector<double> taps(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += taps[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (scale * scale));
  double energy = 0.0;
  for (auto& t : taps) {
    t /= sum;
    energy += t * t;
  }
  GrayImage white(w, h);
  for (auto& v : white.pixels()) v = standard_normal(rng);
  GrayImage rows(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += taps[static_cast<std::size_t>(i + r)] * white(std::clamp(x + i, 0, w - 1), y);
      rows(x, y) = acc;
    }
  GrayImage out(w, h);
  const double norm = 1.0 / energy;  // per-axis energy squared is the 2-D variance
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += taps[static_cast<std::size_t>(i + r)] * rows(x, std::clamp(y + i, 0, h - 1));
      out(x, y) = acc * norm;
    }
  return out;
}

}  // namespace detail

/// Crack polylines for a scene; a pure function of (seed, crack_count, frame size).
/// Every crack starts inside the frame.
inline std::vector<Crack> crack_geometry(const SceneSpec& spec) {
  auto rng = detail::make_stream(spec.seed, detail::Stream::cracks);
  std::vector<Crack> cracks;
  cracks.reserve(static_cast<std::size_t>(spec.crack_count));
  for (int c = 0; c < spec.crack_count; ++c) {
    Crack crack;
    crack.width = detail::uniform(rng, 1.0, 2.5);
    Point2 p{detail::uniform(rng, 0.0, spec.width - 1.0), detail::uniform(rng, 0.0, spec.height - 1.0)};
    double heading = detail::uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const int steps = 4 + static_cast<int>(rng() % 7);
    crack.points.push_back(p);
    for (int s = 0; s < steps; ++s) {
      heading += detail::uniform(rng, -0.6, 0.6);
      const double len = detail::uniform(rng, 10.0, 40.0);
      p = {p.x + len * std::cos(heading), p.y + len * std::sin(heading)};
      crack.points.push_back(p);
    }
    cracks.push_back(std::move(crack));
  }
  return cracks;
}

/// Fraction of pixel column x covered by the wire stripe.
inline double wire_coverage(const SceneSpec& spec, int x) noexcept {
  const double half = 0.5 * spec.wire_width;
  return detail::interval_overlap(x - 0.5, x + 0.5, spec.wire_x - half, spec.wire_x + half);
}

/// Rope profile at column x: raised-cosine band, zero outside its width.
inline double rope_profile(const RopeSpec& rope, double x) noexcept {
  const double t = (x - rope.x) / rope.width;
  if (std::abs(t) >= 0.5) return 0.0;
  return rope.contrast * 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * t));
}

inline std::pair<GrayImage, GroundTruth> generate(const SceneSpec& spec) {
  spec.validate();
  const int w = spec.width;
  const int h = spec.height;
  GrayImage img(w, h);

  std::vector<double> column(static_cast<std::size_t>(w), 0.0);
  for (int x = 0; x < w; ++x) {
    double v = spec.wire_contrast * wire_coverage(spec, x);
    if (spec.rope) v += rope_profile(*spec.rope, x);
    column[static_cast<std::size_t>(x)] = v;
  }
  for (int y = 0; y < h; ++y) {
    const double base = spec.background_level + (h > 1 ? spec.lighting_gradient * y / (h - 1) : 0.0);
    for (int x = 0; x < w; ++x) img(x, y) = base + column[static_cast<std::size_t>(x)];
  }

  if (spec.crack_count > 0) {
    GrayImage coverage(w, h);
    for (const auto& crack : crack_geometry(spec)) {
      const double reach = 0.5 * crack.width + 0.5;
      for (std::size_t i = 0; i + 1 < crack.points.size(); ++i) {
        const Point2 a = crack.points[i];
        const Point2 b = crack.points[i + 1];
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - reach)));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + reach)));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - reach)));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + reach)));
        for (int y = y0; y <= y1; ++y)
          for (int x = x0; x <= x1; ++x) {
            const double c = std::clamp(reach - detail::distance_to_segment(x, y, a, b), 0.0, 1.0);
            coverage(x, y) = std::max(coverage(x, y), c);
          }
      }
    }
    auto px = img.pixels();
    const auto cov = coverage.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] += spec.crack_contrast * cov[i];
  }

  if (spec.texture_amplitude > 0.0) {
    auto rng = detail::make_stream(spec.seed, detail::Stream::texture);
    const GrayImage tex = detail::correlated_texture(w, h, spec.texture_scale, rng);
    auto px = img.pixels();
    const auto t = tex.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] += spec.texture_amplitude * t[i];
  }

  if (spec.noise_sigma > 0.0) {
    auto rng = detail::make_stream(spec.seed, detail::Stream::noise);
    for (auto& v : img.pixels()) v += spec.noise_sigma * detail::standard_normal(rng);
  }
  return {std::move(img), GroundTruth{spec.wire_x, spec.wire_contrast != 0.0}};
}

enum class NoiseProfile { clean, cracked, cracked_rope, dark };

inline constexpr std::array<std::pair<std::string_view, NoiseProfile>, 4> kNoiseProfiles{{
    {"clean", NoiseProfile::clean},
    {"cracked", NoiseProfile::cracked},
    {"cracked+rope", NoiseProfile::cracked_rope},
    {"dark", NoiseProfile::dark},
}};

inline std::optional<NoiseProfile> parse_profile(std::string_view name) {
  for (const auto& [n, p] : kNoiseProfiles)
    if (n == name) return p;
  return std::nullopt;
}

inline std::string_view profile_name(NoiseProfile p) {
  for (const auto& [n, q] : kNoiseProfiles)
    if (q == p) return n;
  return "?";
}

/// Per-image wire contrast is drawn uniformly from [low, high).
struct ContrastRange {
  double low;
  double high;
};

inline ContrastRange profile_contrast(NoiseProfile profile) {
  return profile == NoiseProfile::dark ? ContrastRange{0.1, 0.175} : ContrastRange{0.4, 0.7};
}

/// Scene template for a profile; wire_x, wire contrast, rope position and seed
/// are filled per image.
inline SceneSpec profile_template(NoiseProfile profile) {
  SceneSpec s;
  s.wire_contrast = profile_contrast(profile).low;
  s.background_level = 0.45;
  s.noise_sigma = 0.02;
  switch (profile) {
    case NoiseProfile::clean:
      break;
    case NoiseProfile::cracked:
      s.crack_count = 20;
      s.crack_contrast = -0.25;
      s.lighting_gradient = -0.1;
      s.texture_amplitude = 0.02;
      break;
    case NoiseProfile::cracked_rope:
      s.crack_count = 20;
      s.crack_contrast = -0.25;
      s.lighting_gradient = -0.1;
      s.texture_amplitude = 0.02;
      s.rope = RopeSpec{0.0, 40.0, 0.8};
      break;
    case NoiseProfile::dark:
      s.background_level = 0.1;
      s.lighting_gradient = -0.04;
      break;
  }
  return s;
}

struct Sample {
  GrayImage image;
  GroundTruth truth;
};

/// Spec of image `index` of a corpus; pure function of (profile, seed, index).
inline SceneSpec corpus_scene(NoiseProfile profile, std::uint64_t seed, std::uint64_t index) {
  SceneSpec s = profile_template(profile);
  auto rng = detail::make_stream(seed, detail::Stream::corpus, index);
  s.wire_x = detail::uniform(rng, 0.2 * s.width, 0.8 * s.width);
  const auto contrast = profile_contrast(profile);
  s.wire_contrast = detail::uniform(rng, contrast.low, contrast.high);
  if (s.rope) {
    // the rope hangs 25..80 px to either side of the wire, 16 px up to the template width
    const double side = detail::uniform01(rng) < 0.5 ? -1.0 : 1.0;
    const double offset = detail::uniform(rng, 25.0, 80.0);
    s.rope->width = detail::uniform(rng, 16.0, s.rope->width);
    s.rope->x = s.wire_x + side * offset;
  }
  s.seed = seed + index;
  return s;
}

inline std::vector<Sample> make_corpus(NoiseProfile profile, std::size_t n, std::uint64_t seed) {
  std::vector<Sample> corpus;
  corpus.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [img, truth] = generate(corpus_scene(profile, seed, i));
    corpus.push_back({std::move(img), truth});
  }
  return corpus;
}

}  // namespace thinline

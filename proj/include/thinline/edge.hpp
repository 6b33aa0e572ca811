#pragma once

// Canny edge detection: Sobel gradients, non-maximum suppression and
// 8-connected hysteresis. Smoothing is left to the preprocessing stage.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "thinline/image.hpp"

namespace thinline {

/// Gradient direction quantized to the four suppression sectors.
enum class Sector : std::uint8_t { deg0, deg45, deg90, deg135 };

struct GradientField {
  GrayImage gx;
  GrayImage gy;
  GrayImage magnitude;
  std::vector<Sector> direction;  // row-major, same extent as the planes

  int width() const noexcept { return magnitude.width(); }
  int height() const noexcept { return magnitude.height(); }
  Sector sector(int x, int y) const noexcept {
    return direction[static_cast<std::size_t>(y) * static_cast<std::size_t>(width()) + static_cast<std::size_t>(x)];
  }
};

class EdgeMap {
 public:
  EdgeMap(int width, int height)
      : width_(width), height_(height), mask_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("EdgeMap: dimensions must be positive");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool operator()(int x, int y) const noexcept { return mask_[index(x, y)] != 0; }
  void set(int x, int y, bool on = true) noexcept { mask_[index(x, y)] = on ? 1 : 0; }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto m : mask_) n += m;
    return n;
  }

  GrayImage to_image() const {
    GrayImage img(width_, height_);
    auto px = img.pixels();
    for (std::size_t i = 0; i < mask_.size(); ++i) px[i] = mask_[i] ? 1.0 : 0.0;
    return img;
  }

  friend bool operator==(const EdgeMap&, const EdgeMap&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> mask_;
};

namespace detail {

// tan(22.5 deg) and tan(67.5 deg); sector boundaries are tested on |gx|, |gy|
// so a left-right mirror swaps 45 and 135 exactly.
inline constexpr double kTan22_5 = 0.41421356237309503;
inline constexpr double kTan67_5 = 2.4142135623730949;

inline Sector quantize_direction(double gx, double gy) noexcept {
  const double ax = std::abs(gx);
  const double ay = std::abs(gy);
  if (ay <= kTan22_5 * ax) return Sector::deg0;
  if (ay >= kTan67_5 * ax) return Sector::deg90;
  return (gx > 0.0) == (gy > 0.0) ? Sector::deg45 : Sector::deg135;
}

}  // namespace detail

/// 3x3 Sobel with replicated borders. `scale` multiplies both components
/// (canny uses 255 so thresholds read on the 8-bit scale).
inline GradientField sobel_gradients(const GrayImage& img, double scale = 1.0) {
  const int w = img.width();
  const int h = img.height();
  if (w < 3 || h < 3)
    throw std::invalid_argument("sobel_gradients: image must be at least 3x3, got " + std::to_string(w) + "x" +
                                std::to_string(h));
  GradientField g{GrayImage(w, h), GrayImage(w, h), GrayImage(w, h),
                  std::vector<Sector>(static_cast<std::size_t>(w) * static_cast<std::size_t>(h))};
  for (int y = 0; y < h; ++y) {
    const int ym = std::max(y - 1, 0);
    const int yp = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0);
      const int xp = std::min(x + 1, w - 1);
      // outer taps are paired first so mirroring negates / preserves the sums exactly
      const double gx = ((img(xp, ym) - img(xm, ym)) + (img(xp, yp) - img(xm, yp))) + 2.0 * (img(xp, y) - img(xm, y));
      const double gy = ((img(xm, yp) - img(xm, ym)) + (img(xp, yp) - img(xp, ym))) + 2.0 * (img(x, yp) - img(x, ym));
      const double sx = gx * scale;
      const double sy = gy * scale;
      g.gx(x, y) = sx;
      g.gy(x, y) = sy;
      g.magnitude(x, y) = std::sqrt(sx * sx + sy * sy);
      g.direction[static_cast<std::size_t>(y) * w + x] = detail::quantize_direction(sx, sy);
    }
  }
  return g;
}

struct CannyThresholds {
  double low = 1.0;
  double high = 100.0;
  friend bool operator==(const CannyThresholds&, const CannyThresholds&) = default;
};

/// Non-maximum suppression: a pixel survives when its magnitude is positive
/// and >= both neighbors along its gradient sector. Off-image neighbors count as 0.
inline GrayImage non_maximum_suppression(const GradientField& g) {
  const int w = g.width();
  const int h = g.height();
  GrayImage out(w, h);
  auto mag = [&](int x, int y) { return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : g.magnitude(x, y); };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double m = g.magnitude(x, y);
      if (m <= 0.0) continue;
      int dx = 0, dy = 0;
      switch (g.sector(x, y)) {
        case Sector::deg0: dx = 1; dy = 0; break;
        case Sector::deg90: dx = 0; dy = 1; break;
        case Sector::deg45: dx = 1; dy = 1; break;
        case Sector::deg135: dx = -1; dy = 1; break;
      }
      if (m >= mag(x + dx, y + dy) && m >= mag(x - dx, y - dy)) out(x, y) = m;
    }
  return out;
}

/// Strong pixels (>= high) plus weak pixels ([low, high)) 8-connected to them.
inline EdgeMap hysteresis(const GrayImage& suppressed, CannyThresholds t) {
  const int w = suppressed.width();
  const int h = suppressed.height();
  EdgeMap edges(w, h);
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (suppressed(x, y) > 0.0 && suppressed(x, y) >= t.high && !edges(x, y)) {
        edges.set(x, y);
        stack.emplace_back(x, y);
        while (!stack.empty()) {
          const auto [cx, cy] = stack.back();
          stack.pop_back();
          for (int ny = cy - 1; ny <= cy + 1; ++ny)
            for (int nx = cx - 1; nx <= cx + 1; ++nx) {
              if (nx < 0 || ny < 0 || nx >= w || ny >= h || edges(nx, ny)) continue;
              const double m = suppressed(nx, ny);
              if (m > 0.0 && m >= t.low) {
                edges.set(nx, ny);
                stack.emplace_back(nx, ny);
              }
            }
        }
      }
  return edges;
}

/// Canny on an image in [0, 1]; thresholds are on the 0..255 magnitude scale.
inline EdgeMap canny(const GrayImage& img, double low, double high) {
  if (!(low >= 0.0) || !(high >= 0.0) || low > high)
    throw std::invalid_argument("canny: thresholds must satisfy 0 <= low <= high");
  return hysteresis(non_maximum_suppression(sobel_gradients(img, 255.0)), {low, high});
}

inline EdgeMap canny(const GrayImage& img, CannyThresholds t = {}) { return canny(img, t.low, t.high); }

}  // namespace thinline

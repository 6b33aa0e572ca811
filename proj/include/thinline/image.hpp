#pragma once

// Pixel buffers, kernels and 2-D correlation shared by every stage.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace thinline {

/// Single-channel image, row-major, intensities nominally in [0, 1].
///
/// Values outside [0, 1] are allowed between stages (sharpening and the
/// Fourier path overshoot); clamping happens only when writing to disk.
class GrayImage {
 public:
  GrayImage() = default;

  GrayImage(int width, int height, double fill = 0.0)
      : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("GrayImage: dimensions must be positive, got " +
                                  std::to_string(width) + "x" + std::to_string(height));
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  GrayImage(int width, int height, std::vector<double> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("GrayImage: dimensions must be positive");
    if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw std::invalid_argument("GrayImage: pixel count does not match width*height");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }
  std::size_t size() const noexcept { return pixels_.size(); }

  double operator()(int x, int y) const noexcept { return pixels_[index(x, y)]; }
  double& operator()(int x, int y) noexcept { return pixels_[index(x, y)]; }

  std::span<const double> pixels() const noexcept { return pixels_; }
  std::span<double> pixels() noexcept { return pixels_; }

  std::span<const double> row(int y) const noexcept {
    return std::span<const double>(pixels_).subspan(index(0, y), static_cast<std::size_t>(width_));
  }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

/// Interleaved RGB image, channels in [0, 1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // r, g, b per pixel

  RgbImage() = default;
  RgbImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("RgbImage: dimensions must be positive");
  }

  std::array<double, 3> at(int x, int y) const {
    const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
    return {data[i], data[i + 1], data[i + 2]};
  }
  void set(int x, int y, std::array<double, 3> rgb) {
    const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
    data[i] = rgb[0];
    data[i + 1] = rgb[1];
    data[i + 2] = rgb[2];
  }
};

/// Correlation kernel with an odd extent on each axis; the anchor is the center.
class Kernel {
 public:
  Kernel() : Kernel(1, 1, {1.0}) {}

  Kernel(int width, int height, std::vector<double> weights)
      : width_(width), height_(height), weights_(std::move(weights)) {
    if (width < 1 || height < 1 || width % 2 == 0 || height % 2 == 0)
      throw std::invalid_argument("Kernel: both dimensions must be odd and >= 1, got " +
                                  std::to_string(width) + "x" + std::to_string(height));
    if (weights_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw std::invalid_argument("Kernel: weight count does not match dimensions");
  }

  /// Kernel from rows listed top to bottom.
  static Kernel from_rows(std::initializer_list<std::initializer_list<double>> rows) { return from_row_range(rows); }
  static Kernel from_rows(const std::vector<std::vector<double>>& rows) { return from_row_range(rows); }

  static Kernel identity() { return Kernel(); }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int radius_x() const noexcept { return width_ / 2; }
  int radius_y() const noexcept { return height_ / 2; }

  /// Weight at offset (dx, dy) from the anchor.
  double at(int dx, int dy) const noexcept {
    return weights_[static_cast<std::size_t>(dy + radius_y()) * static_cast<std::size_t>(width_) +
                    static_cast<std::size_t>(dx + radius_x())];
  }

  std::span<const double> weights() const noexcept { return weights_; }

  double sum() const noexcept {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
  }

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  template <typename Rows>
  static Kernel from_row_range(const Rows& rows) {
    const int h = static_cast<int>(rows.size());
    const int w = h == 0 ? 0 : static_cast<int>(rows.begin()->size());
    std::vector<double> weights;
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != w) throw std::invalid_argument("Kernel: ragged rows");
      weights.insert(weights.end(), r.begin(), r.end());
    }
    return Kernel(w, h, std::move(weights));
  }

  int width_;
  int height_;
  std::vector<double> weights_;
};

enum class BorderPolicy {
  replicate,  // aaa|abcd|ddd
  reflect,    // cb|abcd|cb  (edge pixel not repeated)
};

namespace detail {

inline int border_index(int i, int n, BorderPolicy border) noexcept {
  if (i >= 0 && i < n) return i;
  if (n == 1) return 0;
  switch (border) {
    case BorderPolicy::replicate:
      return std::clamp(i, 0, n - 1);
    case BorderPolicy::reflect: {
      const int period = 2 * (n - 1);
      int m = i % period;
      if (m < 0) m += period;
      return m < n ? m : period - m;
    }
  }
  return std::clamp(i, 0, n - 1);
}

}  // namespace detail

/// Kernel-weighted neighborhood sum: out(x, y) = sum K(i, j) * img(x + i, y + j).
///
/// The kernel is applied as written (correlation, no flip), which is the form
/// the emboss and Sobel weights are specified in.
inline GrayImage convolve2d(const GrayImage& img, const Kernel& k,
                            BorderPolicy border = BorderPolicy::replicate) {
  if (k.width() > std::min(img.width(), img.height()) || k.height() > std::min(img.width(), img.height()))
    throw std::invalid_argument("convolve2d: kernel " + std::to_string(k.width()) + "x" +
                                std::to_string(k.height()) + " does not fit image " +
                                std::to_string(img.width()) + "x" + std::to_string(img.height()));
  const int w = img.width();
  const int h = img.height();
  const int rx = k.radius_x();
  const int ry = k.radius_y();
  GrayImage out(w, h);

  std::vector<int> col_index(static_cast<std::size_t>(w + 2 * rx));
  for (int x = -rx; x < w + rx; ++x)
    col_index[static_cast<std::size_t>(x + rx)] = detail::border_index(x, w, border);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -ry; dy <= ry; ++dy) {
        const auto src = img.row(detail::border_index(y + dy, h, border));
        for (int dx = -rx; dx <= rx; ++dx)
          acc += k.at(dx, dy) * src[static_cast<std::size_t>(col_index[static_cast<std::size_t>(x + dx + rx)])];
      }
      out(x, y) = acc;
    }
  }
  return out;
}

inline constexpr std::array<double, 3> kLumaWeights{0.299, 0.587, 0.114};

inline GrayImage to_gray(const RgbImage& rgb, std::array<double, 3> weights = kLumaWeights) {
  if (std::abs(weights[0] + weights[1] + weights[2] - 1.0) > 1e-9)
    throw std::invalid_argument("to_gray: channel weights must sum to 1");
  if (rgb.width <= 0 || rgb.height <= 0 ||
      rgb.data.size() != static_cast<std::size_t>(rgb.width) * static_cast<std::size_t>(rgb.height) * 3)
    throw std::invalid_argument("to_gray: malformed RGB buffer");
  GrayImage out(rgb.width, rgb.height);
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = weights[0] * rgb.data[3 * i] + weights[1] * rgb.data[3 * i + 1] + weights[2] * rgb.data[3 * i + 2];
  return out;
}

/// Mirror about the vertical axis (x -> width - 1 - x).
inline GrayImage mirror_horizontal(const GrayImage& img) {
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out(img.width() - 1 - x, y) = img(x, y);
  return out;
}

inline GrayImage transpose(const GrayImage& img) {
  GrayImage out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out(y, x) = img(x, y);
  return out;
}

/// Affine map of the pixel range onto [0, 1]; a flat image maps to all `flat_value`.
inline GrayImage rescale_minmax(const GrayImage& img, double flat_value = 0.5, double flat_eps = 1e-9) {
  const auto px = img.pixels();
  const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
  const double min = *lo;
  const double range = *hi - *lo;
  GrayImage out(img.width(), img.height(), flat_value);
  if (range <= flat_eps) return out;
  auto dst = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) dst[i] = (px[i] - min) / range;
  return out;
}

}  // namespace thinline

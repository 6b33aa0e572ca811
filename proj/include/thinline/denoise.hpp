#pragma once

// The preprocessing front-ends: Gaussian blur, sharpening, embossing and
// Fourier high-pass filtering.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "thinline/fft.hpp"
#include "thinline/image.hpp"

namespace thinline {

/// Default sigma for a given odd kernel size when none is configured.
inline double auto_sigma(int size) noexcept { return 0.3 * ((size - 1) * 0.5 - 1.0) + 0.8; }

/// Square Gaussian kernel sampled at integer offsets, normalized to unit sum.
inline Kernel gaussian_kernel(int size, std::optional<double> sigma = std::nullopt) {
  if (size < 1 || size % 2 == 0)
    throw std::invalid_argument("gaussian_kernel: size must be odd and >= 1, got " + std::to_string(size));
  const double s = sigma.value_or(auto_sigma(size));
  if (!(s > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  const int r = size / 2;
  const double norm = 1.0 / (2.0 * std::numbers::pi * s * s);
  std::vector<double> weights;
  weights.reserve(static_cast<std::size_t>(size) * static_cast<std::size_t>(size));
  double total = 0.0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) {
      const double g = norm * std::exp(-(x * x + y * y) / (2.0 * s * s));
      weights.push_back(g);
      total += g;
    }
  for (auto& w : weights) w /= total;
  return Kernel(size, size, std::move(weights));
}

namespace detail {

// Correlation with a kernel symmetric under (dx, dy) -> (dy, dx). Mirrored tap
// pairs are added before weighting, so transposing the input transposes the
// output bit for bit.
inline GrayImage convolve_transpose_symmetric(const GrayImage& img, const Kernel& k) {
  if (k.width() != k.height()) throw std::invalid_argument("convolve_transpose_symmetric: kernel must be square");
  if (k.width() > std::min(img.width(), img.height()))
    throw std::invalid_argument("gaussian_blur: kernel " + std::to_string(k.width()) + " does not fit image " +
                                std::to_string(img.width()) + "x" + std::to_string(img.height()));
  const int w = img.width();
  const int h = img.height();
  const int r = k.radius_x();
  auto clampx = [w](int x) { return std::clamp(x, 0, w - 1); };
  auto clampy = [h](int y) { return std::clamp(y, 0, h - 1); };
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int a = -r; a <= r; ++a) {
        acc += k.at(a, a) * img(clampx(x + a), clampy(y + a));
        for (int b = a + 1; b <= r; ++b)
          acc += k.at(a, b) * (img(clampx(x + a), clampy(y + b)) + img(clampx(x + b), clampy(y + a)));
      }
      out(x, y) = acc;
    }
  }
  return out;
}

}  // namespace detail

/// Gaussian smoothing with replicated borders.
inline GrayImage gaussian_blur(const GrayImage& img, int size, std::optional<double> sigma = std::nullopt) {
  return detail::convolve_transpose_symmetric(img, gaussian_kernel(size, sigma));
}

/// 3x3 sharpening kernel: `center` at the anchor, -(center - 1) / 4 on the
/// four neighbors, zero corners. The weights sum to one, so this is
/// f + alpha * (f - mean4(f)) with alpha = center - 1.
inline Kernel sharpen_kernel(double center) {
  if (!(center >= 1.0)) throw std::invalid_argument("sharpen: center weight must be >= 1");
  const double n = -(center - 1.0) / 4.0;
  return Kernel::from_rows({{0.0, n, 0.0}, {n, center, n}, {0.0, n, 0.0}});
}

inline GrayImage sharpen(const GrayImage& img, double center) {
  return convolve2d(img, sharpen_kernel(center));
}

/// Point-antisymmetric relief kernel used by the GECH front-end.
inline Kernel default_emboss_kernel() {
  return Kernel::from_rows({{-5, -4, 0}, {-4, -2, 4}, {0, 4, 5}});
}

/// Emboss response biased to mid-gray and clamped to [0, 1]. Mirrored taps
/// with opposite weights are evaluated as one difference, so a point-
/// antisymmetric kernel maps flat regions to exactly 0.5.
inline GrayImage emboss(const GrayImage& img, const Kernel& k = default_emboss_kernel()) {
  if (k.width() > std::min(img.width(), img.height()) || k.height() > std::min(img.width(), img.height()))
    throw std::invalid_argument("emboss: kernel does not fit the image");
  const int w = img.width();
  const int h = img.height();
  const int rx = k.radius_x();
  const int ry = k.radius_y();
  auto px = [&](int x, int y) { return img(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); };
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = k.at(0, 0) * img(x, y);
      for (int dy = -ry; dy <= ry; ++dy)
        for (int dx = -rx; dx <= rx; ++dx) {
          if (dy < 0 || (dy == 0 && dx <= 0)) continue;
          const double a = k.at(dx, dy);
          const double b = k.at(-dx, -dy);
          if (a == -b)
            acc += a * (px(x + dx, y + dy) - px(x - dx, y - dy));
          else
            acc += a * px(x + dx, y + dy) + b * px(x - dx, y - dy);
        }
      out(x, y) = std::clamp(acc + 0.5, 0.0, 1.0);
    }
  return out;
}

/// Complex spectrum in DC-centered layout: bin (u, v) with signed frequencies
/// u in [-W/2, (W-1)/2], v in [-H/2, (H-1)/2].
class Spectrum {
 public:
  using complex = std::complex<double>;

  Spectrum(int width, int height)
      : width_(width), height_(height), bins_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("Spectrum: dimensions must be positive");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int min_u() const noexcept { return -(width_ / 2); }
  int max_u() const noexcept { return (width_ - 1) / 2; }
  int min_v() const noexcept { return -(height_ / 2); }
  int max_v() const noexcept { return (height_ - 1) / 2; }

  complex operator()(int u, int v) const noexcept { return bins_[index(u, v)]; }
  complex& operator()(int u, int v) noexcept { return bins_[index(u, v)]; }

  std::span<const complex> bins() const noexcept { return bins_; }
  std::span<complex> bins() noexcept { return bins_; }

  /// Raw storage row for frequency v, ordered by u ascending from min_u().
  std::span<complex> centered_row(int v) noexcept {
    return std::span<complex>(bins_).subspan(static_cast<std::size_t>(v - min_v()) * static_cast<std::size_t>(width_),
                                             static_cast<std::size_t>(width_));
  }

 private:
  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v - min_v()) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u - min_u());
  }

  int width_;
  int height_;
  std::vector<complex> bins_;
};

namespace detail {

// Transforms a W x H complex grid in natural (uncentered) order along both axes.
inline void fft2_inplace(std::vector<std::complex<double>>& grid, int w, int h, bool inverse) {
  const fft::Plan row_plan(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    std::span<std::complex<double>> row(grid.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w),
                                        static_cast<std::size_t>(w));
    inverse ? row_plan.inverse(row) : row_plan.forward(row);
  }
  const fft::Plan col_plan(static_cast<std::size_t>(h));
  std::vector<std::complex<double>> column(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) column[static_cast<std::size_t>(y)] = grid[static_cast<std::size_t>(y) * w + x];
    inverse ? col_plan.inverse(column) : col_plan.forward(column);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = column[static_cast<std::size_t>(y)];
  }
}

inline int wrap(int i, int n) noexcept { return ((i % n) + n) % n; }

}  // namespace detail

/// F(u, v) = 1/(WH) * sum_x sum_y f(x, y) e^{-j 2 pi (ux/W + vy/H)}.
inline Spectrum dft2(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  std::vector<std::complex<double>> grid(img.pixels().begin(), img.pixels().end());
  detail::fft2_inplace(grid, w, h, false);
  const double scale = 1.0 / (static_cast<double>(w) * static_cast<double>(h));
  Spectrum spec(w, h);
  for (int v = spec.min_v(); v <= spec.max_v(); ++v)
    for (int u = spec.min_u(); u <= spec.max_u(); ++u)
      spec(u, v) = grid[static_cast<std::size_t>(detail::wrap(v, h)) * w + detail::wrap(u, w)] * scale;
  return spec;
}

/// Complex inverse f(x, y) = sum_u sum_v F(u, v) e^{+j 2 pi (ux/W + vy/H)}.
inline std::vector<std::complex<double>> idft2_complex(const Spectrum& spec) {
  const int w = spec.width();
  const int h = spec.height();
  std::vector<std::complex<double>> grid(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (int v = spec.min_v(); v <= spec.max_v(); ++v)
    for (int u = spec.min_u(); u <= spec.max_u(); ++u)
      grid[static_cast<std::size_t>(detail::wrap(v, h)) * w + detail::wrap(u, w)] = spec(u, v);
  detail::fft2_inplace(grid, w, h, true);
  return grid;
}

/// Real part of the inverse transform.
inline GrayImage idft2(const Spectrum& spec) {
  const auto grid = idft2_complex(spec);
  GrayImage out(spec.width(), spec.height());
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = grid[i].real();
  return out;
}

struct FourierMask {
  double radius = 0.0;
};

/// Zeroes every bin closer than `radius` to DC.
inline void apply_highpass(Spectrum& spec, FourierMask mask) {
  const double r2 = mask.radius * mask.radius;
  for (int v = spec.min_v(); v <= spec.max_v(); ++v)
    for (int u = spec.min_u(); u <= spec.max_u(); ++u)
      if (static_cast<double>(u) * u + static_cast<double>(v) * v < r2) spec(u, v) = 0.0;
}

/// High-pass in the frequency domain, then min-max rescale to [0, 1]. A flat
/// result (e.g. a constant input with the DC bin removed) becomes all 0.5.
inline GrayImage fft_highpass(const GrayImage& img, FourierMask mask) {
  if (!(mask.radius >= 0.0)) throw std::invalid_argument("fft_highpass: mask radius must be >= 0");
  Spectrum spec = dft2(img);
  apply_highpass(spec, mask);
  return rescale_minmax(idft2(spec));
}

}  // namespace thinline

#pragma once

// Lens distortion correction (radial + tangential model) and ROI cropping.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "thinline/image.hpp"

namespace thinline {

/// Pinhole intrinsics plus distortion coefficients, all in pixel / normalized units.
struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double k3 = 0.0;
  double k4 = 0.0;
  double k5 = 0.0;
  double k6 = 0.0;

  /// Coefficients in the conventional order [k1, k2, p1, p2, k3, k4, k5, k6].
  std::array<double, 8> coefficients() const { return {k1, k2, p1, p2, k3, k4, k5, k6}; }

  static CameraModel from_coefficients(double fx, double fy, double cx, double cy,
                                       const std::array<double, 8>& d) {
    CameraModel m{fx, fy, cx, cy, d[0], d[1], d[2], d[3], d[4], d[5], d[6], d[7]};
    m.validate();
    return m;
  }

  bool distortion_free() const noexcept {
    for (double c : coefficients())
      if (c != 0.0) return false;
    return true;
  }

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("CameraModel: focal lengths must be positive");
  }

  friend bool operator==(const CameraModel&, const CameraModel&) = default;
};

/// The four calibrated cameras of the shaft rig (C1..C4).
inline std::optional<CameraModel> camera_preset(std::string_view name) {
  if (name == "C1") return CameraModel{3859.63, 3853.00, 1988.85, 1469.96, -0.4883, -0.5526, 0.0042, 0.0001, 3.6464};
  if (name == "C2") return CameraModel{3786.44, 3793.20, 1939.22, 1564.98, -0.5402, 0.0792, 0.0031, 0.0031, 0.8875};
  if (name == "C3") return CameraModel{3812.58, 3824.67, 1887.29, 1544.79, -0.5551, 0.2221, 0.0036, 0.0059, 0.2079};
  if (name == "C4") return CameraModel{3811.30, 3829.32, 1945.61, 1647.71, -0.4865, -0.4850, -0.0008, 0.0025, 2.9886};
  return std::nullopt;
}

inline constexpr std::array<std::string_view, 4> kCameraPresetNames{"C1", "C2", "C3", "C4"};

struct NormalizedPoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const NormalizedPoint&, const NormalizedPoint&) = default;
};

/// Forward distortion of a normalized image point.
///
/// Radial factor (1 + k1 r^2 + k2 r^4 + k3 r^6) / (1 + k4 r^2 + k5 r^4 + k6 r^6),
/// then the tangential terms; r^2 = x^2 + y^2 of the undistorted point.
inline NormalizedPoint distort_point(double xn, double yn, const CameraModel& m) noexcept {
  const double x2 = xn * xn;
  const double y2 = yn * yn;
  const double xy = xn * yn;
  const double r2 = x2 + y2;
  const double r4 = r2 * r2;
  const double r6 = r4 * r2;
  const double radial = (1.0 + m.k1 * r2 + m.k2 * r4 + m.k3 * r6) / (1.0 + m.k4 * r2 + m.k5 * r4 + m.k6 * r6);
  return {xn * radial + 2.0 * m.p1 * xy + m.p2 * (r2 + 2.0 * x2),
          yn * radial + m.p1 * (r2 + 2.0 * y2) + 2.0 * m.p2 * xy};
}

/// Bilinear sample; anything outside the pixel-center hull reads as 0.
inline double sample_bilinear(const GrayImage& img, double px, double py) noexcept {
  if (!(px >= 0.0 && py >= 0.0 && px <= img.width() - 1 && py <= img.height() - 1)) return 0.0;
  const int x0 = static_cast<int>(px);
  const int y0 = static_cast<int>(py);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = px - x0;
  const double fy = py - y0;
  const double top = img(x0, y0) + fx * (img(x1, y0) - img(x0, y0));
  const double bottom = img(x0, y1) + fx * (img(x1, y1) - img(x0, y1));
  return top + fy * (bottom - top);
}

/// Inverse-mapped correction: each output pixel samples the input at the
/// distorted location of its own normalized coordinate.
inline GrayImage undistort(const GrayImage& img, const CameraModel& m) {
  m.validate();
  if (m.distortion_free()) return img;
  GrayImage out(img.width(), img.height());
  for (int v = 0; v < img.height(); ++v) {
    const double yn = (v - m.cy) / m.fy;
    for (int u = 0; u < img.width(); ++u) {
      const auto d = distort_point((u - m.cx) / m.fx, yn, m);
      out(u, v) = sample_bilinear(img, d.x * m.fx + m.cx, d.y * m.fy + m.cy);
    }
  }
  return out;
}

struct RegionOfInterest {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  bool fits(const GrayImage& img) const noexcept {
    return x0 >= 0 && y0 >= 0 && width > 0 && height > 0 && x0 + width <= img.width() &&
           y0 + height <= img.height();
  }
  friend bool operator==(const RegionOfInterest&, const RegionOfInterest&) = default;
};

inline GrayImage roi_crop(const GrayImage& img, const RegionOfInterest& roi) {
  if (!roi.fits(img))
    throw std::invalid_argument("roi_crop: rectangle (" + std::to_string(roi.x0) + "," + std::to_string(roi.y0) +
                                ") " + std::to_string(roi.width) + "x" + std::to_string(roi.height) +
                                " is not inside the " + std::to_string(img.width()) + "x" +
                                std::to_string(img.height()) + " image");
  GrayImage out(roi.width, roi.height);
  for (int y = 0; y < roi.height; ++y)
    for (int x = 0; x < roi.width; ++x) out(x, y) = img(roi.x0 + x, roi.y0 + y);
  return out;
}

}  // namespace thinline

#pragma once

// Progressive probabilistic Hough segment extraction, the vertical filter and
// the windowed x-averaging that collapses the surviving segments into a single
// reference line.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "thinline/edge.hpp"

namespace thinline {

struct LineSegment {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  double length() const noexcept { return std::hypot(x2 - x1, y2 - y1); }
  double mid_x() const noexcept { return 0.5 * (x1 + x2); }

  friend bool operator==(const LineSegment&, const LineSegment&) = default;
  friend auto operator<=>(const LineSegment&, const LineSegment&) = default;
};

struct HoughParams {
  int threshold = 100;  // accumulator votes
  int min_length = 50;  // pixels, along the dominant axis
  int max_gap = 10;     // pixels
  friend bool operator==(const HoughParams&, const HoughParams&) = default;
};

namespace detail {

// Seed of the fixed visiting order; any constant works, it only has to be fixed.
inline constexpr std::uint32_t kHoughVisitSeed = 0x7e57'11e5u;

}  // namespace detail

/// Progressive probabilistic Hough transform with 1 px / 1 degree resolution.
///
/// Edge pixels are visited in a pseudo-random but fixed order. Each visited
/// pixel votes; once a bin reaches `threshold` the line through it is walked
/// in both directions over still-unclaimed edge pixels, bridging gaps of up to
/// `max_gap`. Walked pixels are claimed, and if the run is long enough it is
/// emitted and its voters are withdrawn from the accumulator.
inline std::vector<LineSegment> hough_segments(const EdgeMap& edges, HoughParams p) {
  if (p.threshold < 1 || p.min_length < 1 || p.max_gap < 0)
    throw std::invalid_argument("hough_segments: need threshold >= 1, min_length >= 1, max_gap >= 0");
  const int w = edges.width();
  const int h = edges.height();
  constexpr int kAngles = 180;
  const int num_rho = 2 * (w + h) + 1;
  const int rho_offset = (num_rho - 1) / 2;

  std::vector<double> cos_tab(kAngles), sin_tab(kAngles);
  for (int n = 0; n < kAngles; ++n) {
    const double a = n * std::numbers::pi / kAngles;
    cos_tab[static_cast<std::size_t>(n)] = std::cos(a);
    sin_tab[static_cast<std::size_t>(n)] = std::sin(a);
  }
  auto rho_bin = [&](int x, int y, int n) {
    return static_cast<int>(std::lrint(x * cos_tab[static_cast<std::size_t>(n)] + y * sin_tab[static_cast<std::size_t>(n)])) +
           rho_offset;
  };

  std::vector<std::int32_t> accum(static_cast<std::size_t>(kAngles) * static_cast<std::size_t>(num_rho), 0);
  // 0 = no edge / claimed, 1 = unclaimed edge, 2 = unclaimed edge that has voted
  std::vector<std::uint8_t> state(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
  std::vector<std::pair<int, int>> points;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (edges(x, y)) {
        state[static_cast<std::size_t>(y) * w + x] = 1;
        points.emplace_back(x, y);
      }

  auto vote = [&](int x, int y, int delta) {
    for (int n = 0; n < kAngles; ++n) accum[static_cast<std::size_t>(n) * num_rho + rho_bin(x, y, n)] += delta;
  };

  std::mt19937 rng(detail::kHoughVisitSeed);
  std::vector<LineSegment> segments;
  constexpr int kShift = 16;

  for (std::size_t count = points.size(); count > 0; --count) {
    const std::size_t idx = rng() % count;
    const auto [px, py] = points[idx];
    points[idx] = points[count - 1];
    auto& cell = state[static_cast<std::size_t>(py) * w + px];
    if (cell == 0) continue;
    cell = 2;

    int best_votes = p.threshold - 1;
    int best_angle = 0;
    for (int n = 0; n < kAngles; ++n) {
      const int v = ++accum[static_cast<std::size_t>(n) * num_rho + rho_bin(px, py, n)];
      if (v > best_votes) {
        best_votes = v;
        best_angle = n;
      }
    }
    if (best_votes < p.threshold) continue;

    // Walk direction is perpendicular to the normal (cos, sin) of the winning bin.
    const double a = -sin_tab[static_cast<std::size_t>(best_angle)];
    const double b = cos_tab[static_cast<std::size_t>(best_angle)];
    const bool x_major = std::abs(a) > std::abs(b);
    std::int64_t x0 = px, y0 = py, dx0 = 0, dy0 = 0;
    if (x_major) {
      dx0 = a > 0 ? 1 : -1;
      dy0 = std::llround(b * (1 << kShift) / std::abs(a));
      y0 = (y0 << kShift) + (1 << (kShift - 1));
    } else {
      dy0 = b > 0 ? 1 : -1;
      dx0 = std::llround(a * (1 << kShift) / std::abs(b));
      x0 = (x0 << kShift) + (1 << (kShift - 1));
    }
    auto to_pixel = [&](std::int64_t x, std::int64_t y) {
      return x_major ? std::pair<int, int>{static_cast<int>(x), static_cast<int>(y >> kShift)}
                     : std::pair<int, int>{static_cast<int>(x >> kShift), static_cast<int>(y)};
    };

    std::pair<int, int> ends[2] = {{px, py}, {px, py}};
    for (int k = 0; k < 2; ++k) {
      int gap = 0;
      const std::int64_t dx = k == 0 ? dx0 : -dx0;
      const std::int64_t dy = k == 0 ? dy0 : -dy0;
      for (std::int64_t x = x0, y = y0;; x += dx, y += dy) {
        const auto [jx, iy] = to_pixel(x, y);
        if (jx < 0 || jx >= w || iy < 0 || iy >= h) break;
        if (state[static_cast<std::size_t>(iy) * w + jx] != 0) {
          gap = 0;
          ends[k] = {jx, iy};
        } else if (++gap > p.max_gap) {
          break;
        }
      }
    }

    const bool good = std::abs(ends[1].first - ends[0].first) >= p.min_length ||
                      std::abs(ends[1].second - ends[0].second) >= p.min_length;

    for (int k = 0; k < 2; ++k) {
      const std::int64_t dx = k == 0 ? dx0 : -dx0;
      const std::int64_t dy = k == 0 ? dy0 : -dy0;
      for (std::int64_t x = x0, y = y0;; x += dx, y += dy) {
        const auto [jx, iy] = to_pixel(x, y);
        auto& s = state[static_cast<std::size_t>(iy) * w + jx];
        if (s != 0) {
          if (good && s == 2) vote(jx, iy, -1);
          s = 0;
        }
        if (jx == ends[k].first && iy == ends[k].second) break;
      }
    }

    if (good) segments.push_back({ends[0].first, ends[0].second, ends[1].first, ends[1].second});
  }
  return segments;
}

/// Keeps segments whose endpoints differ by at most `tolerance` columns.
inline std::vector<LineSegment> filter_vertical(const std::vector<LineSegment>& segments, int tolerance = 2) {
  if (tolerance < 0) throw std::invalid_argument("filter_vertical: tolerance must be >= 0");
  std::vector<LineSegment> out;
  for (const auto& s : segments)
    if (std::abs(s.x1 - s.x2) <= tolerance) out.push_back(s);
  return out;
}

struct ReferenceLine {
  double x_bar = 0.0;
  int support = 0;
  double x_low = 0.0;
  double x_high = 0.0;

  friend bool operator==(const ReferenceLine&, const ReferenceLine&) = default;
};

/// Densest-window average of x positions.
///
/// Among all windows [x_i, x_i + window] anchored at a sample, the one holding
/// the most samples wins; ties go to the smaller sum of squared deviations,
/// then to the smaller anchor. The result is the mean of the winning samples.
/// The mean is held on a 2^-24 px grid relative to the window anchor, so
/// translating every input by a whole pixel shifts x_bar by exactly that amount.
inline std::optional<ReferenceLine> densest_window_mean(std::vector<double> xs, double window = 20.0) {
  if (xs.empty()) return std::nullopt;
  if (!(window >= 0.0)) throw std::invalid_argument("hough_average: window must be >= 0");
  std::sort(xs.begin(), xs.end());

  std::size_t best_begin = 0, best_end = 1;
  double best_spread = 0.0;
  std::size_t end = 0;
  for (std::size_t begin = 0; begin < xs.size(); ++begin) {
    end = std::max(end, begin + 1);
    while (end < xs.size() && xs[end] - xs[begin] <= window) ++end;
    const std::size_t count = end - begin;
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += xs[i] - xs[begin];
    const double mean = sum / static_cast<double>(count);
    double spread = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double d = xs[i] - xs[begin] - mean;
      spread += d * d;
    }
    const std::size_t best_count = best_end - best_begin;
    if (begin == 0 || count > best_count || (count == best_count && spread < best_spread)) {
      best_begin = begin;
      best_end = end;
      best_spread = spread;
    }
  }

  const double anchor = xs[best_begin];
  double offset_sum = 0.0;
  for (std::size_t i = best_begin; i < best_end; ++i) offset_sum += xs[i] - anchor;
  const auto support = static_cast<int>(best_end - best_begin);
  constexpr double kGrid = 16777216.0;  // 2^24
  const double offset = std::round(offset_sum / support * kGrid) / kGrid;
  const double x_bar = std::clamp(anchor + offset, anchor, xs[best_end - 1]);
  return ReferenceLine{x_bar, support, anchor, anchor + window};
}

/// One x per segment (the midpoint column), then the densest-window mean.
inline std::optional<ReferenceLine> hough_average(const std::vector<LineSegment>& segments, double window = 20.0) {
  std::vector<double> xs;
  xs.reserve(segments.size());
  for (const auto& s : segments) xs.push_back(s.mid_x());
  return densest_window_mean(std::move(xs), window);
}

}  // namespace thinline

#pragma once

// In-place complex FFT of any length: iterative radix-2 for powers of two,
// Bluestein's chirp-z convolution otherwise.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace thinline::fft {

using complex = std::complex<double>;

inline bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

class Radix2 {
 public:
  explicit Radix2(std::size_t n) : n_(n), twiddles_(n / 2), reversed_(n) {
    if (!is_power_of_two(n)) throw std::invalid_argument("Radix2: length must be a power of two");
    for (std::size_t k = 0; k < n / 2; ++k)
      twiddles_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      reversed_[i] = r;
    }
  }

  std::size_t size() const noexcept { return n_; }

  /// Unnormalized forward transform, X_k = sum x_n e^{-2 pi i k n / N}.
  void forward(std::span<complex> data) const {
    for (std::size_t i = 0; i < n_; ++i)
      if (i < reversed_[i]) std::swap(data[i], data[reversed_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const complex t = twiddles_[k * stride] * data[start + k + half];
          data[start + k + half] = data[start + k] - t;
          data[start + k] += t;
        }
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<complex> twiddles_;
  std::vector<std::size_t> reversed_;
};

/// Reusable plan for one transform length.
class Plan {
 public:
  explicit Plan(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("fft::Plan: length must be positive");
    if (is_power_of_two(n)) {
      radix2_.emplace_back(n);
      return;
    }
    const std::size_t m = next_power_of_two(2 * n - 1);
    radix2_.emplace_back(m);
    chirp_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      // k^2 mod 2n keeps the phase argument small and exact
      const auto k2 = static_cast<double>((static_cast<unsigned long long>(k) * k) % (2 * n));
      chirp_[k] = std::polar(1.0, -std::numbers::pi * k2 / static_cast<double>(n));
    }
    filter_.assign(m, complex{});
    filter_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n; ++k) filter_[k] = filter_[m - k] = std::conj(chirp_[k]);
    radix2_.front().forward(filter_);
  }

  std::size_t size() const noexcept { return n_; }

  void forward(std::span<complex> data) const {
    if (chirp_.empty()) {
      radix2_.front().forward(data);
      return;
    }
    const std::size_t m = filter_.size();
    std::vector<complex> work(m);
    for (std::size_t k = 0; k < n_; ++k) work[k] = data[k] * chirp_[k];
    radix2_.front().forward(work);
    for (std::size_t k = 0; k < m; ++k) work[k] = std::conj(work[k] * filter_[k]);
    radix2_.front().forward(work);  // conj(FFT(conj(.))) == m * IFFT(.)
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n_; ++k) data[k] = std::conj(work[k]) * scale * chirp_[k];
  }

  /// Unnormalized inverse, x_n = sum X_k e^{+2 pi i k n / N}.
  void inverse(std::span<complex> data) const {
    for (auto& v : data) v = std::conj(v);
    forward(data);
    for (auto& v : data) v = std::conj(v);
  }

 private:
  std::size_t n_;
  std::vector<Radix2> radix2_;
  std::vector<complex> chirp_;
  std::vector<complex> filter_;
};

}  // namespace thinline::fft

#pragma once

// 8-bit PNG (gray / RGB) and binary PGM (P5, maxval 255) reading and writing.

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "thinline/image.hpp"

namespace thinline {

class ImageIoError : public std::runtime_error {
 public:
  enum class Kind { unreadable, unsupported_format, corrupt_header, write_failed };

  ImageIoError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

inline std::uint8_t quantize(double v) noexcept {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError(ImageIoError::Kind::unreadable, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw ImageIoError(ImageIoError::Kind::unreadable, "read error on " + path.string());
  return bytes;
}

inline constexpr std::array<std::uint8_t, 8> kPngSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

inline bool is_png(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 8 && std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin());
}

// Skips whitespace and '#' comments in a PNM header, then parses one decimal integer.
inline bool pnm_read_int(const std::vector<std::uint8_t>& b, std::size_t& pos, int& value) {
  for (;;) {
    while (pos < b.size() && std::isspace(b[pos])) ++pos;
    if (pos < b.size() && b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= b.size() || !std::isdigit(b[pos])) return false;
  long v = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    v = v * 10 + (b[pos] - '0');
    if (v > 1'000'000'000) return false;
    ++pos;
  }
  value = static_cast<int>(v);
  return true;
}

inline GrayImage decode_pgm(const std::vector<std::uint8_t>& b, const std::string& name) {
  using K = ImageIoError::Kind;
  std::size_t pos = 2;
  int w = 0, h = 0, maxval = 0;
  if (!pnm_read_int(b, pos, w) || !pnm_read_int(b, pos, h) || !pnm_read_int(b, pos, maxval))
    throw ImageIoError(K::corrupt_header, name + ": malformed PGM header");
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw ImageIoError(K::corrupt_header, name + ": invalid PGM dimensions or maxval");
  if (maxval != 255)
    throw ImageIoError(K::unsupported_format, name + ": PGM maxval " + std::to_string(maxval) + " (only 255)");
  if (pos >= b.size() || !std::isspace(b[pos])) throw ImageIoError(K::corrupt_header, name + ": malformed PGM header");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (b.size() - pos < n) throw ImageIoError(K::corrupt_header, name + ": truncated PGM raster");
  GrayImage img(w, h);
  auto px = img.pixels();
  for (std::size_t i = 0; i < n; ++i) px[i] = b[pos + i] / 255.0;
  return img;
}

inline GrayImage decode_png(const std::vector<std::uint8_t>& b, const std::string& name) {
  using K = ImageIoError::Kind;
  // IHDR is always the first chunk: length(4) type(4) width(4) height(4) depth(1) color(1)
  if (b.size() < 33 || std::memcmp(b.data() + 12, "IHDR", 4) != 0)
    throw ImageIoError(K::corrupt_header, name + ": missing PNG IHDR");
  const int bit_depth = b[24];
  const int color_type = b[25];
  if (bit_depth != 8)
    throw ImageIoError(K::unsupported_format, name + ": PNG bit depth " + std::to_string(bit_depth) + " (only 8)");
  if (color_type == PNG_COLOR_TYPE_PALETTE)
    throw ImageIoError(K::unsupported_format, name + ": palette PNG not supported");

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, b.data(), b.size()))
    throw ImageIoError(K::corrupt_header, name + ": " + image.message);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> raster(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raster.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ImageIoError(K::corrupt_header, name + ": " + msg);
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  if (!color) {
    GrayImage img(w, h);
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = raster[i] / 255.0;
    return img;
  }
  RgbImage rgb(w, h);
  for (std::size_t i = 0; i < rgb.data.size(); ++i) rgb.data[i] = raster[i] / 255.0;
  return to_gray(rgb);
}

inline void write_bytes(const std::filesystem::path& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ImageIoError(ImageIoError::Kind::write_failed, "cannot open " + path.string() + " for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw ImageIoError(ImageIoError::Kind::write_failed, "write failed on " + path.string());
}

inline void encode_png(const std::filesystem::path& path, int w, int h, bool color,
                       const std::vector<std::uint8_t>& raster) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, raster.data(), 0, nullptr))
    throw ImageIoError(ImageIoError::Kind::write_failed, "PNG encode failed: " + std::string(image.message));
  std::vector<std::uint8_t> buffer(size);
  if (!png_image_write_to_memory(&image, buffer.data(), &size, 0, raster.data(), 0, nullptr))
    throw ImageIoError(ImageIoError::Kind::write_failed, "PNG encode failed: " + std::string(image.message));
  write_bytes(path, buffer.data(), size);
}

inline std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace detail

/// Loads a PNG or P5 PGM; byte b maps to b / 255. Color PNGs are converted
/// to gray with the default luma weights.
inline GrayImage load_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  if (detail::is_png(bytes)) return detail::decode_png(bytes, path.string());
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return detail::decode_pgm(bytes, path.string());
  if (bytes.size() >= 2 && bytes[0] == 'P')
    throw ImageIoError(ImageIoError::Kind::unsupported_format, path.string() + ": only binary PGM (P5) is supported");
  throw ImageIoError(ImageIoError::Kind::unsupported_format, path.string() + ": not a PNG or PGM file");
}

/// Writes by extension: ".pgm" -> P5, anything else -> 8-bit gray PNG.
inline void save_image(const GrayImage& img, const std::filesystem::path& path) {
  std::vector<std::uint8_t> raster(img.size());
  const auto px = img.pixels();
  for (std::size_t i = 0; i < raster.size(); ++i) raster[i] = detail::quantize(px[i]);
  if (detail::lower_extension(path) == ".pgm") {
    std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    header.append(raster.begin(), raster.end());
    detail::write_bytes(path, header.data(), header.size());
    return;
  }
  detail::encode_png(path, img.width(), img.height(), false, raster);
}

inline void save_rgb_png(const RgbImage& img, const std::filesystem::path& path) {
  std::vector<std::uint8_t> raster(img.data.size());
  for (std::size_t i = 0; i < raster.size(); ++i) raster[i] = detail::quantize(img.data[i]);
  detail::encode_png(path, img.width, img.height, true, raster);
}

}  // namespace thinline

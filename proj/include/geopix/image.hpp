#pragma once

#include <png.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"

namespace geopix {

// Square, row-major, 8-bit grayscale raster.
class GrayImage {
 public:
  GrayImage() = default;
  explicit GrayImage(int size, std::uint8_t value = 0)
      : size_(size), data_(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), value) {
    if (size <= 0) throw InvalidInput("image size must be positive");
  }

  int width() const { return size_; }
  int height() const { return size_; }
  int size() const { return size_; }

  bool contains(int col, int row) const { return col >= 0 && row >= 0 && col < size_ && row < size_; }

  std::uint8_t& at(int col, int row) { return data_[index(col, row)]; }
  std::uint8_t at(int col, int row) const { return data_[index(col, row)]; }

  // Writes are clipped to the image.
  void set(int col, int row, std::uint8_t v) {
    if (contains(col, row)) at(col, row) = v;
  }

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(size_) + static_cast<std::size_t>(col);
  }

  int size_ = 0;
  std::vector<std::uint8_t> data_;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(Rgb, Rgb) = default;
};

class RgbImage {
 public:
  RgbImage(int width, int height, Rgb fill = {})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  Rgb& at(int col, int row) { return data_[static_cast<std::size_t>(row) * width_ + col]; }
  Rgb at(int col, int row) const { return data_[static_cast<std::size_t>(row) * width_ + col]; }
  const std::vector<Rgb>& data() const { return data_; }

 private:
  int width_, height_;
  std::vector<Rgb> data_;
};

// Affine world -> continuous pixel map: u = a x + b y + c, v = d x + e y + f.
// Pixel (col, row) covers [col, col+1) x [row, row+1); rows grow downward.
struct WorldToPixel {
  std::array<double, 6> m{1, 0, 0, 0, 1, 0};

  Point apply(Point w) const { return {m[0] * w.x + m[1] * w.y + m[2], m[3] * w.x + m[4] * w.y + m[5]}; }

  Point inverse(Point p) const {
    const double det = m[0] * m[4] - m[1] * m[3];
    const double u = p.x - m[2], v = p.y - m[5];
    return {(m[4] * u - m[1] * v) / det, (-m[3] * u + m[0] * v) / det};
  }

  // Uniform scale factor (pixels per world unit).
  double scale() const { return std::sqrt(std::abs(m[0] * m[4] - m[1] * m[3])); }

  // [-1, 1]^2 onto the full image.
  static WorldToPixel centered(int size) {
    const double h = 0.5 * size;
    return {{h, 0, h, 0, -h, h}};
  }

  // [0, 1]^2 onto the image with `pad` pixels of margin on every side.
  static WorldToPixel unit_square(int size, double pad) {
    const double s = size - 2.0 * pad;
    return {{s, 0, pad, 0, -s, pad + s}};
  }

  friend bool operator==(const WorldToPixel&, const WorldToPixel&) = default;
};

struct PixelIndex {
  int col = 0;
  int row = 0;
  friend bool operator==(PixelIndex, PixelIndex) = default;
};

inline PixelIndex to_pixel(Point continuous) {
  return {static_cast<int>(std::floor(continuous.x)), static_cast<int>(std::floor(continuous.y))};
}

inline Point pixel_center(int col, int row) { return {col + 0.5, row + 0.5}; }

namespace detail {

struct PngImageGuard {
  png_image* img;
  ~PngImageGuard() { png_image_free(img); }
};

}  // namespace detail

inline std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.data().data(), 0, nullptr)) {
    throw Error(std::string("png encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.data().data(), 0, nullptr)) {
    throw Error(std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

inline void write_png(const std::filesystem::path& path, const GrayImage& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.data().data(), 0, nullptr)) {
    throw Error("cannot write " + path.string() + ": " + image.message);
  }
}

inline void write_png(const std::filesystem::path& path, const RgbImage& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  static_assert(sizeof(Rgb) == 3);
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.data().data(), 0, nullptr)) {
    throw Error("cannot write " + path.string() + ": " + image.message);
  }
}

// Any PNG is converted to 8-bit gray; non-square images are rejected.
inline GrayImage read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error("cannot read " + path.string() + ": " + image.message);
  }
  detail::PngImageGuard guard{&image};
  if (image.width != image.height) throw InvalidInput("image is not square: " + path.string());
  image.format = PNG_FORMAT_GRAY;
  GrayImage out(static_cast<int>(image.width));
  if (!png_image_finish_read(&image, nullptr, out.data().data(), 0, nullptr)) {
    throw Error("cannot decode " + path.string() + ": " + image.message);
  }
  return out;
}

}  // namespace geopix

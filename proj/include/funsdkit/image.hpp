// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

// Dense 2-D grids, channels-last tensors and PNG I/O (libpng simplified API).

#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <png.h>

#include "funsdkit/annotation.hpp"
#include "funsdkit/error.hpp"

namespace funsdkit {

// Row-major width x height grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width),
        height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
              fill) {
    if (width < 0 || height < 0) throw DimensionError("negative grid size");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool same_shape(const Grid& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_;
  }
  bool in_bounds(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& at(int x, int y) noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  const T& at(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Channels-last tensor, `at(x, y, c)`.
template <typename T>
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int width, int height, int channels, T fill = T{})
      : width_(width),
        height_(height),
        channels_(channels),
        data_(static_cast<std::size_t>(width) * height * channels, fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool same_shape(const Tensor3& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_ &&
           channels_ == o.channels_;
  }

  T& at(int x, int y, int c) noexcept { return data_[index(x, y, c)]; }
  const T& at(int x, int y, int c) const noexcept {
    return data_[index(x, y, c)];
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

using GrayImage = Grid<std::uint8_t>;
using RgbImage = Grid<Rgb>;

// ITU-R BT.601 luma, unrounded.
inline double luma(const Rgb& p) noexcept {
  return 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
}

// A decoded page: 8-bit grayscale or 8-bit RGB.
struct PageImage {
  bool color = false;
  GrayImage gray;
  RgbImage rgb;

  int width() const noexcept { return color ? rgb.width() : gray.width(); }
  int height() const noexcept { return color ? rgb.height() : gray.height(); }
  PageSize size() const noexcept { return {width(), height()}; }

  double intensity(int x, int y) const noexcept {
    return color ? luma(rgb.at(x, y)) : static_cast<double>(gray.at(x, y));
  }

  RgbImage to_rgb() const {
    if (color) return rgb;
    RgbImage out(gray.width(), gray.height());
    for (std::size_t i = 0; i < gray.size(); ++i) {
      const auto v = gray.data()[i];
      out.data()[i] = {v, v, v};
    }
    return out;
  }

  static PageImage from_gray(GrayImage g) {
    PageImage p;
    p.gray = std::move(g);
    return p;
  }
  static PageImage from_rgb(RgbImage c) {
    PageImage p;
    p.color = true;
    p.rgb = std::move(c);
    return p;
  }
};

namespace detail {

struct PngImageGuard {
  png_image image{};
  PngImageGuard() {
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImageGuard() { png_image_free(&image); }
  PngImageGuard(const PngImageGuard&) = delete;
  PngImageGuard& operator=(const PngImageGuard&) = delete;
};

inline void begin_read(PngImageGuard& g, const std::filesystem::path& path) {
  if (!png_image_begin_read_from_file(&g.image, path.string().c_str())) {
    throw IoError(std::string("cannot read PNG (") + g.image.message + ")",
                  path.string());
  }
}

}  // namespace detail

inline PageSize read_png_size(const std::filesystem::path& path) {
  detail::PngImageGuard g;
  detail::begin_read(g, path);
  return {static_cast<int>(g.image.width), static_cast<int>(g.image.height)};
}

// Decodes to 8-bit gray when the file has no color, else 8-bit RGB. Alpha is
// composited onto white.
inline PageImage read_png(const std::filesystem::path& path) {
  detail::PngImageGuard g;
  detail::begin_read(g, path);
  const bool color = (g.image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  g.image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int w = static_cast<int>(g.image.width);
  const int h = static_cast<int>(g.image.height);
  png_color white{255, 255, 255};
  if (color) {
    RgbImage img(w, h);
    static_assert(sizeof(Rgb) == 3);
    if (!png_image_finish_read(&g.image, &white, img.data().data(), 0,
                               nullptr)) {
      throw IoError(std::string("cannot decode PNG (") + g.image.message + ")",
                    path.string());
    }
    return PageImage::from_rgb(std::move(img));
  }
  GrayImage img(w, h);
  if (!png_image_finish_read(&g.image, &white, img.data().data(), 0, nullptr)) {
    throw IoError(std::string("cannot decode PNG (") + g.image.message + ")",
                  path.string());
  }
  return PageImage::from_gray(std::move(img));
}

inline void write_png(const std::filesystem::path& path, const GrayImage& img) {
  detail::PngImageGuard g;
  g.image.width = static_cast<png_uint_32>(img.width());
  g.image.height = static_cast<png_uint_32>(img.height());
  g.image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&g.image, path.string().c_str(), 0,
                               img.data().data(), 0, nullptr)) {
    throw IoError(std::string("cannot write PNG (") + g.image.message + ")",
                  path.string());
  }
}

inline void write_png(const std::filesystem::path& path, const RgbImage& img) {
  detail::PngImageGuard g;
  g.image.width = static_cast<png_uint_32>(img.width());
  g.image.height = static_cast<png_uint_32>(img.height());
  g.image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&g.image, path.string().c_str(), 0,
                               img.data().data(), 0, nullptr)) {
    throw IoError(std::string("cannot write PNG (") + g.image.message + ")",
                  path.string());
  }
}

}  // namespace funsdkit

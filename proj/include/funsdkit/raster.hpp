// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

// Segmentation inputs and targets from revised forms.
//
// Boxes are half-open: columns [left, right), rows [top, bottom). Where
// entity boxes overlap, key beats value beats other.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "funsdkit/annotation.hpp"
#include "funsdkit/error.hpp"
#include "funsdkit/image.hpp"

namespace funsdkit {

enum class SegClass : std::uint8_t { key = 0, value = 1, other = 2, background = 3 };

inline constexpr int kNumClasses = 4;

inline constexpr std::string_view to_string(SegClass c) noexcept {
  switch (c) {
    case SegClass::key: return "key";
    case SegClass::value: return "value";
    case SegClass::other: return "other";
    case SegClass::background: return "background";
  }
  return "background";
}

inline constexpr std::size_t index_of(SegClass c) noexcept {
  return static_cast<std::size_t>(c);
}

using ClassMask = Grid<SegClass>;
using BinaryMask = Grid<std::uint8_t>;  // values in {0, 1}

// Residual headers rasterize as other.
inline constexpr SegClass seg_class_for(EntityLabel label) noexcept {
  switch (label) {
    case EntityLabel::question: return SegClass::key;
    case EntityLabel::answer: return SegClass::value;
    default: return SegClass::other;
  }
}

// Lower value wins an overlap.
inline constexpr int priority(SegClass c) noexcept { return static_cast<int>(c); }

struct RasterStats {
  std::size_t clamped = 0;  // boxes that reached past the page edge
};

namespace detail {

inline BBox clamp_box(const BBox& b, int width, int height, RasterStats* stats) {
  BBox c{std::clamp(b.left, 0, width), std::clamp(b.top, 0, height),
         std::clamp(b.right, 0, width), std::clamp(b.bottom, 0, height)};
  if (stats && !(c == b)) ++stats->clamped;
  return c;
}

}  // namespace detail

inline ClassMask rasterize_target(const Form& form, RasterStats* stats = nullptr) {
  ClassMask mask(form.width, form.height, SegClass::background);
  for (const auto& e : form.entities) {
    const SegClass cls = seg_class_for(e.label);
    const BBox b = detail::clamp_box(e.box, form.width, form.height, stats);
    for (int y = b.top; y < b.bottom; ++y) {
      for (int x = b.left; x < b.right; ++x) {
        SegClass& px = mask.at(x, y);
        if (priority(cls) < priority(px)) px = cls;
      }
    }
  }
  return mask;
}

// Union of word boxes; entity boxes are not used.
inline BinaryMask rasterize_text_mask(const Form& form,
                                      RasterStats* stats = nullptr) {
  BinaryMask mask(form.width, form.height, 0);
  for (const auto& e : form.entities) {
    for (const auto& w : e.words) {
      const BBox b = detail::clamp_box(w.box, form.width, form.height, stats);
      for (int y = b.top; y < b.bottom; ++y) {
        std::fill_n(&mask.at(b.left, y), b.width(), std::uint8_t{1});
      }
    }
  }
  return mask;
}

inline std::array<std::size_t, kNumClasses> class_counts(const ClassMask& m) {
  std::array<std::size_t, kNumClasses> counts{};
  for (auto c : m.data()) ++counts[index_of(c)];
  return counts;
}

inline constexpr int round_up16(int n) noexcept { return (n + 15) / 16 * 16; }

// Channel 0: text mask {0,1}. Channel 1: page luma / 255 in [0,1].
// Padding (bottom/right) is zero in both channels.
struct InputTensor {
  Tensor3<float> data;
  int width = 0;   // unpadded
  int height = 0;  // unpadded
  int pad_right = 0;
  int pad_bottom = 0;
};

inline InputTensor build_input(const Form& form, const PageImage& page,
                               bool pad16 = true) {
  if (page.width() != form.width || page.height() != form.height) {
    throw DimensionError("page image is " + std::to_string(page.width()) + "x" +
                         std::to_string(page.height()) + " but form " +
                         form.source_id + " is " + std::to_string(form.width) +
                         "x" + std::to_string(form.height));
  }
  InputTensor in;
  in.width = form.width;
  in.height = form.height;
  if (pad16) {
    in.pad_right = round_up16(form.width) - form.width;
    in.pad_bottom = round_up16(form.height) - form.height;
  }
  in.data = Tensor3<float>(form.width + in.pad_right,
                           form.height + in.pad_bottom, 2, 0.0f);
  const BinaryMask text = rasterize_text_mask(form);
  for (int y = 0; y < form.height; ++y) {
    for (int x = 0; x < form.width; ++x) {
      in.data.at(x, y, 0) = static_cast<float>(text.at(x, y));
      in.data.at(x, y, 1) = static_cast<float>(page.intensity(x, y) / 255.0);
    }
  }
  return in;
}

// Extends a target with background on the bottom/right.
inline ClassMask pad_mask(const ClassMask& m, int pad_right, int pad_bottom) {
  ClassMask out(m.width() + pad_right, m.height() + pad_bottom,
                SegClass::background);
  for (int y = 0; y < m.height(); ++y) {
    std::copy_n(&m.at(0, y), m.width(), &out.at(0, y));
  }
  return out;
}

template <typename T>
Grid<T> pad_grid(const Grid<T>& m, int pad_right, int pad_bottom, T fill) {
  Grid<T> out(m.width() + pad_right, m.height() + pad_bottom, fill);
  for (int y = 0; y < m.height(); ++y) {
    std::copy_n(&m.at(0, y), m.width(), &out.at(0, y));
  }
  return out;
}

// ---- file formats ---------------------------------------------------------

inline GrayImage encode_class_mask(const ClassMask& m) {
  GrayImage img(m.width(), m.height());
  std::transform(m.data().begin(), m.data().end(), img.data().begin(),
                 [](SegClass c) { return static_cast<std::uint8_t>(c); });
  return img;
}

inline ClassMask decode_class_mask(const GrayImage& img) {
  ClassMask m(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const auto v = img.data()[i];
    if (v >= kNumClasses) {
      throw DimensionError("class mask value " + std::to_string(v) +
                           " outside 0..3");
    }
    m.data()[i] = static_cast<SegClass>(v);
  }
  return m;
}

inline void write_class_mask(const std::filesystem::path& path,
                             const ClassMask& m) {
  write_png(path, encode_class_mask(m));
}

inline ClassMask read_class_mask(const std::filesystem::path& path) {
  PageImage img = read_png(path);
  if (img.color) throw IoError("class mask must be single-channel", path.string());
  return decode_class_mask(img.gray);
}

inline void write_binary_mask(const std::filesystem::path& path,
                              const BinaryMask& m) {
  GrayImage img(m.width(), m.height());
  std::transform(m.data().begin(), m.data().end(), img.data().begin(),
                 [](std::uint8_t v) -> std::uint8_t { return v ? 255 : 0; });
  write_png(path, img);
}

inline BinaryMask read_binary_mask(const std::filesystem::path& path) {
  PageImage img = read_png(path);
  if (img.color) throw IoError("text mask must be single-channel", path.string());
  BinaryMask m(img.width(), img.height());
  std::transform(img.gray.data().begin(), img.gray.data().end(),
                 m.data().begin(),
                 [](std::uint8_t v) -> std::uint8_t { return v >= 128 ? 1 : 0; });
  return m;
}

// One row of manifest.tsv; paths are relative to the export directory.
struct ManifestEntry {
  std::string source_id;
  int width = 0;
  int height = 0;
  int pad_right = 0;
  int pad_bottom = 0;
  std::string text_path;
  std::string gray_path;
  std::string target_path;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

inline constexpr std::string_view kManifestHeader =
    "source_id\twidth\theight\tpad_right\tpad_bottom\ttext\tgray\ttarget";

// Writes <id>_text.png, <id>_gray.png and <id>_target.png into `out_dir`.
inline ManifestEntry export_pair(const Form& form, const PageImage& page,
                                 const std::filesystem::path& out_dir,
                                 bool pad16 = true) {
  const InputTensor in = build_input(form, page, pad16);
  ManifestEntry entry{form.source_id,
                      form.width,
                      form.height,
                      in.pad_right,
                      in.pad_bottom,
                      form.source_id + "_text.png",
                      form.source_id + "_gray.png",
                      form.source_id + "_target.png"};

  const int pw = in.data.width();
  const int ph = in.data.height();
  BinaryMask text(pw, ph, 0);
  GrayImage gray(pw, ph, 0);
  for (int y = 0; y < ph; ++y) {
    for (int x = 0; x < pw; ++x) {
      text.at(x, y) = in.data.at(x, y, 0) > 0.5f ? 1 : 0;
      if (x < form.width && y < form.height) {
        gray.at(x, y) =
            static_cast<std::uint8_t>(std::lround(page.intensity(x, y)));
      }
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory", out_dir.string());
  write_binary_mask(out_dir / entry.text_path, text);
  write_png(out_dir / entry.gray_path, gray);
  write_class_mask(out_dir / entry.target_path,
                   pad_mask(rasterize_target(form), in.pad_right, in.pad_bottom));
  return entry;
}

inline void write_manifest(const std::filesystem::path& path,
                           const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write manifest", path.string());
  os << kManifestHeader << '\n';
  for (const auto& e : entries) {
    os << e.source_id << '\t' << e.width << '\t' << e.height << '\t'
       << e.pad_right << '\t' << e.pad_bottom << '\t' << e.text_path << '\t'
       << e.gray_path << '\t' << e.target_path << '\n';
  }
  if (!os) throw IoError("write failed", path.string());
}

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read manifest", path.string());
  std::string line;
  std::getline(is, line);
  if (line != kManifestHeader) throw IoError("unexpected manifest header", path.string());
  std::vector<ManifestEntry> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    ManifestEntry e;
    std::string w, h, pr, pb;
    std::getline(row, e.source_id, '\t');
    std::getline(row, w, '\t');
    std::getline(row, h, '\t');
    std::getline(row, pr, '\t');
    std::getline(row, pb, '\t');
    std::getline(row, e.text_path, '\t');
    std::getline(row, e.gray_path, '\t');
    std::getline(row, e.target_path, '\t');
    try {
      e.width = std::stoi(w);
      e.height = std::stoi(h);
      e.pad_right = std::stoi(pr);
      e.pad_bottom = std::stoi(pb);
    } catch (const std::exception&) {
      throw IoError("malformed manifest row \"" + line + "\"", path.string());
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace funsdkit

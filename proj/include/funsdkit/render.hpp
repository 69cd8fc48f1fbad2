// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

// Review overlays: entity boxes outlined by label color, links drawn as
// centroid-to-centroid lines. Integer pixels only, no anti-aliasing.

#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>

#include "funsdkit/annotation.hpp"
#include "funsdkit/error.hpp"
#include "funsdkit/graph.hpp"
#include "funsdkit/image.hpp"

namespace funsdkit {

struct RenderStyle {
  std::array<Rgb, 4> colors = {{
      {128, 0, 128},    // header
      {0, 0, 255},      // question
      {0, 160, 0},      // answer
      {128, 128, 128},  // other
  }};
  Rgb link_color{255, 0, 0};
  int line_width = 2;
  bool arrows = true;
  int arrow_length = 6;

  const Rgb& color(EntityLabel l) const noexcept {
    return colors[static_cast<std::size_t>(l)];
  }
};

namespace detail {

inline void put(RgbImage& img, int x, int y, const Rgb& c) {
  if (img.in_bounds(x, y)) img.at(x, y) = c;
}

// Outline of a half-open box, `width` pixels thick, starting `inset` pixels
// inside the box edge.
inline void draw_outline(RgbImage& img, const BBox& box, const Rgb& c,
                         int width, int inset) {
  for (int k = inset; k < inset + width; ++k) {
    const int l = box.left + k, t = box.top + k;
    const int r = box.right - 1 - k, b = box.bottom - 1 - k;
    if (l > r || t > b) return;
    for (int x = l; x <= r; ++x) {
      put(img, x, t, c);
      put(img, x, b, c);
    }
    for (int y = t; y <= b; ++y) {
      put(img, l, y, c);
      put(img, r, y, c);
    }
  }
}

inline void draw_line(RgbImage& img, int x0, int y0, int x1, int y1,
                      const Rgb& c) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    put(img, x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

inline std::pair<int, int> box_center(const BBox& b) {
  return {(b.left + std::max(b.left, b.right - 1)) / 2,
          (b.top + std::max(b.top, b.bottom - 1)) / 2};
}

inline void draw_links(RgbImage& img, const Form& form,
                       const RenderStyle& style) {
  const RelationGraph g =
      build_graph(form, {.skip_dangling = true, .skip_self_links = true});
  for (const auto& edge : g.edges()) {
    const auto [x0, y0] = box_center(form.find(edge.from)->box);
    const auto [x1, y1] = box_center(form.find(edge.to)->box);
    draw_line(img, x0, y0, x1, y1, style.link_color);
    if (!style.arrows || (x0 == x1 && y0 == y1)) continue;
    const double angle = std::atan2(y0 - y1, x0 - x1);
    for (double spread : {-0.5, 0.5}) {
      const int ax = x1 + static_cast<int>(std::lround(
                              style.arrow_length * std::cos(angle + spread)));
      const int ay = y1 + static_cast<int>(std::lround(
                              style.arrow_length * std::sin(angle + spread)));
      draw_line(img, x1, y1, ax, ay, style.link_color);
    }
  }
}

inline void check_dims(const Form& form, const PageImage& page) {
  if (page.width() != form.width || page.height() != form.height) {
    throw DimensionError("page image size does not match form " +
                         form.source_id);
  }
}

}  // namespace detail

inline RgbImage render_overlay(const Form& form, const PageImage& page,
                               const RenderStyle& style = {}) {
  detail::check_dims(form, page);
  RgbImage img = page.to_rgb();
  for (const auto& e : form.entities) {
    detail::draw_outline(img, e.box, style.color(e.label), style.line_width, 0);
  }
  detail::draw_links(img, form, style);
  return img;
}

// Like render_overlay(after), but relabeled entities get a double outline:
// the new color on the box edge and the old color just inside it.
inline RgbImage render_diff(const Form& before, const Form& after,
                            const PageImage& page, const RenderStyle& style = {}) {
  detail::check_dims(after, page);
  std::set<int> ids_before, ids_after;
  for (const auto& e : before.entities) ids_before.insert(e.id);
  for (const auto& e : after.entities) ids_after.insert(e.id);
  if (ids_before != ids_after) {
    throw GraphError("entity ids differ between revisions of " +
                         after.source_id,
                     {});
  }
  RgbImage img = page.to_rgb();
  for (const auto& e : after.entities) {
    const Entity* old = before.find(e.id);
    detail::draw_outline(img, e.box, style.color(e.label), style.line_width, 0);
    if (old->label != e.label) {
      detail::draw_outline(img, e.box, style.color(old->label),
                           style.line_width, style.line_width);
    }
  }
  detail::draw_links(img, after, style);
  return img;
}

}  // namespace funsdkit

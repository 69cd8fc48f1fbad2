// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

// Key/value component extraction from a class mask and nearest-neighbour
// pairing: each value component is assigned the key component with the
// closest centroid.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "funsdkit/annotation.hpp"
#include "funsdkit/graph.hpp"
#include "funsdkit/raster.hpp"

namespace funsdkit {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Component {
  SegClass cls = SegClass::key;
  std::size_t pixels = 0;
  BBox box;        // half-open
  Point centroid;  // mean pixel index
};

struct ComponentOptions {
  std::size_t min_area = 4;
};

// 8-connected components of key pixels and of value pixels, ordered by
// (class, top, left). Components smaller than min_area are dropped.
inline std::vector<Component> extract_components(const ClassMask& mask,
                                                 ComponentOptions opts = {}) {
  std::vector<Component> out;
  Grid<std::uint8_t> visited(mask.width(), mask.height(), 0);
  std::vector<std::pair<int, int>> stack;

  for (SegClass cls : {SegClass::key, SegClass::value}) {
    std::vector<Component> found;
    for (int y = 0; y < mask.height(); ++y) {
      for (int x = 0; x < mask.width(); ++x) {
        if (visited.at(x, y) || mask.at(x, y) != cls) continue;
        Component comp;
        comp.cls = cls;
        comp.box = {x, y, x + 1, y + 1};
        double sx = 0.0, sy = 0.0;
        visited.at(x, y) = 1;
        stack.assign(1, {x, y});
        while (!stack.empty()) {
          auto [cx, cy] = stack.back();
          stack.pop_back();
          ++comp.pixels;
          sx += cx;
          sy += cy;
          comp.box.left = std::min(comp.box.left, cx);
          comp.box.top = std::min(comp.box.top, cy);
          comp.box.right = std::max(comp.box.right, cx + 1);
          comp.box.bottom = std::max(comp.box.bottom, cy + 1);
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const int nx = cx + dx, ny = cy + dy;
              if (mask.in_bounds(nx, ny) && !visited.at(nx, ny) &&
                  mask.at(nx, ny) == cls) {
                visited.at(nx, ny) = 1;
                stack.emplace_back(nx, ny);
              }
            }
          }
        }
        comp.centroid = {sx / comp.pixels, sy / comp.pixels};
        if (comp.pixels >= opts.min_area) found.push_back(comp);
      }
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const Component& a, const Component& b) {
                       return std::tie(a.box.top, a.box.left) <
                              std::tie(b.box.top, b.box.left);
                     });
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

struct KVPair {
  std::size_t key_index = 0;    // into the component list
  std::size_t value_index = 0;  // into the component list
  Component key;
  Component value;
  double distance = 0.0;
};

struct PairingResult {
  std::vector<KVPair> pairs;
  std::vector<std::size_t> unmatched_values;  // component indices
};

inline double squared_distance(const Point& a, const Point& b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Many values may share one key. Equal distances go to the key that comes
// first in component order.
inline PairingResult pair_nearest(const std::vector<Component>& components) {
  std::vector<std::size_t> keys;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i].cls == SegClass::key) keys.push_back(i);
  }
  PairingResult result;
  for (std::size_t v = 0; v < components.size(); ++v) {
    if (components[v].cls != SegClass::value) continue;
    if (keys.empty()) {
      result.unmatched_values.push_back(v);
      continue;
    }
    std::size_t best = keys.front();
    double best_d = squared_distance(components[best].centroid,
                                     components[v].centroid);
    for (std::size_t k : keys) {
      const double d =
          squared_distance(components[k].centroid, components[v].centroid);
      if (d < best_d) {
        best = k;
        best_d = d;
      }
    }
    result.pairs.push_back(
        {best, v, components[best], components[v], std::sqrt(best_d)});
  }
  return result;
}

struct PairRecord {
  std::string source_id;
  BBox key_box;
  BBox value_box;
  double distance = 0.0;
  std::optional<bool> hit;  // only with ground truth
};

// With a ground-truth form, a pair is a hit when its key box matches a
// question entity (IoU >= 0.5) and its value box matches an answer entity
// linked from that question (IoU >= 0.5).
inline std::vector<PairRecord> pairs_to_report(const std::string& source_id,
                                               const std::vector<KVPair>& pairs,
                                               const Form* truth = nullptr,
                                               double iou_threshold = 0.5) {
  std::optional<RelationGraph> graph;
  if (truth) {
    graph = build_graph(*truth, {.skip_dangling = true, .skip_self_links = true});
  }
  std::vector<PairRecord> out;
  for (const auto& p : pairs) {
    PairRecord rec{source_id, p.key.box, p.value.box, p.distance, std::nullopt};
    if (truth) {
      bool hit = false;
      for (const auto& q : truth->entities) {
        if (hit) break;
        if (q.label != EntityLabel::question ||
            box_iou(q.box, p.key.box) < iou_threshold) {
          continue;
        }
        for (int a : graph->successors(q.id)) {
          const Entity* ans = truth->find(a);
          if (ans->label == EntityLabel::answer &&
              box_iou(ans->box, p.value.box) >= iou_threshold) {
            hit = true;
            break;
          }
        }
      }
      rec.hit = hit;
    }
    out.push_back(rec);
  }
  return out;
}

inline std::string format_pair_records(const std::vector<PairRecord>& records) {
  std::string out;
  auto box = [](const BBox& b) {
    return nlohmann::json::array({b.left, b.top, b.right, b.bottom});
  };
  for (const auto& r : records) {
    nlohmann::json j{{"source_id", r.source_id},
                     {"key_bbox", box(r.key_box)},
                     {"value_bbox", box(r.value_box)},
                     {"distance", r.distance}};
    if (r.hit) j["hit"] = *r.hit;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace funsdkit

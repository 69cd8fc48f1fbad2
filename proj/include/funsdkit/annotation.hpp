// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

// Typed model of FUNSD form annotations with lossless JSON parse/serialize
// and dataset-level counts.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "funsdkit/error.hpp"

namespace funsdkit {

// Pixel box [left, top, right, bottom]. Rasterization treats it half-open:
// columns [left, right), rows [top, bottom).
struct BBox {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;

  int width() const noexcept { return right - left; }
  int height() const noexcept { return bottom - top; }
  std::int64_t area() const noexcept {
    return static_cast<std::int64_t>(width()) * height();
  }
  bool well_formed() const noexcept {
    return left >= 0 && top >= 0 && left <= right && top <= bottom;
  }
  bool contains(const BBox& o) const noexcept {
    return o.left >= left && o.top >= top && o.right <= right &&
           o.bottom <= bottom;
  }
  BBox dilated(int by) const noexcept {
    return {left - by, top - by, right + by, bottom + by};
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

inline std::int64_t intersection_area(const BBox& a, const BBox& b) noexcept {
  const std::int64_t w = std::min(a.right, b.right) - std::max(a.left, b.left);
  const std::int64_t h = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
  return (w > 0 && h > 0) ? w * h : 0;
}

inline double box_iou(const BBox& a, const BBox& b) noexcept {
  const auto inter = intersection_area(a, b);
  const auto uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

struct Word {
  std::string text;
  BBox box;

  friend bool operator==(const Word&, const Word&) = default;
};

enum class EntityLabel : std::uint8_t { header, question, answer, other };

inline constexpr std::array<EntityLabel, 4> kAllLabels = {
    EntityLabel::header, EntityLabel::question, EntityLabel::answer,
    EntityLabel::other};

inline constexpr std::string_view to_string(EntityLabel label) noexcept {
  switch (label) {
    case EntityLabel::header: return "header";
    case EntityLabel::question: return "question";
    case EntityLabel::answer: return "answer";
    case EntityLabel::other: return "other";
  }
  return "other";
}

// Exact, case-sensitive match against the four schema labels.
inline std::optional<EntityLabel> label_from_string(std::string_view s) {
  for (auto label : kAllLabels) {
    if (to_string(label) == s) return label;
  }
  return std::nullopt;
}

// A stored link record. In FUNSD both endpoints usually carry the same
// [from, to] pair, so `from` is not necessarily the owning entity.
struct Link {
  int from = 0;
  int to = 0;

  friend auto operator<=>(const Link&, const Link&) = default;
};

struct Entity {
  int id = 0;
  EntityLabel label = EntityLabel::other;
  BBox box;
  std::string text;  // entity-level transcription, kept verbatim
  std::vector<Word> words;
  std::vector<Link> links;

  friend bool operator==(const Entity&, const Entity&) = default;
};

enum class Split : std::uint8_t { train, test };

inline constexpr std::string_view split_dir_name(Split s) noexcept {
  return s == Split::train ? "training_data" : "testing_data";
}

struct PageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const PageSize&, const PageSize&) = default;
};

struct Form {
  std::string source_id;
  int width = 0;
  int height = 0;
  std::vector<Entity> entities;
  Split split = Split::train;

  PageSize page() const noexcept { return {width, height}; }

  const Entity* find(int id) const noexcept {
    for (const auto& e : entities) {
      if (e.id == id) return &e;
    }
    return nullptr;
  }
  Entity* find(int id) noexcept {
    for (auto& e : entities) {
      if (e.id == id) return &e;
    }
    return nullptr;
  }

  friend bool operator==(const Form&, const Form&) = default;
};

namespace detail {

inline int read_int(const nlohmann::json& v, const char* what,
                    std::optional<int> entity) {
  if (v.is_number_integer()) {
    const auto x = v.get<std::int64_t>();
    if (x >= INT32_MIN && x <= INT32_MAX) return static_cast<int>(x);
  } else if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 2e9) {
      return static_cast<int>(d);
    }
  }
  throw SchemaError(std::string("expected integer for ") + what, entity);
}

inline BBox read_box(const nlohmann::json& v, const char* what,
                     std::optional<int> entity) {
  if (!v.is_array() || v.size() != 4) {
    throw SchemaError(std::string(what) + " must be [left, top, right, bottom]",
                      entity);
  }
  BBox b{read_int(v[0], what, entity), read_int(v[1], what, entity),
         read_int(v[2], what, entity), read_int(v[3], what, entity)};
  if (!b.well_formed()) {
    std::string msg = std::string(what) + " is negative or inverted";
    if (entity) msg += " (entity " + std::to_string(*entity) + ")";
    throw SchemaError(msg, entity);
  }
  return b;
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                                     std::optional<int> entity) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    std::string msg = std::string("missing key \"") + key + "\"";
    if (entity) msg += " in entity " + std::to_string(*entity);
    throw SchemaError(msg, entity);
  }
  return *it;
}

inline nlohmann::json box_json(const BBox& b) {
  return nlohmann::json::array({b.left, b.top, b.right, b.bottom});
}

}  // namespace detail

inline Entity entity_from_json(const nlohmann::json& item) {
  using namespace detail;
  if (!item.is_object()) throw SchemaError("entity must be an object");
  Entity e;
  e.id = read_int(require(item, "id", std::nullopt), "id", std::nullopt);

  const auto& label = require(item, "label", e.id);
  if (!label.is_string()) throw SchemaError("label must be a string", e.id);
  auto parsed = label_from_string(label.get<std::string>());
  if (!parsed) {
    throw SchemaError("unknown label \"" + label.get<std::string>() +
                          "\" on entity " + std::to_string(e.id),
                      e.id);
  }
  e.label = *parsed;
  e.box = read_box(require(item, "box", e.id), "entity box", e.id);

  if (auto t = item.find("text"); t != item.end() && t->is_string()) {
    e.text = t->get<std::string>();
  }

  if (auto w = item.find("words"); w != item.end()) {
    if (!w->is_array()) throw SchemaError("words must be a list", e.id);
    for (const auto& wj : *w) {
      if (!wj.is_object()) throw SchemaError("word must be an object", e.id);
      Word word;
      const auto& text = require(wj, "text", e.id);
      if (!text.is_string()) throw SchemaError("word text must be a string", e.id);
      word.text = text.get<std::string>();
      word.box = read_box(require(wj, "box", e.id), "word box", e.id);
      e.words.push_back(std::move(word));
    }
  }

  if (auto l = item.find("linking"); l != item.end()) {
    if (!l->is_array()) throw SchemaError("linking must be a list", e.id);
    for (const auto& pair : *l) {
      if (!pair.is_array() || pair.size() != 2) {
        throw SchemaError("link must be a [from, to] pair", e.id);
      }
      e.links.push_back({read_int(pair[0], "link", e.id),
                         read_int(pair[1], "link", e.id)});
    }
  }
  return e;
}

inline nlohmann::json entity_to_json(const Entity& e) {
  nlohmann::json words = nlohmann::json::array();
  for (const auto& w : e.words) {
    words.push_back({{"text", w.text}, {"box", detail::box_json(w.box)}});
  }
  nlohmann::json links = nlohmann::json::array();
  for (const auto& l : e.links) links.push_back({l.from, l.to});
  return {{"id", e.id},
          {"label", std::string(to_string(e.label))},
          {"box", detail::box_json(e.box)},
          {"text", e.text},
          {"words", std::move(words)},
          {"linking", std::move(links)}};
}

// Parses one annotation file. Unknown fields are ignored; nothing is
// synthesized. Page dimensions come from the paired image.
inline Form parse_form(std::string_view raw, std::string source_id,
                       PageSize page, Split split = Split::train) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed annotation at byte ") +
                         std::to_string(e.byte) + ": " + e.what(),
                     e.byte);
  }
  if (page.width <= 0 || page.height <= 0) {
    throw SchemaError("page dimensions must be positive");
  }
  if (!doc.is_object()) throw SchemaError("top level must be an object");
  const auto& items = detail::require(doc, "form", std::nullopt);
  if (!items.is_array()) throw SchemaError("\"form\" must be a list");

  Form form;
  form.source_id = std::move(source_id);
  form.width = page.width;
  form.height = page.height;
  form.split = split;
  form.entities.reserve(items.size());

  std::set<int> seen;
  for (const auto& item : items) {
    Entity e = entity_from_json(item);
    if (!seen.insert(e.id).second) {
      throw SchemaError("duplicate entity id " + std::to_string(e.id), e.id);
    }
    form.entities.push_back(std::move(e));
  }
  return form;
}

inline std::string serialize_form(const Form& form) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& e : form.entities) items.push_back(entity_to_json(e));
  nlohmann::json doc{{"form", std::move(items)}};
  return doc.dump(2) + "\n";
}

struct SplitStats {
  std::size_t forms = 0;
  std::size_t words = 0;
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::array<std::size_t, 4> per_label{};  // indexed by EntityLabel

  std::size_t count(EntityLabel l) const noexcept {
    return per_label[static_cast<std::size_t>(l)];
  }
  friend bool operator==(const SplitStats&, const SplitStats&) = default;
};

struct DatasetStats {
  SplitStats train;
  SplitStats test;

  const SplitStats& of(Split s) const noexcept {
    return s == Split::train ? train : test;
  }
  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

// Distinct unordered pairs {a, b}, a != b, joined by at least one link record
// anywhere in the form.
inline std::size_t count_relations(const Form& form) {
  std::set<std::pair<int, int>> pairs;
  for (const auto& e : form.entities) {
    for (const auto& l : e.links) {
      if (l.from == l.to) continue;
      pairs.emplace(std::min(l.from, l.to), std::max(l.from, l.to));
    }
  }
  return pairs.size();
}

inline DatasetStats compute_stats(const std::vector<Form>& forms) {
  DatasetStats stats;
  for (const auto& f : forms) {
    SplitStats& s = f.split == Split::train ? stats.train : stats.test;
    ++s.forms;
    s.entities += f.entities.size();
    s.relations += count_relations(f);
    for (const auto& e : f.entities) {
      s.words += e.words.size();
      ++s.per_label[static_cast<std::size_t>(e.label)];
    }
  }
  return stats;
}

}  // namespace funsdkit

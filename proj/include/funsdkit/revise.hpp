// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

// Relation-chain label normalization and reviewer patch overlays.
//
// Standard per-form pipeline: apply_patch -> normalize_labels. Labels after
// normalization depend only on each entity's linkage:
//   out-degree > 0                  -> question
//   out-degree = 0, in-degree > 0   -> answer
//   no links                        -> other
// so a chain K1 -> K2 -> V becomes (question, question, answer) and headers
// fold into question/other. Cycles are never broken automatically.

#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "funsdkit/annotation.hpp"
#include "funsdkit/error.hpp"
#include "funsdkit/graph.hpp"

namespace funsdkit {

struct LabelOverride {
  int id = 0;
  EntityLabel label = EntityLabel::other;

  friend bool operator==(const LabelOverride&, const LabelOverride&) = default;
};

struct Patch {
  std::string source_id;
  std::vector<LabelOverride> labels;
  std::vector<Link> add_edges;
  std::vector<Link> remove_edges;

  bool empty() const noexcept {
    return labels.empty() && add_edges.empty() && remove_edges.empty();
  }
  friend bool operator==(const Patch&, const Patch&) = default;
};

struct LabelChange {
  int id = 0;
  EntityLabel before = EntityLabel::other;
  EntityLabel after = EntityLabel::other;

  friend bool operator==(const LabelChange&, const LabelChange&) = default;
};

struct RevisionDiff {
  std::string source_id;
  std::vector<LabelChange> labels;
  std::vector<Link> edges_removed;
  std::vector<Link> edges_added;

  bool empty() const noexcept {
    return labels.empty() && edges_removed.empty() && edges_added.empty();
  }
  friend bool operator==(const RevisionDiff&, const RevisionDiff&) = default;
};

inline EntityLabel label_for_degrees(std::size_t in_degree,
                                     std::size_t out_degree) noexcept {
  if (out_degree > 0) return EntityLabel::question;
  if (in_degree > 0) return EntityLabel::answer;
  return EntityLabel::other;
}

namespace detail {

inline void require_acyclic(const Form& form, const RelationGraph& g) {
  const auto cycles = g.cycles();
  if (cycles.empty()) return;
  std::string ids;
  for (int id : cycles.front()) {
    ids += (ids.empty() ? "" : ",") + std::to_string(id);
  }
  throw GraphError(form.source_id + ": relation cycle over {" + ids +
                       "} needs a patch",
                   cycles.front());
}

inline RevisionDiff diff_between(const Form& before, const RelationGraph& g0,
                                 const Form& after, const RelationGraph& g1) {
  RevisionDiff diff;
  diff.source_id = after.source_id;
  for (const auto& e : after.entities) {
    const Entity* old = before.find(e.id);
    if (old && old->label != e.label) {
      diff.labels.push_back({e.id, old->label, e.label});
    }
  }
  for (const auto& edge : g0.edges()) {
    if (!g1.has_edge(edge.from, edge.to)) diff.edges_removed.push_back(edge);
  }
  for (const auto& edge : g1.edges()) {
    if (!g0.has_edge(edge.from, edge.to)) diff.edges_added.push_back(edge);
  }
  return diff;
}

}  // namespace detail

// Relabels by the degree rule and rewrites link lists canonically (each
// edge recorded once in both endpoints). Words, boxes and the edge set are
// untouched. Throws GraphError on dangling links or cycles.
inline std::pair<Form, RevisionDiff> normalize_labels(const Form& form) {
  const RelationGraph graph = build_graph(form);
  detail::require_acyclic(form, graph);

  Form out = form;
  for (auto& e : out.entities) {
    e.label = label_for_degrees(graph.in_degree(e.id), graph.out_degree(e.id));
  }
  write_links(out, graph);
  return {std::move(out), detail::diff_between(form, graph, out, graph)};
}

// Removing (a, b) drops every record of the pair in either orientation.
// Adding (a, b) records it in both endpoints unless that exact edge is
// already present. Label overrides are applied after edge edits.
inline Form apply_patch(const Form& form, const Patch& patch) {
  auto check = [&](int id) {
    if (!form.find(id)) {
      throw GraphError(form.source_id + ": patch references unknown entity " +
                           std::to_string(id),
                       {id});
    }
  };
  for (const auto& l : patch.remove_edges) check(l.from), check(l.to);
  for (const auto& l : patch.add_edges) check(l.from), check(l.to);
  for (const auto& o : patch.labels) check(o.id);
  if (patch.empty()) return form;

  Form out = form;
  for (const auto& rm : patch.remove_edges) {
    for (auto& e : out.entities) {
      std::erase_if(e.links, [&](const Link& l) {
        return (l.from == rm.from && l.to == rm.to) ||
               (l.from == rm.to && l.to == rm.from);
      });
    }
  }
  for (const auto& add : patch.add_edges) {
    for (int end : {add.from, add.to}) {
      Entity* e = out.find(end);
      if (std::find(e->links.begin(), e->links.end(), add) == e->links.end()) {
        e->links.push_back(add);
      }
      if (add.from == add.to) break;
    }
  }
  for (const auto& o : patch.labels) out.find(o.id)->label = o.label;
  return out;
}

// Replays a diff onto the form it was computed from.
inline Form apply_diff(const Form& form, const RevisionDiff& diff) {
  Patch edits{form.source_id, {}, diff.edges_added, diff.edges_removed};
  Form out = apply_patch(form, edits);
  for (const auto& c : diff.labels) {
    Entity* e = out.find(c.id);
    if (!e) throw GraphError("diff references unknown entity", {c.id});
    e->label = c.after;
  }
  write_links(out, build_graph(out));
  return out;
}

// apply_patch then normalize_labels; the diff is relative to `form`.
inline std::pair<Form, RevisionDiff> revise_form(const Form& form,
                                                 const Patch* patch = nullptr) {
  const RelationGraph before = build_graph(form, {.skip_dangling = true});
  const Form patched = patch ? apply_patch(form, *patch) : form;
  auto [out, _] = normalize_labels(patched);
  const RelationGraph after = build_graph(out);
  RevisionDiff diff = detail::diff_between(form, before, out, after);
  return {std::move(out), std::move(diff)};
}

struct RevisionFailure {
  std::string source_id;
  std::string message;
  std::vector<int> ids;
};

struct RevisionResult {
  std::vector<Form> forms;
  std::vector<RevisionDiff> diffs;
  std::vector<RevisionFailure> failures;

  std::size_t labels_changed() const noexcept {
    std::size_t n = 0;
    for (const auto& d : diffs) n += d.labels.size();
    return n;
  }
};

// Processes every form in source_id order; a failing form is recorded and
// skipped without aborting the rest. Patches are keyed by source_id.
inline RevisionResult revise_dataset(const std::vector<Form>& forms,
                                     const std::map<std::string, Patch>& patches = {}) {
  std::vector<const Form*> order;
  for (const auto& f : forms) order.push_back(&f);
  std::stable_sort(order.begin(), order.end(), [](const Form* a, const Form* b) {
    return a->source_id < b->source_id;
  });

  RevisionResult result;
  for (const Form* f : order) {
    auto it = patches.find(f->source_id);
    try {
      auto [out, diff] =
          revise_form(*f, it == patches.end() ? nullptr : &it->second);
      result.forms.push_back(std::move(out));
      result.diffs.push_back(std::move(diff));
    } catch (const GraphError& e) {
      result.failures.push_back({f->source_id, e.what(), e.ids()});
    }
  }
  return result;
}

namespace detail {

inline std::vector<Link> read_edges(const nlohmann::json& doc, const char* key) {
  std::vector<Link> out;
  auto it = doc.find(key);
  if (it == doc.end()) return out;
  if (!it->is_array()) throw SchemaError(std::string(key) + " must be a list");
  for (const auto& pair : *it) {
    if (!pair.is_array() || pair.size() != 2) {
      throw SchemaError(std::string(key) + " entries must be [from, to]");
    }
    out.push_back({read_int(pair[0], key, std::nullopt),
                   read_int(pair[1], key, std::nullopt)});
  }
  return out;
}

inline nlohmann::json edges_json(const std::vector<Link>& edges) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& l : edges) out.push_back({l.from, l.to});
  return out;
}

}  // namespace detail

// <source_id>.patch.json: {"labels": [{"id", "label"}], "add_edges": [[a,b]],
// "remove_edges": [[a,b]]}. All keys optional.
inline Patch parse_patch(std::string_view raw, std::string source_id) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed patch at byte ") +
                         std::to_string(e.byte) + ": " + e.what(),
                     e.byte);
  }
  if (!doc.is_object()) throw SchemaError("patch must be an object");
  Patch patch;
  patch.source_id = std::move(source_id);
  if (auto it = doc.find("labels"); it != doc.end()) {
    if (!it->is_array()) throw SchemaError("labels must be a list");
    for (const auto& item : *it) {
      const int id = detail::read_int(detail::require(item, "id", std::nullopt),
                                      "id", std::nullopt);
      const auto& lj = detail::require(item, "label", id);
      auto label = lj.is_string() ? label_from_string(lj.get<std::string>())
                                  : std::nullopt;
      if (!label) throw SchemaError("unknown label in patch", id);
      patch.labels.push_back({id, *label});
    }
  }
  patch.add_edges = detail::read_edges(doc, "add_edges");
  patch.remove_edges = detail::read_edges(doc, "remove_edges");
  return patch;
}

inline std::string serialize_patch(const Patch& patch) {
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& o : patch.labels) {
    labels.push_back({{"id", o.id}, {"label", std::string(to_string(o.label))}});
  }
  nlohmann::json doc{{"labels", std::move(labels)},
                     {"add_edges", detail::edges_json(patch.add_edges)},
                     {"remove_edges", detail::edges_json(patch.remove_edges)}};
  return doc.dump(2) + "\n";
}

inline std::string serialize_diff(const RevisionDiff& diff) {
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& c : diff.labels) {
    labels.push_back({{"id", c.id},
                      {"before", std::string(to_string(c.before))},
                      {"after", std::string(to_string(c.after))}});
  }
  nlohmann::json doc{{"source_id", diff.source_id},
                     {"labels", std::move(labels)},
                     {"edges_removed", detail::edges_json(diff.edges_removed)},
                     {"edges_added", detail::edges_json(diff.edges_added)}};
  return doc.dump(2) + "\n";
}

}  // namespace funsdkit

// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "funsdkit/annotation.hpp"
#include "funsdkit/error.hpp"

namespace funsdkit {

// Directed, deduplicated relation graph over the entities of one form.
// Node order follows the form's entity order; edge order follows first
// appearance of the unordered pair among the link records.
class RelationGraph {
 public:
  RelationGraph() = default;
  explicit RelationGraph(std::vector<int> nodes) : nodes_(std::move(nodes)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i]] = i;
    out_.resize(nodes_.size());
    in_.resize(nodes_.size());
  }

  const std::vector<int>& nodes() const noexcept { return nodes_; }
  const std::vector<Link>& edges() const noexcept { return edges_; }
  bool has_node(int id) const { return index_.count(id) != 0; }

  bool has_edge(int from, int to) const {
    auto it = index_.find(from);
    if (it == index_.end()) return false;
    const auto& succ = out_[it->second];
    return std::find(succ.begin(), succ.end(), to) != succ.end();
  }

  // Returns false if the edge already exists. Both endpoints must be nodes.
  bool add_edge(int from, int to) {
    if (!has_node(from) || !has_node(to)) {
      throw GraphError("edge references unknown entity", {from, to});
    }
    if (has_edge(from, to)) return false;
    edges_.push_back({from, to});
    out_[index_.at(from)].push_back(to);
    in_[index_.at(to)].push_back(from);
    return true;
  }

  const std::vector<int>& successors(int id) const { return out_[slot(id)]; }
  const std::vector<int>& predecessors(int id) const { return in_[slot(id)]; }
  std::size_t out_degree(int id) const { return out_[slot(id)].size(); }
  std::size_t in_degree(int id) const { return in_[slot(id)].size(); }

  // Strongly connected components that contain a cycle (size > 1, or a
  // self-loop), each sorted ascending; list ordered by smallest member.
  std::vector<std::vector<int>> cycles() const;

 private:
  std::size_t slot(int id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw GraphError("unknown entity", {id});
    return it->second;
  }

  std::vector<int> nodes_;
  std::map<int, std::size_t> index_;
  std::vector<Link> edges_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

inline std::vector<std::vector<int>> RelationGraph::cycles() const {
  // Tarjan's algorithm with an explicit stack so deep chains cannot overflow.
  const std::size_t n = nodes_.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> order(n, kUnset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<int>> result;
  std::size_t counter = 0;

  struct Frame {
    std::size_t node;
    std::size_t next_edge;
  };

  for (std::size_t root = 0; root < n; ++root) {
    if (order[root] != kUnset) continue;
    std::vector<Frame> frames{{root, 0}};
    order[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!frames.empty()) {
      Frame& f = frames.back();
      const auto& succ = out_[f.node];
      if (f.next_edge < succ.size()) {
        const std::size_t w = index_.at(succ[f.next_edge++]);
        if (order[w] == kUnset) {
          order[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.node] = std::min(low[f.node], order[w]);
        }
        continue;
      }
      const std::size_t v = f.node;
      frames.pop_back();
      if (!frames.empty()) {
        low[frames.back().node] = std::min(low[frames.back().node], low[v]);
      }
      if (low[v] != order[v]) continue;

      std::vector<int> component;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        component.push_back(nodes_[w]);
      } while (w != v);
      const bool self_loop =
          component.size() == 1 && has_edge(component[0], component[0]);
      if (component.size() > 1 || self_loop) {
        std::sort(component.begin(), component.end());
        result.push_back(std::move(component));
      }
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

struct GraphOptions {
  // Drop records naming absent ids instead of failing (linter mode).
  bool skip_dangling = false;
  bool skip_self_links = false;
};

// Builds the deduplicated graph from stored link records. Each unordered
// pair {a, b} yields one edge. If records disagree on orientation, a record
// kept by its own source entity ("a lists (a, b)") wins over one kept by the
// target; if both orientations are self-recorded, the entity that comes
// first in the form decides.
inline RelationGraph build_graph(const Form& form, GraphOptions opts = {}) {
  std::vector<int> nodes;
  nodes.reserve(form.entities.size());
  std::map<int, std::size_t> position;
  for (const auto& e : form.entities) {
    position[e.id] = nodes.size();
    nodes.push_back(e.id);
  }

  struct Candidate {
    std::size_t first_seen;
    bool first_forward;
    // Per orientation: does any record exist, and the earliest entity
    // position among self-first records.
    bool forward = false, backward = false;
    std::optional<std::size_t> forward_self, backward_self;
  };
  std::map<std::pair<int, int>, Candidate> pairs;
  std::size_t seen = 0;

  auto usable = [&](const Entity& e, const Link& l) {
    for (int id : {l.from, l.to}) {
      if (position.count(id)) continue;
      if (opts.skip_dangling) return false;
      throw GraphError("link from entity " + std::to_string(e.id) +
                           " references missing entity " + std::to_string(id),
                       {id});
    }
    return !(l.from == l.to && opts.skip_self_links);
  };

  for (const auto& e : form.entities) {
    for (const auto& l : e.links) {
      if (!usable(e, l)) continue;
      const std::pair<int, int> key{std::min(l.from, l.to),
                                    std::max(l.from, l.to)};
      const bool is_forward = l.from == key.first;
      auto [it, inserted] =
          pairs.try_emplace(key, Candidate{seen++, is_forward, false, false,
                                           std::nullopt, std::nullopt});
      Candidate& c = it->second;
      const std::size_t pos = position.at(e.id);
      auto& any = is_forward ? c.forward : c.backward;
      auto& self = is_forward ? c.forward_self : c.backward_self;
      any = true;
      if (l.from == e.id && (!self || pos < *self)) self = pos;
    }
  }

  std::vector<std::pair<std::size_t, Link>> ordered;
  for (const auto& [key, c] : pairs) {
    const Link fwd{key.first, key.second};
    const Link bwd{key.second, key.first};
    Link chosen = c.forward ? fwd : bwd;
    if (c.forward && c.backward) {
      if (c.forward_self && c.backward_self) {
        chosen = *c.forward_self <= *c.backward_self ? fwd : bwd;
      } else if (c.backward_self) {
        chosen = bwd;
      } else if (!c.forward_self) {
        chosen = c.first_forward ? fwd : bwd;  // earliest record decides
      }
    }
    ordered.emplace_back(c.first_seen, chosen);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  RelationGraph g(std::move(nodes));
  for (const auto& [_, link] : ordered) g.add_edge(link.from, link.to);
  return g;
}

// Rewrites every entity's link list from the graph: each edge (a, b) is
// recorded as [a, b] in both endpoints, in edge order (the FUNSD convention).
inline void write_links(Form& form, const RelationGraph& graph) {
  for (auto& e : form.entities) e.links.clear();
  for (const auto& edge : graph.edges()) {
    form.find(edge.from)->links.push_back(edge);
    if (edge.to != edge.from) form.find(edge.to)->links.push_back(edge);
  }
}

}  // namespace funsdkit

// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

// Shared builders for tests.

#pragma once

#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "funsdkit/funsdkit.hpp"

namespace funsdkit::testing {

inline Entity make_entity(int id, EntityLabel label, BBox box,
                          std::vector<Link> links = {},
                          std::vector<Word> words = {}) {
  Entity e;
  e.id = id;
  e.label = label;
  e.box = box;
  e.links = std::move(links);
  if (words.empty()) {
    words.push_back({"w" + std::to_string(id), box});
  }
  e.words = std::move(words);
  return e;
}

inline Form make_form(std::vector<Entity> entities, int width = 100,
                      int height = 100, std::string id = "form") {
  Form f;
  f.source_id = std::move(id);
  f.width = width;
  f.height = height;
  f.entities = std::move(entities);
  return f;
}

// Entities laid out on a grid; links recorded FUNSD-style in both endpoints.
inline Form chain_form(const std::vector<EntityLabel>& labels,
                       const std::vector<Link>& edges, std::string id = "form") {
  std::vector<Entity> ents;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int x = static_cast<int>(i % 5) * 20;
    const int y = static_cast<int>(i / 5) * 20;
    ents.push_back(make_entity(static_cast<int>(i), labels[i], {x, y, x + 15, y + 10}));
  }
  Form f = make_form(std::move(ents), 100, 100, std::move(id));
  for (const auto& e : edges) {
    f.find(e.from)->links.push_back(e);
    if (e.to != e.from) f.find(e.to)->links.push_back(e);
  }
  return f;
}

inline ClassMask mask_from(std::initializer_list<std::initializer_list<int>> rows) {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.begin()->size());
  ClassMask m(w, h);
  int y = 0;
  for (const auto& row : rows) {
    int x = 0;
    for (int v : row) m.at(x++, y) = static_cast<SegClass>(v);
    ++y;
  }
  return m;
}

// Random probability map with a strictly positive simplex at every pixel.
inline ProbMap random_prob(std::mt19937& rng, int w, int h) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  ProbMap p(w, h, kNumClasses);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int c = 0; c < kNumClasses; ++c) s += (p.at(x, y, c) = u(rng));
      for (int c = 0; c < kNumClasses; ++c) p.at(x, y, c) /= s;
    }
  }
  return p;
}

inline ClassMask random_mask(std::mt19937& rng, int w, int h) {
  std::uniform_int_distribution<int> cls(0, kNumClasses - 1);
  ClassMask m(w, h);
  for (auto& v : m.data()) v = static_cast<SegClass>(cls(rng));
  return m;
}

// Random DAG: edges only from lower to higher index.
inline Form random_dag_form(std::mt19937& rng, int n, double edge_p,
                            std::string id = "dag") {
  std::uniform_int_distribution<int> lab(0, 3);
  std::bernoulli_distribution coin(edge_p);
  std::vector<EntityLabel> labels;
  for (int i = 0; i < n; ++i) labels.push_back(static_cast<EntityLabel>(lab(rng)));
  std::vector<Link> edges;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (coin(rng)) edges.push_back({a, b});
    }
  }
  return chain_form(labels, edges, std::move(id));
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("funsdkit_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace funsdkit::testing

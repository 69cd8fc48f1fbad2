// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <gtest/gtest.h>

#include "funsdkit/pairing.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace funsdkit {
namespace {

using testing::make_entity;
using testing::make_form;
using L = EntityLabel;

void fill(ClassMask& m, BBox b, SegClass c) {
  for (int y = b.top; y < b.bottom; ++y) {
    for (int x = b.left; x < b.right; ++x) m.at(x, y) = c;
  }
}

Component comp(SegClass cls, double x, double y) {
  Component c;
  c.cls = cls;
  c.pixels = 4;
  c.centroid = {x, y};
  return c;
}

TEST(Components, EmptyMask) {
  EXPECT_TRUE(extract_components(ClassMask(8, 8, SegClass::background)).empty());
}

TEST(Components, SquareBlob) {
  ClassMask m(7, 7, SegClass::background);
  fill(m, {2, 3, 5, 6}, SegClass::key);
  const auto cs = extract_components(m);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].pixels, 9u);
  EXPECT_EQ(cs[0].centroid, (Point{3, 4}));
  EXPECT_EQ(cs[0].box, (BBox{2, 3, 5, 6}));
}

TEST(Components, DiagonalTouchIsConnected) {
  ClassMask m(6, 6, SegClass::background);
  fill(m, {0, 0, 2, 2}, SegClass::value);
  fill(m, {2, 2, 4, 4}, SegClass::value);
  const auto cs = extract_components(m);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].pixels, 8u);
}

TEST(Components, MinAreaAndOrder) {
  ClassMask m(10, 10, SegClass::background);
  fill(m, {6, 0, 9, 2}, SegClass::value);
  fill(m, {0, 5, 2, 7}, SegClass::key);
  fill(m, {5, 5, 7, 7}, SegClass::key);
  m.at(9, 9) = SegClass::key;
  const auto cs = extract_components(m);
  ASSERT_EQ(cs.size(), 3u);
  EXPECT_EQ(cs[0].cls, SegClass::key);
  EXPECT_EQ(cs[0].box.left, 0);
  EXPECT_EQ(cs[1].box.left, 5);
  EXPECT_EQ(cs[2].cls, SegClass::value);
  EXPECT_EQ(extract_components(m, {.min_area = 1}).size(), 4u);
}

TEST(PairNearest, TwoKeysTwoValues) {
  const std::vector<Component> cs = {comp(SegClass::key, 0, 0), comp(SegClass::key, 10, 0),
                                     comp(SegClass::value, 1, 0), comp(SegClass::value, 11, 0)};
  const auto r = pair_nearest(cs);
  ASSERT_EQ(r.pairs.size(), 2u);
  EXPECT_EQ(r.pairs[0].key_index, 0u);
  EXPECT_EQ(r.pairs[0].value_index, 2u);
  EXPECT_EQ(r.pairs[1].key_index, 1u);
  EXPECT_EQ(r.pairs[1].value_index, 3u);
  EXPECT_DOUBLE_EQ(r.pairs[0].distance, 1.0);
  EXPECT_TRUE(r.unmatched_values.empty());
}

TEST(PairNearest, NoKeys) {
  const auto r = pair_nearest({comp(SegClass::value, 1, 1)});
  EXPECT_TRUE(r.pairs.empty());
  EXPECT_EQ(r.unmatched_values, std::vector<std::size_t>{0});
}

TEST(PairNearest, TieGoesToFirstKey) {
  const auto r = pair_nearest({comp(SegClass::key, 0, 0), comp(SegClass::key, 4, 0),
                               comp(SegClass::value, 2, 0)});
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.pairs[0].key_index, 0u);
}

ClassMask random_blobs(std::mt19937& rng, int w, int h, int n) {
  ClassMask m(w, h, SegClass::background);
  std::uniform_int_distribution<int> cls(0, 1), xs(0, w - 1), ys(0, h - 1), sz(1, 5);
  for (int i = 0; i < n; ++i) {
    const int x = xs(rng), y = ys(rng);
    fill(m, {x, y, std::min(w, x + sz(rng)), std::min(h, y + sz(rng))},
         static_cast<SegClass>(cls(rng)));
  }
  return m;
}

TEST(PairNearest, MatchesOracleAndInvariants) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const ClassMask m = random_blobs(rng, 32, 24, 8);
    const auto cs = extract_components(m);
    const auto blobs = oracle::components(m, 4);
    ASSERT_EQ(cs.size(), blobs.size());
    std::vector<std::pair<int, std::pair<double, double>>> flat;
    std::array<std::size_t, 2> pixel_sum{};
    for (std::size_t i = 0; i < cs.size(); ++i) {
      ASSERT_EQ(static_cast<int>(cs[i].cls), blobs[i].cls);
      ASSERT_EQ(cs[i].pixels, blobs[i].pixels);
      ASSERT_EQ(cs[i].centroid, (Point{blobs[i].cx, blobs[i].cy}));
      flat.push_back({blobs[i].cls, {blobs[i].cx, blobs[i].cy}});
      pixel_sum[index_of(cs[i].cls)] += cs[i].pixels;
    }
    const auto all = extract_components(m, {.min_area = 1});
    std::array<std::size_t, 2> total{};
    for (const auto& c : all) total[index_of(c.cls)] += c.pixels;
    const auto counts = class_counts(m);
    ASSERT_EQ(total[0], counts[0]);
    ASSERT_EQ(total[1], counts[1]);
    ASSERT_LE(pixel_sum[0], counts[0]);

    const auto r = pair_nearest(cs);
    const auto want = oracle::nearest_pairs(flat);
    std::size_t p = 0, u = 0;
    for (const auto& [k, v] : want) {
      if (k < 0) {
        ASSERT_EQ(r.unmatched_values.at(u++), static_cast<std::size_t>(v));
      } else {
        ASSERT_EQ(r.pairs.at(p).key_index, static_cast<std::size_t>(k));
        ASSERT_EQ(r.pairs.at(p++).value_index, static_cast<std::size_t>(v));
      }
    }
    ASSERT_EQ(p, r.pairs.size());
    ASSERT_EQ(u, r.unmatched_values.size());

    ClassMask shifted(m.width() + 5, m.height() + 3, SegClass::background);
    for (int y = 0; y < m.height(); ++y) {
      for (int x = 0; x < m.width(); ++x) shifted.at(x + 5, y + 3) = m.at(x, y);
    }
    const auto rs = pair_nearest(extract_components(shifted));
    ASSERT_EQ(rs.pairs.size(), r.pairs.size());
    for (std::size_t i = 0; i < r.pairs.size(); ++i) {
      ASSERT_EQ(rs.pairs[i].key_index, r.pairs[i].key_index);
      ASSERT_NEAR(rs.pairs[i].value.centroid.x, r.pairs[i].value.centroid.x + 5, 1e-9);
      ASSERT_NEAR(rs.pairs[i].distance, r.pairs[i].distance, 1e-9);
    }
  }
}

TEST(PairReport, EmptyAndWithoutTruth) {
  EXPECT_TRUE(pairs_to_report("f", {}).empty());
  const auto r = pair_nearest({comp(SegClass::key, 0, 0), comp(SegClass::value, 3, 4)});
  const auto recs = pairs_to_report("f", r.pairs);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_FALSE(recs[0].hit.has_value());
  EXPECT_DOUBLE_EQ(recs[0].distance, 5.0);
  EXPECT_EQ(format_pair_records(recs).find("hit"), std::string::npos);
}

TEST(PairReport, RasterizedTruthHits) {
  Form f = make_form({make_entity(0, L::question, {2, 2, 12, 8}, {{0, 1}}),
                      make_entity(1, L::answer, {16, 2, 30, 8}, {{0, 1}}),
                      make_entity(2, L::answer, {2, 30, 12, 36})},
                     40, 40);
  const auto r = pair_nearest(extract_components(rasterize_target(f)));
  ASSERT_EQ(r.pairs.size(), 2u);
  const auto recs = pairs_to_report("form", r.pairs, &f);
  EXPECT_EQ(recs[0].key_box, (BBox{2, 2, 12, 8}));
  EXPECT_EQ(recs[0].value_box, (BBox{16, 2, 30, 8}));
  EXPECT_EQ(recs[0].hit, true);
  EXPECT_EQ(recs[1].hit, false);  // answer 2 is unlinked
}

}  // namespace
}  // namespace funsdkit

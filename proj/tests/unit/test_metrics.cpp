// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "funsdkit/metrics.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace funsdkit {
namespace {

using testing::mask_from;

ProbMap uniform(int w, int h) { return ProbMap(w, h, kNumClasses, 0.25); }

TEST(IoU, IdentityIsOne) {
  const ClassMask m = mask_from({{0, 1}, {2, 3}});
  EXPECT_EQ(iou_per_class(m, m), (std::array<double, 4>{1, 1, 1, 1}));
  EXPECT_EQ(mean_iou(m, m), 1.0);
  EXPECT_EQ(mean_iou(m, m, false), 1.0);
}

TEST(IoU, AbsentClassesScoreOne) {
  const ClassMask pred = mask_from({{3, 3}, {3, 3}});
  const ClassMask target = mask_from({{0, 0}, {0, 0}});
  EXPECT_EQ(iou_per_class(pred, target), (std::array<double, 4>{0, 1, 1, 0}));
}

TEST(IoU, TwoByTwoCounts) {
  const ClassMask pred = mask_from({{0, 0}, {1, 1}});
  const ClassMask target = mask_from({{0, 1}, {1, 1}});
  const auto iou = iou_per_class(pred, target);
  EXPECT_DOUBLE_EQ(iou[0], 0.5);
  EXPECT_DOUBLE_EQ(iou[1], 2.0 / 3.0);
  EXPECT_EQ(iou[2], 1.0);
  EXPECT_EQ(iou[3], 1.0);
  EXPECT_NEAR(mean_iou(pred, target), 0.7917, 5e-5);
  EXPECT_NEAR(mean_iou(pred, target, false), 0.7222, 5e-5);
}

TEST(IoU, ShapeMismatchThrows) {
  EXPECT_THROW(iou_per_class(ClassMask(2, 2), ClassMask(2, 3)), DimensionError);
}

TEST(IoU, MatchesOracleAndIsSymmetric) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> dim(1, 12);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = dim(rng), h = dim(rng);
    const ClassMask a = testing::random_mask(rng, w, h);
    const ClassMask b = testing::random_mask(rng, w, h);
    const auto got = iou_per_class(a, b);
    const auto want = oracle::iou(a, b);
    const auto flipped = iou_per_class(b, a);
    for (int c = 0; c < 4; ++c) {
      ASSERT_EQ(got[c], want[c].value());
      ASSERT_EQ(got[c], flipped[c]);
      ASSERT_GE(got[c], 0.0);
      ASSERT_LE(got[c], 1.0);
    }
  }
}

TEST(Dice, Examples) {
  const ClassMask key = mask_from({{0, 0}, {0, 0}});
  const ClassMask bg = mask_from({{3, 3}, {3, 3}});
  EXPECT_EQ(dice_loss(one_hot(key), one_hot(key)), 0.0);
  EXPECT_DOUBLE_EQ(dice_loss(uniform(2, 2), one_hot(bg)), 0.5);
  EXPECT_DOUBLE_EQ(dice_loss(uniform(2, 2), one_hot(key)), 0.5);
}

TEST(WeightedCrossEntropy, Examples) {
  const LossConfig cfg;
  const ClassMask key = mask_from({{0}});
  const ClassMask bg = mask_from({{3}});
  const double k = weighted_cross_entropy(uniform(1, 1), one_hot(key), cfg.class_weights);
  const double b = weighted_cross_entropy(uniform(1, 1), one_hot(bg), cfg.class_weights);
  EXPECT_NEAR(k, 0.4201, 5e-5);
  EXPECT_NEAR(b, 0.1260, 5e-5);
  EXPECT_NEAR(b / k, 0.3, 1e-15);
  EXPECT_EQ(weighted_cross_entropy(one_hot(key), one_hot(key), cfg.class_weights), 0.0);
}

TEST(WeightedCrossEntropy, ClipsZeroProbability) {
  const LossConfig cfg;
  const ClassMask key = mask_from({{0}});
  const double v = weighted_cross_entropy(one_hot(mask_from({{1}})), one_hot(key),
                                          cfg.class_weights);
  EXPECT_NEAR(v, -std::log(1e-7) / 3.3, 1e-12);
}

TEST(LossConfig, WeightsAreNormalizedProportions) {
  const auto w = LossConfig::normalized({1, 1, 1, 0.3});
  const LossConfig cfg;
  for (int c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(w[c], cfg.class_weights[c]);
  EXPECT_NEAR(w[0] + w[1] + w[2] + w[3], 1.0, 1e-15);
}

TEST(CombinedLoss, Composition) {
  EXPECT_EQ(combine(0.0, 0.0), 0.5);
  EXPECT_EQ(combine(0.2, 0.4), 1.5);
  const ClassMask key = mask_from({{0, 0}, {0, 0}});
  const auto loss = combined_loss(uniform(2, 2), one_hot(key));
  // 2.7101 is quoted from rounded intermediates; the exact value is 2.710045.
  EXPECT_NEAR(loss.total, 2.7101, 1e-4);
  EXPECT_NEAR(loss.total, 2.5 + 0.5 * std::log(4.0) / 3.3, 1e-12);
  EXPECT_DOUBLE_EQ(loss.total - 0.5, 4.0 * loss.dice + 0.5 * loss.wce);
}

TEST(Losses, MatchOraclesAndStayInBounds) {
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> dim(1, 10);
  const LossConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    const int w = dim(rng), h = dim(rng);
    const ProbMap p = testing::random_prob(rng, w, h);
    const ClassMask t = testing::random_mask(rng, w, h);
    const double d = dice_loss(p, one_hot(t));
    const double ce = weighted_cross_entropy(p, one_hot(t), cfg.class_weights);
    ASSERT_NEAR(d, static_cast<double>(oracle::dice(p, t)), 1e-9);
    ASSERT_NEAR(ce, static_cast<double>(oracle::wce(p, t)), 1e-9);
    ASSERT_GE(d, 0.0);
    ASSERT_LE(d, 1.0);
    ASSERT_GE(ce, 0.0);
  }
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

TEST(Gradients, FiniteDifferencesOn4x4) {
  std::mt19937 rng(13);
  const LossConfig cfg;
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    ProbMap p = testing::random_prob(rng, 4, 4);
    const ProbMap t = one_hot(testing::random_mask(rng, 4, 4));
    const ProbMap gd = dice_loss_grad(p, t);
    const ProbMap gw = weighted_cross_entropy_grad(p, t, cfg.class_weights);
    const ProbMap gc = combined_loss_grad(p, t, cfg);
    for (std::size_t i = 0; i < p.data().size(); ++i) {
      const double orig = p.data()[i];
      p.data()[i] = orig + h;
      const double dp = dice_loss(p, t);
      const double wp = weighted_cross_entropy(p, t, cfg.class_weights);
      const double cp = combined_loss(p, t, cfg).total;
      p.data()[i] = orig - h;
      const double dm = dice_loss(p, t);
      const double wm = weighted_cross_entropy(p, t, cfg.class_weights);
      const double cm = combined_loss(p, t, cfg).total;
      p.data()[i] = orig;
      ASSERT_LT(rel_err((dp - dm) / (2 * h), gd.data()[i]), 1e-4) << i;
      ASSERT_LT(rel_err((wp - wm) / (2 * h), gw.data()[i]), 1e-4) << i;
      ASSERT_LT(rel_err((cp - cm) / (2 * h), gc.data()[i]), 1e-4) << i;
    }
  }
}

TEST(EvaluateDataset, MicroAggregation) {
  const ClassMask p1 = mask_from({{0, 0}, {1, 1}});
  const ClassMask t1 = mask_from({{0, 1}, {1, 1}});
  const ClassMask p2 = mask_from({{2, 2, 3}});
  const ClassMask t2 = mask_from({{2, 3, 3}});

  const auto single = evaluate_dataset({{"a", p1}}, {{"a", t1}});
  EXPECT_EQ(single.iou, iou_per_class(p1, t1));

  const auto twice = evaluate_dataset({{"a", p1}, {"b", p1}}, {{"a", t1}, {"b", t1}});
  EXPECT_EQ(twice.iou, single.iou);
  EXPECT_EQ(twice.images, 2u);

  const auto both = evaluate_dataset({{"a", p1}, {"b", p2}}, {{"a", t1}, {"b", t2}});
  // key 1/2, value 2/3, other 1/2 (one image absent), background 1/2
  EXPECT_DOUBLE_EQ(both.iou[0], 0.5);
  EXPECT_DOUBLE_EQ(both.iou[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(both.iou[2], 0.5);
  EXPECT_DOUBLE_EQ(both.iou[3], 0.5);
  EXPECT_EQ(both.counts.union_[2], 2u);
}

TEST(EvaluateDataset, MissingPairListsIds) {
  const ClassMask m(2, 2);
  try {
    evaluate_dataset({{"a", m}, {"z", m}}, {{"a", m}, {"b", m}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "unpaired masks: b, z");
  }
}

TEST(Report, MentionsBothMeans) {
  const ClassMask m = mask_from({{0, 1}});
  const std::string s = format_report(evaluate_dataset({{"a", m}}, {{"a", m}}));
  EXPECT_NE(s.find("Mean IoU: 1.000000"), std::string::npos);
  EXPECT_NE(s.find("Mean IoU (without background): 1.000000"), std::string::npos);
}

}  // namespace
}  // namespace funsdkit

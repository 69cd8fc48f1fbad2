// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

// Segmentation metrics and the training loss:
//
//   loss = dice_weight * dice + additive + ce_weight * wce
//        = 4 * dice + 0.5 + 0.5 * wce                       (defaults)
//
// dice is the soft dice loss averaged over the key/value/other channels;
// wce is the per-pixel mean of -w[c] * ln(p_c) at the true class c with
// class weights proportional to [1, 1, 1, 0.3] summing to 1.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "funsdkit/error.hpp"
#include "funsdkit/image.hpp"
#include "funsdkit/raster.hpp"

namespace funsdkit {

// Per-pixel class probabilities, 4 channels in SegClass order.
using ProbMap = Tensor3<double>;

inline ProbMap one_hot(const ClassMask& mask) {
  ProbMap out(mask.width(), mask.height(), kNumClasses, 0.0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      out.at(x, y, static_cast<int>(mask.at(x, y))) = 1.0;
    }
  }
  return out;
}

// Ties go to the lower class index.
inline ClassMask argmax(const ProbMap& prob) {
  ClassMask out(prob.width(), prob.height());
  for (int y = 0; y < prob.height(); ++y) {
    for (int x = 0; x < prob.width(); ++x) {
      int best = 0;
      for (int c = 1; c < kNumClasses; ++c) {
        if (prob.at(x, y, c) > prob.at(x, y, best)) best = c;
      }
      out.at(x, y) = static_cast<SegClass>(best);
    }
  }
  return out;
}

struct LossConfig {
  double dice_weight = 4.0;
  double ce_weight = 0.5;
  double additive = 0.5;
  std::array<double, kNumClasses> class_weights = {1.0 / 3.3, 1.0 / 3.3,
                                                   1.0 / 3.3, 0.3 / 3.3};
  double dice_smoothing = 1.0;
  double prob_floor = 1e-7;

  // Normalizes raw proportions so they sum to 1.
  static std::array<double, kNumClasses> normalized(
      std::array<double, kNumClasses> raw) {
    const double s = std::accumulate(raw.begin(), raw.end(), 0.0);
    for (auto& w : raw) w /= s;
    return raw;
  }
};

inline constexpr std::array<SegClass, 3> kDiceChannels = {
    SegClass::key, SegClass::value, SegClass::other};

namespace detail {

inline void require_same_shape(const ProbMap& a, const ProbMap& b) {
  if (!a.same_shape(b) || a.channels() != kNumClasses) {
    throw DimensionError("probability map and target differ in shape");
  }
}

}  // namespace detail

// ---- IoU --------------------------------------------------------------------

// Raw per-class pixel counts; sums over images compose exactly.
struct ConfusionCounts {
  std::array<std::uint64_t, kNumClasses> intersection{};
  std::array<std::uint64_t, kNumClasses> union_{};

  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
    for (int c = 0; c < kNumClasses; ++c) {
      intersection[c] += o.intersection[c];
      union_[c] += o.union_[c];
    }
    return *this;
  }

  // A class absent from both maps scores 1.
  std::array<double, kNumClasses> iou() const noexcept {
    std::array<double, kNumClasses> out{};
    for (int c = 0; c < kNumClasses; ++c) {
      out[c] = union_[c] == 0 ? 1.0
                              : static_cast<double>(intersection[c]) /
                                    static_cast<double>(union_[c]);
    }
    return out;
  }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts confusion_counts(const ClassMask& pred,
                                        const ClassMask& target) {
  if (!pred.same_shape(target)) {
    throw DimensionError("prediction " + std::to_string(pred.width()) + "x" +
                         std::to_string(pred.height()) + " vs target " +
                         std::to_string(target.width()) + "x" +
                         std::to_string(target.height()));
  }
  ConfusionCounts counts;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto p = index_of(pred.data()[i]);
    const auto t = index_of(target.data()[i]);
    if (p == t) {
      ++counts.intersection[p];
      ++counts.union_[p];
    } else {
      ++counts.union_[p];
      ++counts.union_[t];
    }
  }
  return counts;
}

inline std::array<double, kNumClasses> iou_per_class(const ClassMask& pred,
                                                     const ClassMask& target) {
  return confusion_counts(pred, target).iou();
}

inline double mean_of(const std::array<double, kNumClasses>& per_class,
                      bool include_background) noexcept {
  const int n = include_background ? kNumClasses : kNumClasses - 1;
  double s = 0.0;
  for (int c = 0; c < n; ++c) s += per_class[c];
  return s / n;
}

inline double mean_iou(const ClassMask& pred, const ClassMask& target,
                       bool include_background = true) {
  return mean_of(iou_per_class(pred, target), include_background);
}

// ---- losses -----------------------------------------------------------------

inline double dice_loss(const ProbMap& prob, const ProbMap& target,
                        double smoothing = 1.0) {
  detail::require_same_shape(prob, target);
  std::array<double, 3> inter{}, psum{}, tsum{};
  for (int y = 0; y < prob.height(); ++y) {
    for (int x = 0; x < prob.width(); ++x) {
      for (std::size_t k = 0; k < kDiceChannels.size(); ++k) {
        const int c = static_cast<int>(kDiceChannels[k]);
        const double p = prob.at(x, y, c);
        const double t = target.at(x, y, c);
        inter[k] += p * t;
        psum[k] += p;
        tsum[k] += t;
      }
    }
  }
  double loss = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    loss += 1.0 - (2.0 * inter[k] + smoothing) / (psum[k] + tsum[k] + smoothing);
  }
  return loss / 3.0;
}

// d(dice_loss)/d(prob); background channel gradient is zero.
inline ProbMap dice_loss_grad(const ProbMap& prob, const ProbMap& target,
                              double smoothing = 1.0) {
  detail::require_same_shape(prob, target);
  std::array<double, 3> inter{}, denom{};
  for (int y = 0; y < prob.height(); ++y) {
    for (int x = 0; x < prob.width(); ++x) {
      for (std::size_t k = 0; k < 3; ++k) {
        const int c = static_cast<int>(kDiceChannels[k]);
        inter[k] += prob.at(x, y, c) * target.at(x, y, c);
        denom[k] += prob.at(x, y, c) + target.at(x, y, c);
      }
    }
  }
  ProbMap grad(prob.width(), prob.height(), kNumClasses, 0.0);
  for (std::size_t k = 0; k < 3; ++k) {
    const int c = static_cast<int>(kDiceChannels[k]);
    const double num = 2.0 * inter[k] + smoothing;
    const double den = denom[k] + smoothing;
    for (int y = 0; y < prob.height(); ++y) {
      for (int x = 0; x < prob.width(); ++x) {
        const double t = target.at(x, y, c);
        grad.at(x, y, c) = -(2.0 * t * den - num) / (den * den) / 3.0;
      }
    }
  }
  return grad;
}

namespace detail {

inline int true_class(const ProbMap& target, int x, int y) {
  for (int c = 0; c < kNumClasses; ++c) {
    if (target.at(x, y, c) > 0.5) return c;
  }
  throw DimensionError("target is not one-hot");
}

}  // namespace detail

inline double weighted_cross_entropy(const ProbMap& prob, const ProbMap& target,
                                     const std::array<double, kNumClasses>& weights,
                                     double floor = 1e-7) {
  detail::require_same_shape(prob, target);
  const std::size_t n = static_cast<std::size_t>(prob.width()) * prob.height();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (int y = 0; y < prob.height(); ++y) {
    for (int x = 0; x < prob.width(); ++x) {
      const int c = detail::true_class(target, x, y);
      const double p = std::clamp(prob.at(x, y, c), floor, 1.0);
      sum += -weights[c] * std::log(p);
    }
  }
  return sum / static_cast<double>(n);
}

// Zero where the probability sits on the clipping floor or ceiling.
inline ProbMap weighted_cross_entropy_grad(
    const ProbMap& prob, const ProbMap& target,
    const std::array<double, kNumClasses>& weights, double floor = 1e-7) {
  detail::require_same_shape(prob, target);
  ProbMap grad(prob.width(), prob.height(), kNumClasses, 0.0);
  const double n = static_cast<double>(prob.width()) * prob.height();
  for (int y = 0; y < prob.height(); ++y) {
    for (int x = 0; x < prob.width(); ++x) {
      const int c = detail::true_class(target, x, y);
      const double p = prob.at(x, y, c);
      if (p > floor && p < 1.0) grad.at(x, y, c) = -weights[c] / (p * n);
    }
  }
  return grad;
}

struct LossBreakdown {
  double dice = 0.0;
  double wce = 0.0;
  double total = 0.0;
};

inline double combine(double dice, double wce, const LossConfig& cfg = {}) noexcept {
  return cfg.dice_weight * dice + cfg.additive + cfg.ce_weight * wce;
}

inline LossBreakdown combined_loss(const ProbMap& prob, const ProbMap& target,
                                   const LossConfig& cfg = {}) {
  LossBreakdown out;
  out.dice = dice_loss(prob, target, cfg.dice_smoothing);
  out.wce = weighted_cross_entropy(prob, target, cfg.class_weights, cfg.prob_floor);
  out.total = combine(out.dice, out.wce, cfg);
  return out;
}

inline ProbMap combined_loss_grad(const ProbMap& prob, const ProbMap& target,
                                  const LossConfig& cfg = {}) {
  ProbMap g = dice_loss_grad(prob, target, cfg.dice_smoothing);
  const ProbMap w =
      weighted_cross_entropy_grad(prob, target, cfg.class_weights, cfg.prob_floor);
  for (std::size_t i = 0; i < g.data().size(); ++i) {
    g.data()[i] = cfg.dice_weight * g.data()[i] + cfg.ce_weight * w.data()[i];
  }
  return g;
}

// ---- dataset evaluation -------------------------------------------------------

struct MetricReport {
  std::array<double, kNumClasses> iou{};
  double miou = 0.0;
  double miou_no_background = 0.0;
  ConfusionCounts counts;
  std::size_t images = 0;
  std::optional<LossBreakdown> loss;

  static MetricReport from_counts(const ConfusionCounts& counts,
                                  std::size_t images) {
    MetricReport r;
    r.counts = counts;
    r.images = images;
    r.iou = counts.iou();
    r.miou = mean_of(r.iou, true);
    r.miou_no_background = mean_of(r.iou, false);
    return r;
  }
};

// Micro-aggregated: intersections and unions are pooled over every pixel of
// every pair before dividing. Both maps are keyed by source_id.
inline MetricReport evaluate_dataset(const std::map<std::string, ClassMask>& preds,
                                     const std::map<std::string, ClassMask>& targets) {
  std::vector<std::string> missing;
  for (const auto& [id, _] : targets) {
    if (!preds.count(id)) missing.push_back(id);
  }
  for (const auto& [id, _] : preds) {
    if (!targets.count(id)) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::string ids;
    for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
    throw Error("unpaired masks: " + ids);
  }
  ConfusionCounts total;
  for (const auto& [id, target] : targets) {
    try {
      total += confusion_counts(preds.at(id), target);
    } catch (const DimensionError& e) {
      throw DimensionError(id + ": " + e.what());
    }
  }
  return MetricReport::from_counts(total, targets.size());
}

inline std::string format_report(const MetricReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6);
  os << "images: " << r.images << '\n';
  for (int c = 0; c < kNumClasses; ++c) {
    os << "IoU " << to_string(static_cast<SegClass>(c)) << ": " << r.iou[c]
       << '\n';
  }
  os << "Mean IoU: " << r.miou << '\n';
  os << "Mean IoU (without background): " << r.miou_no_background << '\n';
  if (r.loss) {
    os << "dice loss: " << r.loss->dice << '\n';
    os << "weighted cross-entropy: " << r.loss->wce << '\n';
    os << "combined loss: " << r.loss->total << '\n';
  }
  return os.str();
}

inline std::string format_report_json(const MetricReport& r) {
  nlohmann::json j;
  for (int c = 0; c < kNumClasses; ++c) {
    const std::string name(to_string(static_cast<SegClass>(c)));
    j["iou"][name] = r.iou[c];
    j["intersection"][name] = r.counts.intersection[c];
    j["union"][name] = r.counts.union_[c];
  }
  j["images"] = r.images;
  j["miou"] = r.miou;
  j["miou_no_background"] = r.miou_no_background;
  if (r.loss) {
    j["loss"] = {{"dice", r.loss->dice},
                 {"wce", r.loss->wce},
                 {"total", r.loss->total}};
  }
  return j.dump() + "\n";
}

}  // namespace funsdkit

// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

// Machine-checkable annotation consistency rules. Linting never throws on
// data problems; it reports them.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "funsdkit/annotation.hpp"
#include "funsdkit/graph.hpp"

namespace funsdkit {

enum class Severity : std::uint8_t { error, warning };

inline constexpr std::string_view to_string(Severity s) noexcept {
  return s == Severity::error ? "error" : "warning";
}

// Declaration order is report order.
enum class Rule : std::uint8_t {
  dangling_link,
  asymmetric_link,
  self_link,
  box_out_of_page,
  word_outside_entity,
  relation_cycle,
  header_in_chain,
  answer_with_outgoing,
  isolated_key_or_value,
  empty_entity,
};

struct LintRule {
  Rule rule;
  std::string_view code;
  std::string_view name;
  Severity severity;
  std::string_view description;
};

inline constexpr std::array<LintRule, 10> kLintRules = {{
    {Rule::dangling_link, "L1", "DanglingLink", Severity::error,
     "link references an id absent from the form"},
    {Rule::asymmetric_link, "L2", "AsymmetricLink", Severity::warning,
     "link recorded by one endpoint but not by the other"},
    {Rule::self_link, "L3", "SelfLink", Severity::error,
     "entity links to itself"},
    {Rule::box_out_of_page, "L4", "BoxOutOfPage", Severity::warning,
     "entity or word box exceeds the page"},
    {Rule::word_outside_entity, "L5", "WordOutsideEntity", Severity::warning,
     "word box not inside its entity box (with tolerance)"},
    {Rule::relation_cycle, "L6", "RelationCycle", Severity::error,
     "directed relation graph contains a cycle"},
    {Rule::header_in_chain, "L7", "HeaderInChain", Severity::warning,
     "header entity has an incoming link"},
    {Rule::answer_with_outgoing, "L8", "AnswerWithOutgoing", Severity::warning,
     "answer entity links onward to a question or answer"},
    {Rule::isolated_key_or_value, "L9", "IsolatedKeyOrValue", Severity::warning,
     "question or answer entity without links"},
    {Rule::empty_entity, "L10", "EmptyEntity", Severity::warning,
     "entity has no words"},
}};

inline const LintRule& rule_info(Rule r) noexcept {
  return kLintRules[static_cast<std::size_t>(r)];
}

inline std::optional<Rule> rule_from_code(std::string_view code) {
  for (const auto& r : kLintRules) {
    if (r.code == code) return r.rule;
  }
  return std::nullopt;
}

struct LintFinding {
  Rule rule;
  std::string source_id;
  std::vector<int> entity_ids;
  std::string message;
  std::optional<BBox> locus;

  Severity severity() const noexcept { return rule_info(rule).severity; }
};

struct LintOptions {
  int word_tolerance = 3;  // L5 dilation, pixels
};

class LintReport {
 public:
  void add(LintFinding f) {
    ++counts_[static_cast<std::size_t>(f.rule)];
    findings_.push_back(std::move(f));
  }
  void append(const LintReport& other) {
    for (const auto& f : other.findings_) add(f);
  }

  const std::vector<LintFinding>& findings() const noexcept {
    return findings_;
  }
  std::size_t count(Rule r) const noexcept {
    return counts_[static_cast<std::size_t>(r)];
  }
  std::size_t count(Severity s) const noexcept {
    std::size_t n = 0;
    for (const auto& info : kLintRules) {
      if (info.severity == s) n += count(info.rule);
    }
    return n;
  }
  bool empty() const noexcept { return findings_.empty(); }

  // Stable sort by (rule, first entity id) within one form.
  void sort_form_order() {
    std::stable_sort(findings_.begin(), findings_.end(),
                     [](const LintFinding& a, const LintFinding& b) {
                       if (a.rule != b.rule) return a.rule < b.rule;
                       const int ia = a.entity_ids.empty() ? 0 : a.entity_ids[0];
                       const int ib = b.entity_ids.empty() ? 0 : b.entity_ids[0];
                       return ia < ib;
                     });
  }

 private:
  std::vector<LintFinding> findings_;
  std::array<std::size_t, kLintRules.size()> counts_{};
};

namespace detail {

inline std::string box_str(const BBox& b) {
  std::ostringstream os;
  os << '[' << b.left << ',' << b.top << ',' << b.right << ',' << b.bottom
     << ']';
  return os.str();
}

inline bool has_pair(const Entity& e, int a, int b) {
  return std::any_of(e.links.begin(), e.links.end(), [&](const Link& l) {
    return (l.from == a && l.to == b) || (l.from == b && l.to == a);
  });
}

}  // namespace detail

inline LintReport lint_form(const Form& form, const LintOptions& opts = {}) {
  LintReport report;
  auto emit = [&](Rule r, std::vector<int> ids, std::string msg,
                  std::optional<BBox> locus = std::nullopt) {
    report.add({r, form.source_id, std::move(ids), std::move(msg), locus});
  };
  const PageSize page = form.page();

  for (const auto& e : form.entities) {
    std::set<int> missing;
    std::set<std::pair<int, int>> asym;
    bool self = false;
    for (const auto& l : e.links) {
      for (int id : {l.from, l.to}) {
        if (!form.find(id)) missing.insert(id);
      }
      if (l.from == l.to) self = true;
      for (int end : {l.from, l.to}) {
        if (end == e.id) continue;
        const Entity* other = form.find(end);
        if (other && !detail::has_pair(*other, l.from, l.to)) {
          asym.emplace(l.from, l.to);
        }
      }
    }
    for (int id : missing) {
      emit(Rule::dangling_link, {e.id},
           "entity " + std::to_string(e.id) + " links to missing id " +
               std::to_string(id));
    }
    for (const auto& [a, b] : asym) {
      std::vector<int> ids{e.id};
      for (int end : {a, b}) {
        if (end != e.id) ids.push_back(end);
      }
      emit(Rule::asymmetric_link, ids,
           "link [" + std::to_string(a) + "," + std::to_string(b) +
               "] recorded by entity " + std::to_string(e.id) +
               " only");
    }
    if (self) {
      emit(Rule::self_link, {e.id},
           "entity " + std::to_string(e.id) + " links to itself");
    }

    auto out_of_page = [&](const BBox& b) {
      return b.right > page.width || b.bottom > page.height;
    };
    if (out_of_page(e.box)) {
      emit(Rule::box_out_of_page, {e.id},
           "entity box " + detail::box_str(e.box) + " exceeds page " +
               std::to_string(page.width) + "x" + std::to_string(page.height),
           e.box);
    }
    for (std::size_t i = 0; i < e.words.size(); ++i) {
      const BBox& wb = e.words[i].box;
      if (out_of_page(wb)) {
        emit(Rule::box_out_of_page, {e.id},
             "word " + std::to_string(i) + " box " + detail::box_str(wb) +
                 " exceeds page",
             wb);
      }
    }

    const BBox allowed = e.box.dilated(opts.word_tolerance);
    for (std::size_t i = 0; i < e.words.size(); ++i) {
      const BBox& wb = e.words[i].box;
      if (!allowed.contains(wb)) {
        emit(Rule::word_outside_entity, {e.id},
             "word " + std::to_string(i) + " box " + detail::box_str(wb) +
                 " outside entity box " + detail::box_str(e.box),
             wb);
      }
    }

    if (e.words.empty()) {
      emit(Rule::empty_entity, {e.id},
           "entity " + std::to_string(e.id) + " has no words", e.box);
    }
  }

  const RelationGraph graph =
      build_graph(form, {.skip_dangling = true, .skip_self_links = true});

  for (const auto& cycle : graph.cycles()) {
    std::string ids;
    for (int id : cycle) ids += (ids.empty() ? "" : ",") + std::to_string(id);
    emit(Rule::relation_cycle, cycle, "relation cycle over {" + ids + "}");
  }

  for (const auto& e : form.entities) {
    const auto& preds = graph.predecessors(e.id);
    const auto& succ = graph.successors(e.id);
    if (e.label == EntityLabel::header && !preds.empty()) {
      std::vector<int> ids{e.id};
      ids.insert(ids.end(), preds.begin(), preds.end());
      emit(Rule::header_in_chain, ids,
           "header " + std::to_string(e.id) + " has " +
               std::to_string(preds.size()) + " incoming link(s)",
           e.box);
    }
    if (e.label == EntityLabel::answer) {
      std::vector<int> targets;
      for (int t : succ) {
        const auto label = form.find(t)->label;
        if (label == EntityLabel::answer || label == EntityLabel::question) {
          targets.push_back(t);
        }
      }
      if (!targets.empty()) {
        std::vector<int> ids{e.id};
        ids.insert(ids.end(), targets.begin(), targets.end());
        emit(Rule::answer_with_outgoing, ids,
             "answer " + std::to_string(e.id) + " links onward to " +
                 std::to_string(targets.size()) + " key/value entit" +
                 (targets.size() == 1 ? "y" : "ies"),
             e.box);
      }
    }
    if ((e.label == EntityLabel::question || e.label == EntityLabel::answer) &&
        preds.empty() && succ.empty()) {
      emit(Rule::isolated_key_or_value, {e.id},
           std::string(to_string(e.label)) + " " + std::to_string(e.id) +
               " has no links",
           e.box);
    }
  }

  report.sort_form_order();
  return report;
}

// Per-form reports concatenated in source_id order.
inline LintReport lint_dataset(const std::vector<Form>& forms,
                               const LintOptions& opts = {}) {
  std::vector<const Form*> order;
  for (const auto& f : forms) order.push_back(&f);
  std::stable_sort(order.begin(), order.end(), [](const Form* a, const Form* b) {
    return a->source_id < b->source_id;
  });
  LintReport report;
  for (const Form* f : order) report.append(lint_form(*f, opts));
  return report;
}

inline std::string join_ids(const std::vector<int>& ids) {
  std::string s;
  for (int id : ids) s += (s.empty() ? "" : ",") + std::to_string(id);
  return s;
}

// One JSON object per line: source_id, rule, severity, entity_ids, message.
inline std::string format_records(const LintReport& report) {
  std::string out;
  for (const auto& f : report.findings()) {
    nlohmann::json j{{"source_id", f.source_id},
                     {"rule", std::string(rule_info(f.rule).code)},
                     {"severity", std::string(to_string(f.severity()))},
                     {"entity_ids", f.entity_ids},
                     {"message", f.message}};
    if (f.locus) {
      j["bbox"] = {f.locus->left, f.locus->top, f.locus->right,
                   f.locus->bottom};
    }
    out += j.dump() + "\n";
  }
  return out;
}

inline std::string format_table(const LintReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "source_id" << std::setw(5) << "rule"
     << std::setw(9) << "severity" << std::setw(14) << "entities"
     << "message\n";
  for (const auto& f : report.findings()) {
    os << std::setw(14) << f.source_id << std::setw(5)
       << rule_info(f.rule).code << std::setw(9) << to_string(f.severity())
       << std::setw(14) << join_ids(f.entity_ids) << f.message << '\n';
  }
  os << "\nsummary:";
  for (const auto& info : kLintRules) {
    os << ' ' << info.code << '=' << report.count(info.rule);
  }
  os << "  errors=" << report.count(Severity::error)
     << " warnings=" << report.count(Severity::warning) << '\n';
  return os.str();
}

}  // namespace funsdkit

// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

// funsdkit: stats | validate | revise | rasterize | evaluate | pair | render
//           | split | checksum
//
// Exit codes: 0 success, 1 domain findings or per-form failures,
// 2 environment or usage errors.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>

#include "funsdkit/funsdkit.hpp"

namespace fs = std::filesystem;
using namespace funsdkit;

namespace {

constexpr int kOk = 0;
constexpr int kFindings = 1;
constexpr int kUsage = 2;

struct Common {
  std::string root;
  std::string split = "training";
  std::string out;
  std::string page_size;
};

Split parse_split(const std::string& s) {
  if (s == "training" || s == "train") return Split::train;
  if (s == "testing" || s == "test") return Split::test;
  throw Error("unknown split \"" + s + "\" (expected training or testing)");
}

std::optional<PageSize> parse_page_size(const std::string& s) {
  if (s.empty()) return std::nullopt;
  PageSize p;
  char x = 0;
  std::istringstream is(s);
  if (!(is >> p.width >> x >> p.height) || x != 'x' || p.width <= 0 ||
      p.height <= 0) {
    throw Error("--page-size must look like 754x1000");
  }
  return p;
}

void require_root(const std::string& root) {
  if (root.empty() || !fs::is_directory(root)) {
    throw IoError("dataset root not found", root);
  }
}

fs::path prepare_out(const std::string& out) {
  if (out.empty()) throw Error("--out is required");
  fs::create_directories(out);
  return out;
}

std::vector<Form> load(const Common& c) {
  require_root(c.root);
  return load_split(c.root, parse_split(c.split), parse_page_size(c.page_size));
}

// Mask files in a directory keyed by source id: <id>_target.png or <id>.png.
std::map<std::string, fs::path> collect_masks(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("mask directory not found", dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_regular_file() || !ends_with(name, ".png")) continue;
    std::string stem = entry.path().stem().string();
    bool skip = false;
    for (std::string_view suffix : {"_text", "_gray", "_overlay", "_diff"}) {
      if (ends_with(stem, suffix)) skip = true;
    }
    if (skip) continue;
    if (ends_with(stem, "_target")) stem.resize(stem.size() - 7);
    out[stem] = entry.path();
  }
  return out;
}

void print_stats_row(std::ostream& os, const char* name, const SplitStats& s) {
  os << std::left << std::setw(10) << name << std::right << std::setw(7)
     << s.forms << std::setw(8) << s.words << std::setw(10) << s.entities
     << std::setw(11) << s.relations;
  for (auto label : kAllLabels) os << std::setw(10) << s.count(label);
  os << '\n';
}

int cmd_stats(const Common& c) {
  require_root(c.root);
  const auto page = parse_page_size(c.page_size);
  std::vector<Form> forms;
  std::vector<Split> splits;
  if (c.split.empty() || c.split == "all") {
    splits = {Split::train, Split::test};
  } else {
    splits = {parse_split(c.split)};
  }
  for (Split s : splits) {
    auto part = load_split(c.root, s, page);
    forms.insert(forms.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
  }
  const DatasetStats stats = compute_stats(forms);

  std::cout << std::left << std::setw(10) << "split" << std::right
            << std::setw(7) << "forms" << std::setw(8) << "words"
            << std::setw(10) << "entities" << std::setw(11) << "relations";
  for (auto label : kAllLabels) std::cout << std::setw(10) << to_string(label);
  std::cout << '\n';
  for (Split s : splits) {
    print_stats_row(std::cout, s == Split::train ? "training" : "testing",
                    stats.of(s));
  }

  if (!c.out.empty()) {
    nlohmann::json j;
    for (Split s : splits) {
      const auto& st = stats.of(s);
      auto& row = j[std::string(s == Split::train ? "training" : "testing")];
      row = {{"forms", st.forms},
             {"words", st.words},
             {"entities", st.entities},
             {"relations", st.relations}};
      for (auto label : kAllLabels) {
        row["labels"][std::string(to_string(label))] = st.count(label);
      }
    }
    write_file(prepare_out(c.out) / "stats.json", j.dump(2) + "\n");
  }
  return kOk;
}

int cmd_validate(const Common& c, int tolerance, bool strict) {
  const auto forms = load(c);
  const LintReport report = lint_dataset(forms, {.word_tolerance = tolerance});
  std::cout << format_table(report);
  if (!c.out.empty()) {
    write_file(prepare_out(c.out) / "lint.jsonl", format_records(report));
  }
  if (report.count(Severity::error) > 0) return kFindings;
  if (strict && report.count(Severity::warning) > 0) return kFindings;
  return kOk;
}

int cmd_revise(const Common& c, const std::string& patches_dir) {
  const Split split = parse_split(c.split);
  const auto forms = load(c);
  const fs::path patch_src =
      patches_dir.empty() ? annotations_dir(c.root, split) : fs::path(patches_dir);
  const auto patches = load_patches(patch_src);

  const RevisionResult result = revise_dataset(forms, patches);

  const fs::path out = prepare_out(c.out);
  const fs::path ann_out = annotations_dir(out, split);
  const fs::path img_out = images_dir(out, split);
  const fs::path diff_out = out / split_dir_name(split) / "diffs";
  fs::create_directories(ann_out);
  fs::create_directories(img_out);
  fs::create_directories(diff_out);

  std::size_t edge_edits = 0;
  for (std::size_t i = 0; i < result.forms.size(); ++i) {
    const Form& f = result.forms[i];
    const RevisionDiff& d = result.diffs[i];
    write_file(ann_out / (f.source_id + ".json"), serialize_form(f));
    write_file(diff_out / (f.source_id + std::string(kDiffSuffix)),
               serialize_diff(d));
    const fs::path img = images_dir(c.root, split) / (f.source_id + ".png");
    if (fs::exists(img)) {
      fs::copy_file(img, img_out / img.filename(),
                    fs::copy_options::overwrite_existing);
    }
    edge_edits += d.edges_added.size() + d.edges_removed.size();
    if (!d.labels.empty()) {
      std::cout << f.source_id << ':';
      for (const auto& ch : d.labels) {
        std::cout << ' ' << ch.id << '(' << to_string(ch.before) << "->"
                  << to_string(ch.after) << ')';
      }
      std::cout << '\n';
    }
  }
  for (const auto& [id, _] : patches) {
    const bool known = std::any_of(forms.begin(), forms.end(),
                                   [&](const Form& f) { return f.source_id == id; });
    if (!known) std::cerr << "warning: patch for unknown form " << id << '\n';
  }
  for (const auto& fail : result.failures) {
    std::cout << "FAILED " << fail.source_id << ": " << fail.message << '\n';
  }
  std::cout << result.forms.size() << " forms revised, "
            << result.labels_changed() << " labels changed, " << edge_edits
            << " edges edited, " << result.failures.size() << " failed\n";
  return result.failures.empty() ? kOk : kFindings;
}

int cmd_rasterize(const Common& c, bool pad16) {
  const Split split = parse_split(c.split);
  const auto forms = load(c);
  const fs::path out = prepare_out(c.out);
  std::vector<ManifestEntry> manifest;
  std::size_t clamped = 0;
  for (const auto& f : forms) {
    const PageImage page =
        read_png(images_dir(c.root, split) / (f.source_id + ".png"));
    RasterStats rs;
    rasterize_target(f, &rs);
    clamped += rs.clamped;
    manifest.push_back(export_pair(f, page, out, pad16));
  }
  write_manifest(out / "manifest.tsv", manifest);
  if (clamped) std::cerr << "warning: " << clamped << " boxes clamped to page\n";
  std::cout << manifest.size() << " manifest entries written to "
            << (out / "manifest.tsv").string() << '\n';
  return kOk;
}

int cmd_evaluate(const std::string& pred_dir, const std::string& truth_dir,
                 bool include_background, const std::string& out) {
  std::map<std::string, ClassMask> preds, truths;
  for (const auto& [id, path] : collect_masks(pred_dir)) {
    preds.emplace(id, read_class_mask(path));
  }
  for (const auto& [id, path] : collect_masks(truth_dir)) {
    truths.emplace(id, read_class_mask(path));
  }
  const MetricReport report = evaluate_dataset(preds, truths);
  std::cout << format_report(report);
  std::cout << "score ("
            << (include_background ? "Mean IoU" : "Mean IoU (without background)")
            << "): " << std::fixed << std::setprecision(6)
            << (include_background ? report.miou : report.miou_no_background)
            << '\n';
  if (!out.empty()) {
    write_file(prepare_out(out) / "metrics.jsonl", format_report_json(report));
  }
  return kOk;
}

int cmd_pair(const std::string& mask_dir, const Common& c, std::size_t min_area) {
  std::map<std::string, Form> truth;
  if (!c.root.empty()) {
    for (auto& f : load(c)) truth.emplace(f.source_id, std::move(f));
  }
  std::string records;
  std::size_t pairs = 0, unmatched = 0, hits = 0;
  for (const auto& [id, path] : collect_masks(mask_dir)) {
    const ClassMask mask = read_class_mask(path);
    const auto comps = extract_components(mask, {.min_area = min_area});
    const PairingResult res = pair_nearest(comps);
    auto it = truth.find(id);
    const auto rows =
        pairs_to_report(id, res.pairs, it == truth.end() ? nullptr : &it->second);
    for (const auto& r : rows) hits += r.hit.value_or(false) ? 1 : 0;
    records += format_pair_records(rows);
    pairs += res.pairs.size();
    unmatched += res.unmatched_values.size();
  }
  std::cout << records;
  std::cerr << pairs << " pairs, " << unmatched << " unmatched values";
  if (!truth.empty()) std::cerr << ", " << hits << " hits";
  std::cerr << '\n';
  if (!c.out.empty()) write_file(prepare_out(c.out) / "pairs.jsonl", records);
  return kOk;
}

int cmd_render(const Common& c, const std::string& revised, int line_width,
               bool arrows) {
  const Split split = parse_split(c.split);
  const auto forms = load(c);
  const fs::path out = prepare_out(c.out);
  RenderStyle style;
  style.line_width = line_width;
  style.arrows = arrows;

  std::map<std::string, Form> after;
  if (!revised.empty()) {
    require_root(revised);
    for (auto& f : load_split(revised, split, parse_page_size(c.page_size))) {
      after.emplace(f.source_id, std::move(f));
    }
  }
  std::size_t written = 0;
  for (const auto& f : forms) {
    const PageImage page =
        read_png(images_dir(c.root, split) / (f.source_id + ".png"));
    write_png(out / (f.source_id + "_overlay.png"), render_overlay(f, page, style));
    ++written;
    if (auto it = after.find(f.source_id); it != after.end()) {
      write_png(out / (f.source_id + "_diff.png"),
                render_diff(f, it->second, page, style));
      ++written;
    }
  }
  std::cout << written << " images written to " << out.string() << '\n';
  return kOk;
}

int cmd_split(const Common& c, std::uint32_t seed, std::size_t train_count) {
  require_root(c.root);
  std::vector<std::string> ids;
  for (const auto& p : list_annotations(annotations_dir(c.root, Split::train))) {
    ids.push_back(p.stem().string());
  }
  const SplitManifest m = make_split(ids, train_count, seed);
  write_file(prepare_out(c.out) / "split.tsv", format_split(m));
  std::cout << m.train.size() << " train / " << m.validation.size()
            << " validation (seed " << seed << ")\n";
  return kOk;
}

std::string sha256_hex(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open", path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (is.read(buf.data(), static_cast<std::streamsize>(buf.size())) ||
         is.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return os.str();
}

int cmd_checksum(const std::string& file, std::string expected) {
  const std::string actual = sha256_hex(file);
  std::cout << actual << "  " << file << '\n';
  if (expected.empty()) return kOk;
  std::transform(expected.begin(), expected.end(), expected.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (actual != expected) {
    std::cerr << "checksum mismatch: expected " << expected << '\n';
    return kFindings;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FUNSD annotation toolkit"};
  app.require_subcommand(1);

  Common common;
  auto add_root = [&](CLI::App* sub, bool split_default_all = false) {
    sub->add_option("--root", common.root, "dataset root (FUNSD layout)");
    sub->add_option("--split", common.split,
                    split_default_all ? "training, testing (default: both)"
                                      : "training or testing");
    sub->add_option("--page-size", common.page_size,
                    "WxH override when page images are absent");
  };

  auto* stats = app.add_subcommand("stats", "dataset counts per split");
  add_root(stats, true);
  stats->add_option("--out", common.out, "also write stats.json here");

  int tolerance = 3;
  bool strict = false;
  auto* validate = app.add_subcommand("validate", "lint annotations");
  add_root(validate);
  validate->add_option("--out", common.out, "write lint.jsonl here");
  validate->add_option("--tolerance", tolerance, "word-in-entity tolerance (px)");
  validate->add_flag("--strict", strict, "warnings also fail");

  std::string patches;
  auto* revise = app.add_subcommand("revise", "normalize relation labels");
  add_root(revise);
  revise->add_option("--out", common.out, "output dataset root")->required();
  revise->add_option("--patches", patches,
                     "directory of <id>.patch.json (default: annotations dir)");

  bool pad16 = true;
  auto* rasterize = app.add_subcommand("rasterize", "export inputs and targets");
  add_root(rasterize);
  rasterize->add_option("--out", common.out, "output directory")->required();
  rasterize->add_flag("--pad16,!--no-pad16", pad16, "pad to multiples of 16");

  std::string pred_dir, truth_dir;
  bool no_background = false;
  auto* evaluate = app.add_subcommand("evaluate", "IoU metrics for predicted masks");
  evaluate->add_option("--pred", pred_dir, "predicted class masks")->required();
  evaluate->add_option("--truth", truth_dir, "target class masks")->required();
  evaluate->add_flag("--no-background", no_background,
                     "score by mean IoU without background");
  evaluate->add_option("--out", common.out, "write metrics.jsonl here");

  std::string mask_dir;
  std::size_t min_area = 4;
  auto* pair = app.add_subcommand("pair", "pair key/value components");
  pair->add_option("--masks", mask_dir, "class masks to pair")->required();
  add_root(pair);
  pair->add_option("--min-area", min_area, "drop smaller components (px)");
  pair->add_option("--out", common.out, "write pairs.jsonl here");

  std::string revised;
  int line_width = 2;
  bool arrows = true;
  auto* render = app.add_subcommand("render", "annotation overlays");
  add_root(render);
  render->add_option("--out", common.out, "output directory")->required();
  render->add_option("--revised", revised, "revised dataset root for diff images");
  render->add_option("--line-width", line_width, "outline width (px)");
  render->add_flag("--arrows,!--no-arrows", arrows, "arrowheads on links");

  std::uint32_t seed = 42;
  std::size_t train_count = 99;
  auto* split = app.add_subcommand("split", "seeded train/validation manifest");
  split->add_option("--root", common.root, "dataset root")->required();
  split->add_option("--out", common.out, "write split.tsv here")->required();
  split->add_option("--seed", seed, "shuffle seed");
  split->add_option("--train-count", train_count, "forms in the train subset");

  std::string file, expected;
  auto* checksum = app.add_subcommand("checksum", "SHA-256 of a dataset archive");
  checksum->add_option("--file", file, "archive path")->required();
  checksum->add_option("--sha256", expected, "expected digest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*stats) {
      if (stats->count("--split") == 0) common.split.clear();
      return cmd_stats(common);
    }
    if (*validate) return cmd_validate(common, tolerance, strict);
    if (*revise) return cmd_revise(common, patches);
    if (*rasterize) return cmd_rasterize(common, pad16);
    if (*evaluate) return cmd_evaluate(pred_dir, truth_dir, !no_background, common.out);
    if (*pair) return cmd_pair(mask_dir, common, min_area);
    if (*render) return cmd_render(common, revised, line_width, arrows);
    if (*split) return cmd_split(common, seed, train_count);
    if (*checksum) return cmd_checksum(file, expected);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

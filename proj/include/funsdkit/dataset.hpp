// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

// FUNSD directory layout:
//   <root>/{training_data,testing_data}/{annotations,images}/
// with <source_id>.json annotations, <source_id>.png pages and optional
// <source_id>.patch.json reviewer patches beside the annotations.

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "funsdkit/annotation.hpp"
#include "funsdkit/error.hpp"
#include "funsdkit/image.hpp"
#include "funsdkit/revise.hpp"

namespace funsdkit {

namespace fs = std::filesystem;

inline constexpr std::string_view kPatchSuffix = ".patch.json";
inline constexpr std::string_view kDiffSuffix = ".diff.json";

inline fs::path annotations_dir(const fs::path& root, Split s) {
  return root / split_dir_name(s) / "annotations";
}
inline fs::path images_dir(const fs::path& root, Split s) {
  return root / split_dir_name(s) / "images";
}

inline std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open", path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, std::string_view data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write", path.string());
  os.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!os) throw IoError("write failed", path.string());
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

// Annotation files (*.json, excluding patches and diffs) sorted by name.
inline std::vector<fs::path> list_annotations(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (!ends_with(name, ".json") || ends_with(name, kPatchSuffix) ||
        ends_with(name, kDiffSuffix)) {
      continue;
    }
    out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline Form load_form(const fs::path& annotation, const fs::path& image,
                      Split split, std::optional<PageSize> page_override = {}) {
  const std::string source_id = annotation.stem().string();
  const PageSize page = page_override ? *page_override : read_png_size(image);
  const std::string raw = read_file(annotation);
  try {
    return parse_form(raw, source_id, page, split);
  } catch (const ParseError& e) {
    throw ParseError(annotation.string() + ": " + e.what(), e.offset());
  } catch (const SchemaError& e) {
    throw SchemaError(annotation.string() + ": " + e.what(), e.entity_id());
  }
}

// Loads every form of one split. A missing split directory yields no forms.
// Without `page_override`, each form's page size is read from its image.
inline std::vector<Form> load_split(const fs::path& root, Split split,
                                    std::optional<PageSize> page_override = {}) {
  std::vector<Form> forms;
  for (const auto& ann : list_annotations(annotations_dir(root, split))) {
    const fs::path image = images_dir(root, split) / (ann.stem().string() + ".png");
    forms.push_back(load_form(ann, image, split, page_override));
  }
  return forms;
}

// Reads <source_id>.patch.json files from `dir`.
inline std::map<std::string, Patch> load_patches(const fs::path& dir) {
  std::map<std::string, Patch> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_regular_file() || !ends_with(name, kPatchSuffix)) continue;
    const std::string id = name.substr(0, name.size() - kPatchSuffix.size());
    try {
      out.emplace(id, parse_patch(read_file(entry.path()), id));
    } catch (const ParseError& e) {
      throw ParseError(entry.path().string() + ": " + e.what(), e.offset());
    } catch (const SchemaError& e) {
      throw SchemaError(entry.path().string() + ": " + e.what(), e.entity_id());
    }
  }
  return out;
}

}  // namespace funsdkit

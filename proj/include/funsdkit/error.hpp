// Copyright 2026 The funsdkit Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace funsdkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed annotation text. `offset` is the byte position reported by the
// JSON reader.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Well-formed text that violates the annotation schema.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what,
                       std::optional<int> entity_id = std::nullopt)
      : Error(what), entity_id_(entity_id) {}
  std::optional<int> entity_id() const noexcept { return entity_id_; }

 private:
  std::optional<int> entity_id_;
};

// Relation-graph failures: dangling references, cycles, unknown patch ids.
class GraphError : public Error {
 public:
  GraphError(const std::string& what, std::vector<int> ids)
      : Error(what), ids_(std::move(ids)) {}
  const std::vector<int>& ids() const noexcept { return ids_; }

 private:
  std::vector<int> ids_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace funsdkit

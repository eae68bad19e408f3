// Copyright 2026 The GCA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gca/matrix.hpp"

namespace gca {

/// Ordered collection of named tensors backed by one contiguous buffer.
///
/// The flat view is the concatenation of the tensors in insertion order,
/// each row-major. Optimizers work on the flat view; models read tensors
/// by name.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    std::size_t rows;
    std::size_t cols;
    std::size_t offset;
  };

  /// Appends a tensor. Names must be unique.
  void add(std::string name, const Matrix& value);

  bool contains(std::string_view name) const;
  const Entry& entry(std::string_view name) const;
  const std::vector<Entry>& entries() const { return entries_; }

  /// Copy of the named tensor.
  Matrix get(std::string_view name) const;
  void set(std::string_view name, const Matrix& value);

  std::span<const double> view(std::string_view name) const;

  std::span<double> flat() { return flat_; }
  std::span<const double> flat() const { return flat_; }
  std::size_t size() const { return flat_.size(); }

  /// Flat copy of all parameters.
  std::vector<double> pack() const { return flat_; }

  /// Same layout as this store with values taken from `flat`.
  ParamStore unpack(std::span<const double> flat) const;

  /// Appends every tensor of `other` (names must not collide).
  void append(const ParamStore& other);

  /// Sub-store containing the tensors whose names start with `prefix`.
  ParamStore subset(std::string_view prefix) const;

  friend bool operator==(const ParamStore& a, const ParamStore& b);

 private:
  std::vector<Entry> entries_;
  std::vector<double> flat_;
};

}  // namespace gca

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

#include "gca/params.hpp"

#include <algorithm>
#include <cstring>

#include "gca/error.hpp"

namespace gca {

void ParamStore::add(std::string name, const Matrix& value) {
  if (contains(name)) throw ConfigError("duplicate parameter name: " + name);
  entries_.push_back({std::move(name), value.rows(), value.cols(), flat_.size()});
  flat_.insert(flat_.end(), value.data().begin(), value.data().end());
}

bool ParamStore::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.name == name; });
}

const ParamStore::Entry& ParamStore::entry(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e;
  }
  throw ShapeError("unknown parameter: " + std::string(name));
}

Matrix ParamStore::get(std::string_view name) const {
  const Entry& e = entry(name);
  auto first = flat_.begin() + static_cast<std::ptrdiff_t>(e.offset);
  return Matrix(e.rows, e.cols, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(e.rows * e.cols)));
}

void ParamStore::set(std::string_view name, const Matrix& value) {
  const Entry& e = entry(name);
  if (value.rows() != e.rows || value.cols() != e.cols) {
    throw ShapeError("parameter " + e.name + " expects " + std::to_string(e.rows) + "x" +
                     std::to_string(e.cols) + ", got " + shape_string(value));
  }
  std::copy(value.data().begin(), value.data().end(), flat_.begin() + static_cast<std::ptrdiff_t>(e.offset));
}

std::span<const double> ParamStore::view(std::string_view name) const {
  const Entry& e = entry(name);
  return std::span<const double>(flat_).subspan(e.offset, e.rows * e.cols);
}

ParamStore ParamStore::unpack(std::span<const double> flat) const {
  if (flat.size() != flat_.size()) {
    throw ShapeError("unpack: expected " + std::to_string(flat_.size()) + " values, got " +
                     std::to_string(flat.size()));
  }
  ParamStore out;
  out.entries_ = entries_;
  out.flat_.assign(flat.begin(), flat.end());
  return out;
}

void ParamStore::append(const ParamStore& other) {
  for (const auto& e : other.entries_) add(e.name, other.get(e.name));
}

ParamStore ParamStore::subset(std::string_view prefix) const {
  ParamStore out;
  for (const auto& e : entries_) {
    if (std::string_view(e.name).starts_with(prefix)) out.add(e.name, get(e.name));
  }
  return out;
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  if (a.entries_.size() != b.entries_.size() || a.flat_.size() != b.flat_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const auto& x = a.entries_[i];
    const auto& y = b.entries_[i];
    if (x.name != y.name || x.rows != y.rows || x.cols != y.cols) return false;
  }
  if (a.flat_.empty()) return true;
  // Bitwise comparison so that -0.0 and NaN payloads count as differences.
  return std::memcmp(a.flat_.data(), b.flat_.data(), a.flat_.size() * sizeof(double)) == 0;
}

}  // namespace gca

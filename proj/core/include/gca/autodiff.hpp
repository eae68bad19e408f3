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

// Reverse-mode differentiation over a fixed set of dense primitives.
//
// A Tape records every operation in evaluation order together with a
// closure that propagates the output gradient to the inputs. There is no
// graph optimization: the tape is built, run backward once, and discarded.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gca/matrix.hpp"
#include "gca/params.hpp"

namespace gca::ad {

struct Var {
  std::size_t id = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  /// Differentiable input. Its gradient is available after backward().
  Var leaf(Matrix value, std::string name);

  /// Non-differentiable input; no gradient flows into it.
  Var constant(Matrix value, std::string name = "const");

  /// Records an operation. Throws NumericError naming the node when the
  /// value contains a non-finite entry.
  Var push(Matrix value, std::string name, std::vector<Var> inputs, Backward backward);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const;
  const std::string& name(Var v) const { return nodes_[v.id].name; }
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
  std::span<const Var> inputs(std::size_t id) const { return nodes_[id].inputs; }

  /// Gradient of the last backward() root with respect to `v`. A zero
  /// matrix of the right shape when nothing flowed into it.
  Matrix grad(Var v) const;

  /// Gradient accumulator of `v`, zero-initialized on first access.
  Matrix& grad_buffer(Var v);

  /// Runs reverse accumulation from a 1 x 1 root.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::string name;
    std::vector<Var> inputs;
    Backward backward;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
};

// Primitives. Shapes are checked and mismatches throw ShapeError.

/// x * w + b with b a 1 x out row broadcast over rows.
Var affine(Tape& t, Var x, Var w, Var b);
Var relu(Tape& t, Var x);
Var leaky_relu(Tape& t, Var x, double slope);
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double c);
Var exp(Tape& t, Var a);
Var log(Tape& t, Var a);
/// Sum of all entries, 1 x 1.
Var sum(Tape& t, Var a);
/// Mean of all entries, 1 x 1.
Var mean(Tape& t, Var a);
/// Per-row sums, n x 1.
Var row_sum(Tape& t, Var a);
/// log(mean(exp(a))) over all entries with max subtraction, 1 x 1.
Var log_mean_exp(Tape& t, Var a);
Var gather_rows(Tape& t, Var src, std::vector<std::size_t> idx);
Var slice_rows(Tape& t, Var src, std::size_t begin, std::size_t end);

/// Binds every tensor of a ParamStore to a leaf on a tape.
class ParamVars {
 public:
  ParamVars(Tape& tape, const ParamStore& params);
  Var operator[](std::string_view name) const;
  const ParamStore& store() const { return *params_; }
  std::span<const Var> vars() const { return vars_; }

 private:
  const ParamStore* params_;
  std::vector<Var> vars_;
};

/// A scalar function of parameters, expressed on a tape.
using Objective = std::function<Var(Tape&, const ParamVars&)>;

struct ValueAndGrad {
  double value = 0.0;
  std::vector<double> grad;  // same layout as ParamStore::flat()
};

ValueAndGrad value_and_grad(const Objective& objective, const ParamStore& params);

/// d objective / d theta in the flat layout of `params`.
std::vector<double> grad_of_scalar(const Objective& objective, const ParamStore& params);

/// Forward evaluation only.
double evaluate(const Objective& objective, const ParamStore& params);

}  // namespace gca::ad

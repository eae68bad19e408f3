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

#include "gca/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "gca/error.hpp"

namespace gca::ad {

namespace {

void require_same_shape(const Tape& t, Var a, Var b, const char* op) {
  const Matrix& x = t.value(a);
  const Matrix& y = t.value(b);
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw ShapeError(std::string(op) + ": '" + t.name(a) + "' is " + shape_string(x) + " but '" +
                     t.name(b) + "' is " + shape_string(y));
  }
}

std::string label(const char* op, const Tape& t, Var a) {
  return std::string(op) + "(" + t.name(a) + ")";
}

}  // namespace

Var Tape::leaf(Matrix value, std::string name) {
  if (!value.all_finite()) throw NumericError("non-finite value in '" + name + "'");
  Node n;
  n.value = std::move(value);
  n.name = std::move(name);
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Matrix value, std::string name) {
  if (!value.all_finite()) throw NumericError("non-finite value in '" + name + "'");
  Node n;
  n.value = std::move(value);
  n.name = std::move(name);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::push(Matrix value, std::string name, std::vector<Var> inputs, Backward backward) {
  if (!value.all_finite()) throw NumericError("non-finite value in '" + name + "'");
  Node n;
  n.value = std::move(value);
  n.name = std::move(name);
  n.needs_grad = std::any_of(inputs.begin(), inputs.end(),
                             [&](Var v) { return nodes_[v.id].needs_grad; });
  n.inputs = std::move(inputs);
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.size() != 1) throw ShapeError("'" + name(v) + "' is " + shape_string(m) + ", not a scalar");
  return m(0, 0);
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.empty()) return Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

Matrix& Tape::grad_buffer(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.size() != n.value.size()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var root) {
  if (value(root).size() != 1) {
    throw ShapeError("backward: root '" + name(root) + "' is " + shape_string(value(root)));
  }
  for (auto& n : nodes_) n.grad = Matrix();
  grad_buffer(root)(0, 0) = 1.0;
  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.empty() || !n.backward) continue;
    if (!n.grad.all_finite()) throw NumericError("non-finite gradient in '" + n.name + "'");
    n.backward(*this, id);
  }
  for (const auto& n : nodes_) {
    if (n.needs_grad && !n.grad.empty() && !n.grad.all_finite()) {
      throw NumericError("non-finite gradient in '" + n.name + "'");
    }
  }
}

Var affine(Tape& t, Var x, Var w, Var b) {
  Matrix y = gca::affine(t.value(x), t.value(w), t.value(b));
  return t.push(std::move(y), "affine(" + t.name(w) + ")", {x, w, b}, [x, w, b](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad_buffer(Var{self});
    if (tp.needs_grad(w)) accumulate_transpose_a(tp.value(x), g, tp.grad_buffer(w));
    if (tp.needs_grad(b)) {
      Matrix& gb = tp.grad_buffer(b);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
      }
    }
    if (tp.needs_grad(x)) {
      Matrix dx = matmul_transpose_b(g, tp.value(w));
      Matrix& gx = tp.grad_buffer(x);
      for (std::size_t i = 0; i < dx.size(); ++i) gx.data()[i] += dx.data()[i];
    }
  });
}

Var leaky_relu(Tape& t, Var x, double slope) {
  if (!(slope >= 0.0 && slope < 1.0)) throw ConfigError("leaky_relu slope must be in [0, 1)");
  Matrix y = t.value(x);
  for (double& v : y.data()) v = v > 0.0 ? v : (slope == 0.0 ? 0.0 : slope * v);
  return t.push(std::move(y), label(slope == 0.0 ? "relu" : "leaky_relu", t, x), {x},
                [x, slope](Tape& tp, std::size_t self) {
                  const Matrix& g = tp.grad_buffer(Var{self});
                  const Matrix& in = tp.value(x);
                  Matrix& gx = tp.grad_buffer(x);
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    gx.data()[i] += in.data()[i] > 0.0 ? g.data()[i] : slope * g.data()[i];
                  }
                });
}

Var relu(Tape& t, Var x) { return leaky_relu(t, x, 0.0); }

Var add(Tape& t, Var a, Var b) {
  require_same_shape(t, a, b, "add");
  Matrix y = t.value(a);
  const Matrix& bv = t.value(b);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += bv.data()[i];
  return t.push(std::move(y), "add(" + t.name(a) + "," + t.name(b) + ")", {a, b},
                [a, b](Tape& tp, std::size_t self) {
                  const Matrix& g = tp.grad_buffer(Var{self});
                  for (Var v : {a, b}) {
                    if (!tp.needs_grad(v)) continue;
                    Matrix& gv = tp.grad_buffer(v);
                    for (std::size_t i = 0; i < g.size(); ++i) gv.data()[i] += g.data()[i];
                  }
                });
}

Var sub(Tape& t, Var a, Var b) {
  require_same_shape(t, a, b, "sub");
  Matrix y = t.value(a);
  const Matrix& bv = t.value(b);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] -= bv.data()[i];
  return t.push(std::move(y), "sub(" + t.name(a) + "," + t.name(b) + ")", {a, b},
                [a, b](Tape& tp, std::size_t self) {
                  const Matrix& g = tp.grad_buffer(Var{self});
                  if (tp.needs_grad(a)) {
                    Matrix& ga = tp.grad_buffer(a);
                    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i];
                  }
                  if (tp.needs_grad(b)) {
                    Matrix& gb = tp.grad_buffer(b);
                    for (std::size_t i = 0; i < g.size(); ++i) gb.data()[i] -= g.data()[i];
                  }
                });
}

Var mul(Tape& t, Var a, Var b) {
  require_same_shape(t, a, b, "mul");
  Matrix y = t.value(a);
  const Matrix& bv = t.value(b);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= bv.data()[i];
  return t.push(std::move(y), "mul(" + t.name(a) + "," + t.name(b) + ")", {a, b},
                [a, b](Tape& tp, std::size_t self) {
                  const Matrix& g = tp.grad_buffer(Var{self});
                  if (tp.needs_grad(a)) {
                    const Matrix& bv2 = tp.value(b);
                    Matrix& ga = tp.grad_buffer(a);
                    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * bv2.data()[i];
                  }
                  if (tp.needs_grad(b)) {
                    const Matrix& av = tp.value(a);
                    Matrix& gb = tp.grad_buffer(b);
                    for (std::size_t i = 0; i < g.size(); ++i) gb.data()[i] += g.data()[i] * av.data()[i];
                  }
                });
}

Var scale(Tape& t, Var a, double c) {
  Matrix y = t.value(a);
  for (double& v : y.data()) v *= c;
  return t.push(std::move(y), label("scale", t, a), {a}, [a, c](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad_buffer(Var{self});
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += c * g.data()[i];
  });
}

Var exp(Tape& t, Var a) {
  Matrix y = t.value(a);
  for (double& v : y.data()) v = std::exp(v);
  return t.push(std::move(y), label("exp", t, a), {a}, [a](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad_buffer(Var{self});
    const Matrix& out = tp.value(Var{self});
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * out.data()[i];
  });
}

Var log(Tape& t, Var a) {
  Matrix y = t.value(a);
  for (double& v : y.data()) v = std::log(v);
  return t.push(std::move(y), label("log", t, a), {a}, [a](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad_buffer(Var{self});
    const Matrix& in = tp.value(a);
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] / in.data()[i];
  });
}

Var sum(Tape& t, Var a) {
  double s = 0.0;
  for (double v : t.value(a).data()) s += v;
  return t.push(Matrix::scalar(s), label("sum", t, a), {a}, [a](Tape& tp, std::size_t self) {
    const double g = tp.grad_buffer(Var{self})(0, 0);
    for (double& v : tp.grad_buffer(a).data()) v += g;
  });
}

Var mean(Tape& t, Var a) {
  const Matrix& av = t.value(a);
  if (av.empty()) throw ShapeError("mean of empty tensor '" + t.name(a) + "'");
  double s = 0.0;
  for (double v : av.data()) s += v;
  const double n = static_cast<double>(av.size());
  return t.push(Matrix::scalar(s / n), label("mean", t, a), {a}, [a, n](Tape& tp, std::size_t self) {
    const double g = tp.grad_buffer(Var{self})(0, 0) / n;
    for (double& v : tp.grad_buffer(a).data()) v += g;
  });
}

Var row_sum(Tape& t, Var a) {
  const Matrix& av = t.value(a);
  Matrix y(av.rows(), 1);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    double s = 0.0;
    for (double v : av.row(r)) s += v;
    y(r, 0) = s;
  }
  return t.push(std::move(y), label("row_sum", t, a), {a}, [a](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad_buffer(Var{self});
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t r = 0; r < ga.rows(); ++r) {
      for (double& v : ga.row(r)) v += g(r, 0);
    }
  });
}

Var log_mean_exp(Tape& t, Var a) {
  const Matrix& av = t.value(a);
  if (av.empty()) throw ShapeError("log_mean_exp of empty tensor '" + t.name(a) + "'");
  const double m = *std::max_element(av.data().begin(), av.data().end());
  double s = 0.0;
  for (double v : av.data()) s += std::exp(v - m);
  const double n = static_cast<double>(av.size());
  const double out = m + std::log(s / n);
  return t.push(Matrix::scalar(out), label("log_mean_exp", t, a), {a}, [a, m, s](Tape& tp, std::size_t self) {
    // d/da_k = exp(a_k - m) / s  (softmax weights)
    const double g = tp.grad_buffer(Var{self})(0, 0);
    const Matrix& in = tp.value(a);
    Matrix& ga = tp.grad_buffer(a);
    for (std::size_t i = 0; i < in.size(); ++i) ga.data()[i] += g * std::exp(in.data()[i] - m) / s;
  });
}

Var gather_rows(Tape& t, Var src, std::vector<std::size_t> idx) {
  Matrix y = gca::gather_rows(t.value(src), idx);
  return t.push(std::move(y), label("gather_rows", t, src), {src},
                [src, idx = std::move(idx)](Tape& tp, std::size_t self) {
                  const Matrix& g = tp.grad_buffer(Var{self});
                  Matrix& gs = tp.grad_buffer(src);
                  for (std::size_t r = 0; r < idx.size(); ++r) {
                    auto dst = gs.row(idx[r]);
                    auto from = g.row(r);
                    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += from[c];
                  }
                });
}

Var slice_rows(Tape& t, Var src, std::size_t begin, std::size_t end) {
  const Matrix& sv = t.value(src);
  if (begin > end || end > sv.rows()) {
    throw ShapeError("slice_rows [" + std::to_string(begin) + "," + std::to_string(end) + ") of '" +
                     t.name(src) + "' " + shape_string(sv));
  }
  const std::size_t cols = sv.cols();
  auto first = sv.data().begin() + static_cast<std::ptrdiff_t>(begin * cols);
  Matrix y(end - begin, cols,
           std::vector<double>(first, first + static_cast<std::ptrdiff_t>((end - begin) * cols)));
  return t.push(std::move(y), label("slice_rows", t, src), {src}, [src, begin](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad_buffer(Var{self});
    Matrix& gs = tp.grad_buffer(src);
    const std::size_t offset = begin * gs.cols();
    for (std::size_t i = 0; i < g.size(); ++i) gs.data()[offset + i] += g.data()[i];
  });
}

ParamVars::ParamVars(Tape& tape, const ParamStore& params) : params_(&params) {
  vars_.reserve(params.entries().size());
  for (const auto& e : params.entries()) vars_.push_back(tape.leaf(params.get(e.name), e.name));
}

Var ParamVars::operator[](std::string_view name) const {
  const auto& entries = params_->entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].name == name) return vars_[i];
  }
  throw ShapeError("objective requested unknown parameter '" + std::string(name) + "'");
}

ValueAndGrad value_and_grad(const Objective& objective, const ParamStore& params) {
  Tape tape;
  ParamVars vars(tape, params);
  Var root = objective(tape, vars);
  ValueAndGrad out;
  out.value = tape.scalar(root);
  tape.backward(root);
  out.grad.reserve(params.size());
  for (Var v : vars.vars()) {
    Matrix g = tape.grad(v);
    out.grad.insert(out.grad.end(), g.data().begin(), g.data().end());
  }
  return out;
}

std::vector<double> grad_of_scalar(const Objective& objective, const ParamStore& params) {
  return value_and_grad(objective, params).grad;
}

double evaluate(const Objective& objective, const ParamStore& params) {
  Tape tape;
  ParamVars vars(tape, params);
  return tape.scalar(objective(tape, vars));
}

}  // namespace gca::ad

// Copyright 2026 The dmmlab Authors.
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

#include "dmm/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace dmm {

void Gradients::accumulate(const Parameter* p, const Matrix& g) {
  auto it = grads_.find(p);
  if (it == grads_.end()) {
    grads_.emplace(p, g);
  } else {
    it->second += g;
  }
}

const Matrix* Gradients::find(const Parameter* p) const {
  auto it = grads_.find(p);
  return it == grads_.end() ? nullptr : &it->second;
}

void Gradients::scale(double s) {
  for (auto& [p, g] : grads_) g *= s;
}

void Gradients::add(const Gradients& other) {
  for (const auto& [p, g] : other.grads_) accumulate(p, g);
}

const Matrix& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(const Parameter& p, bool track) {
  Node n;
  n.value = p.value;
  n.requires_grad = track;
  n.param = track ? &p : nullptr;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::vector<std::size_t> inputs, Backprop backprop) {
  Node n;
  n.value = std::move(value);
  for (std::size_t i : inputs) {
    if (nodes_[i].requires_grad) n.requires_grad = true;
  }
  if (n.requires_grad) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate_grad(std::size_t id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var root, Gradients& out) {
  if (root.tape_ != this) throw std::invalid_argument("backward: root belongs to another tape");
  if (root.rows() != 1 || root.cols() != 1) throw std::invalid_argument("backward: root must be a scalar");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[root.id_].requires_grad) return;
  nodes_[root.id_].grad = Matrix::Ones(1, 1);
  for (std::size_t i = root.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.backprop) n.backprop(*this, i);
    if (n.param != nullptr) out.accumulate(n.param, n.grad);
  }
}

const Matrix* Tape::grad_of(Var v) const {
  const Node& n = nodes_[v.id_];
  return n.grad.size() == 0 ? nullptr : &n.grad;
}

namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) throw std::invalid_argument("operands live on different tapes");
  return *a.tape();
}

void require_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value() * b.value(), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    if (tp.requires_grad(ia)) tp.accumulate_grad(ia, g * tp.value(ib).transpose());
    if (tp.requires_grad(ib)) tp.accumulate_grad(ib, tp.value(ia).transpose() * g);
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(a, b, "add");
  std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value() + b.value(), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    tp.accumulate_grad(ia, tp.grad(self));
    tp.accumulate_grad(ib, tp.grad(self));
  });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(a, b, "sub");
  std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value() - b.value(), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
    tp.accumulate_grad(ia, tp.grad(self));
    tp.accumulate_grad(ib, -tp.grad(self));
  });
}

Var scale(Var a, double s) {
  std::size_t ia = a.id();
  return a.tape()->record(a.value() * s, {ia},
                          [ia, s](Tape& tp, std::size_t self) { tp.accumulate_grad(ia, tp.grad(self) * s); });
}

Var add_row(Var a, Var row) {
  Tape& t = same_tape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) throw std::invalid_argument("add_row: row shape mismatch");
  std::size_t ia = a.id(), ir = row.id();
  Matrix out = a.value().rowwise() + row.value().row(0);
  return t.record(std::move(out), {ia, ir}, [ia, ir](Tape& tp, std::size_t self) {
    tp.accumulate_grad(ia, tp.grad(self));
    if (tp.requires_grad(ir)) tp.accumulate_grad(ir, tp.grad(self).colwise().sum());
  });
}

Var row_scale(Var a, const Vector& coeff) {
  if (coeff.size() != a.rows()) throw std::invalid_argument("row_scale: coefficient count differs from rows");
  std::size_t ia = a.id();
  Matrix out = coeff.asDiagonal() * a.value();
  return a.tape()->record(std::move(out), {ia}, [ia, coeff](Tape& tp, std::size_t self) {
    tp.accumulate_grad(ia, coeff.asDiagonal() * tp.grad(self));
  });
}

Var select_row(Var a, Eigen::Index r) {
  if (r < 0 || r >= a.rows()) throw std::out_of_range("select_row: row index out of range");
  std::size_t ia = a.id();
  Eigen::Index rows = a.rows(), cols = a.cols();
  return a.tape()->record(a.value().row(r), {ia}, [ia, r, rows, cols](Tape& tp, std::size_t self) {
    Matrix g = Matrix::Zero(rows, cols);
    g.row(r) = tp.grad(self).row(0);
    tp.accumulate_grad(ia, g);
  });
}

Var gather_rows(Var a, std::span<const int> index) {
  Matrix out(static_cast<Eigen::Index>(index.size()), a.cols());
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] < 0 || index[k] >= a.rows()) throw std::out_of_range("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(k)) = a.value().row(index[k]);
  }
  std::vector<int> idx(index.begin(), index.end());
  std::size_t ia = a.id();
  Eigen::Index rows = a.rows(), cols = a.cols();
  return a.tape()->record(std::move(out), {ia}, [ia, idx, rows, cols](Tape& tp, std::size_t self) {
    Matrix g = Matrix::Zero(rows, cols);
    const Matrix& gs = tp.grad(self);
    for (std::size_t k = 0; k < idx.size(); ++k) g.row(idx[k]) += gs.row(static_cast<Eigen::Index>(k));
    tp.accumulate_grad(ia, g);
  });
}

Var silu(Var a) {
  std::size_t ia = a.id();
  Matrix sig = a.value().unaryExpr([](double x) { return sigmoid(x); });
  Matrix out = a.value().cwiseProduct(sig);
  if (!a.requires_grad()) return a.tape()->record(std::move(out), {ia}, nullptr);
  return a.tape()->record(std::move(out), {ia}, [ia, sig = std::move(sig)](Tape& tp, std::size_t self) {
    Matrix d = sig.array() * (1.0 + tp.value(ia).array() * (1.0 - sig.array()));
    tp.accumulate_grad(ia, d.cwiseProduct(tp.grad(self)));
  });
}

Var layer_norm(Var a, double eps) {
  std::size_t ia = a.id();
  const Matrix& x = a.value();
  const Eigen::Index c = x.cols();
  Vector mean = x.rowwise().mean();
  Matrix centered = x.colwise() - mean;
  Vector inv_std = (centered.array().square().rowwise().sum() / static_cast<double>(c) + eps).rsqrt().matrix();
  Matrix y = inv_std.asDiagonal() * centered;
  return a.tape()->record(y, {ia}, [ia, y, inv_std](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    Vector g_mean = g.rowwise().mean();
    Vector gy_mean = g.cwiseProduct(y).rowwise().mean();
    Matrix dx = g;
    dx.colwise() -= g_mean;
    dx -= gy_mean.asDiagonal() * y;
    tp.accumulate_grad(ia, inv_std.asDiagonal() * dx);
  });
}

Var mse(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(a, b, "mse");
  std::size_t ia = a.id(), ib = b.id();
  Matrix diff = a.value() - b.value();
  const double n = static_cast<double>(diff.size());
  Matrix out(1, 1);
  out(0, 0) = diff.squaredNorm() / n;
  return t.record(std::move(out), {ia, ib}, [ia, ib, diff, n](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)(0, 0);
    if (tp.requires_grad(ia)) tp.accumulate_grad(ia, diff * (2.0 * g / n));
    if (tp.requires_grad(ib)) tp.accumulate_grad(ib, diff * (-2.0 * g / n));
  });
}

Var cross_entropy(Var logits, std::span<const int> labels) {
  const Matrix& z = logits.value();
  if (static_cast<Eigen::Index>(labels.size()) != z.rows()) {
    throw std::invalid_argument("cross_entropy: label count differs from batch size");
  }
  const Eigen::Index b = z.rows(), c = z.cols();
  Matrix prob(b, c);
  double loss = 0.0;
  for (Eigen::Index r = 0; r < b; ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= c) throw std::out_of_range("cross_entropy: label outside class range");
    const double m = z.row(r).maxCoeff();
    RowVector e = (z.row(r).array() - m).exp().matrix();
    const double s = e.sum();
    prob.row(r) = e / s;
    loss += (m + std::log(s)) - z(r, y);
  }
  Matrix out(1, 1);
  out(0, 0) = loss / static_cast<double>(b);
  std::vector<int> ys(labels.begin(), labels.end());
  std::size_t il = logits.id();
  return logits.tape()->record(std::move(out), {il}, [il, prob, ys](Tape& tp, std::size_t self) {
    Matrix g = prob;
    for (std::size_t r = 0; r < ys.size(); ++r) g(static_cast<Eigen::Index>(r), ys[r]) -= 1.0;
    g *= tp.grad(self)(0, 0) / static_cast<double>(ys.size());
    tp.accumulate_grad(il, g);
  });
}

Var sum(std::span<const Var> terms) {
  if (terms.empty()) throw std::invalid_argument("sum: no terms");
  Tape* t = terms.front().tape();
  Matrix out = Matrix::Zero(1, 1);
  std::vector<std::size_t> ids;
  for (const Var& v : terms) {
    if (v.tape() != t) throw std::invalid_argument("sum: operands live on different tapes");
    if (v.rows() != 1 || v.cols() != 1) throw std::invalid_argument("sum: terms must be scalars");
    out += v.value();
    ids.push_back(v.id());
  }
  return t->record(std::move(out), ids, [ids](Tape& tp, std::size_t self) {
    for (std::size_t i : ids) tp.accumulate_grad(i, tp.grad(self));
  });
}

}  // namespace dmm

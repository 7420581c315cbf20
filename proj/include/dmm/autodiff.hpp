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

#pragma once

// Minimal reverse-mode automatic differentiation over dense double matrices.
//
// A Tape records every operation of one forward pass. Parameters enter the
// tape as leaves; gradients are written into a Gradients map owned by the
// caller, so parameter storage stays read-only during forward/backward and
// several tapes may read the same network concurrently.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

struct Parameter {
  std::string name;
  Matrix value;
};

/// Gradient buffers keyed by parameter identity.
class Gradients {
 public:
  void accumulate(const Parameter* p, const Matrix& g);
  const Matrix* find(const Parameter* p) const;
  bool empty() const { return grads_.empty(); }
  std::size_t size() const { return grads_.size(); }

  void scale(double s);
  /// this += other, parameter by parameter.
  void add(const Gradients& other);

  auto begin() const { return grads_.begin(); }
  auto end() const { return grads_.end(); }

 private:
  std::unordered_map<const Parameter*, Matrix> grads_;
};

class Tape;

/// Handle to a node on a tape. Cheap to copy.
class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool requires_grad() const;
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Leaf for a parameter. With track == false it behaves as a constant.
  Var param(const Parameter& p, bool track = true);

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and propagates to every leaf.
  /// Parameter gradients are accumulated into `out`.
  void backward(Var root, Gradients& out);

  /// Gradient of the last backward() with respect to a tape node, or nullptr
  /// when the node was not reached.
  const Matrix* grad_of(Var v) const;

  // Used by op implementations.
  using Backprop = std::function<void(Tape&, std::size_t self)>;
  Var record(Matrix value, std::vector<std::size_t> inputs, Backprop backprop);
  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  void accumulate_grad(std::size_t id, const Matrix& g);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    const Parameter* param = nullptr;
    Backprop backprop;
  };
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Operations. All operands must live on the same tape.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double s);
/// a (r x c) + row (1 x c) broadcast over rows.
Var add_row(Var a, Var row);
/// Row r of a multiplied by coeff[r].
Var row_scale(Var a, const Vector& coeff);
/// Single row of a as a 1 x c matrix.
Var select_row(Var a, Eigen::Index r);
/// out.row(k) = a.row(index[k]).
Var gather_rows(Var a, std::span<const int> index);
Var silu(Var a);
/// Per-row normalization to zero mean and unit variance (no affine).
Var layer_norm(Var a, double eps = 1e-5);

/// Mean over all elements of (a - b)^2. Scalar.
Var mse(Var a, Var b);
/// Mean over rows of softmax cross-entropy against integer labels. Scalar.
Var cross_entropy(Var logits, std::span<const int> labels);
/// Sum of scalars.
Var sum(std::span<const Var> terms);

}  // namespace dmm

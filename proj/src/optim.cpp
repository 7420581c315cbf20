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

#include "dmm/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace dmm {

Adam::Adam(std::vector<Parameter*> params, const AdamConfig& config) : config_(config), params_(std::move(params)) {
  if (!(config.lr > 0.0)) throw std::invalid_argument("Adam: learning rate must be positive");
  for (Parameter* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::rebind(std::vector<Parameter*> params) {
  if (params.size() != params_.size()) throw std::invalid_argument("Adam::rebind: parameter count changed");
  params_ = std::move(params);
  resize_to_parameters();
}

void Adam::resize_to_parameters() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Matrix& v = params_[i]->value;
    if (m_[i].rows() == v.rows() && m_[i].cols() == v.cols()) continue;
    Matrix m = Matrix::Zero(v.rows(), v.cols()), s = Matrix::Zero(v.rows(), v.cols());
    const auto r = std::min(v.rows(), m_[i].rows()), c = std::min(v.cols(), m_[i].cols());
    m.topLeftCorner(r, c) = m_[i].topLeftCorner(r, c);
    s.topLeftCorner(r, c) = v_[i].topLeftCorner(r, c);
    m_[i] = std::move(m);
    v_[i] = std::move(s);
  }
}

void Adam::step(const Gradients& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter* p = params_[i];
    const Matrix* g = grads.find(p);
    if (g == nullptr) continue;
    if (g->rows() != p->value.rows() || g->cols() != p->value.cols()) {
      throw std::invalid_argument("Adam: gradient shape mismatch for " + p->name);
    }
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * *g;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g->cwiseAbs2();
    if (config_.weight_decay > 0.0) p->value *= 1.0 - config_.lr * config_.weight_decay;
    p->value.array() -= config_.lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + config_.eps);
  }
}

}  // namespace dmm

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

#include "dmm/autodiff.hpp"

#include <vector>

namespace dmm {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Decoupled weight decay (AdamW); 0 reduces to Adam.
  double weight_decay = 0.0;
};

/// Adam over a fixed, ordered parameter list. Moments are stored by position,
/// so the optimizer may be rebound to a structurally identical copy.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Parameter*> params, const AdamConfig& config);

  /// Parameters absent from grads are left untouched.
  void step(const Gradients& grads);
  void set_lr(double lr) { config_.lr = lr; }
  const AdamConfig& config() const { return config_; }
  long long steps() const { return t_; }
  void rebind(std::vector<Parameter*> params);
  /// Appends zero-moment slots for parameters whose shape grew (e.g. an extended codebook).
  void resize_to_parameters();

 private:
  AdamConfig config_;
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_, v_;
  long long t_ = 0;
};

}  // namespace dmm

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

// Expert teachers: one denoiser per style trained with the standard
// noise-prediction objective.

#include "dmm/diffusion.hpp"
#include "dmm/fid.hpp"
#include "dmm/nets.hpp"
#include "dmm/optim.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmm {

class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Predicted noise (and features) for a batch of noisy states.
using NoisePredictor = std::function<DenoiserOutput(Tape&, const Matrix& x_t, std::span<const int> t)>;

struct DsmResult {
  Var loss;
  std::vector<int> timesteps;
};

/// Mean squared error between predicted and true noise, t ~ U[0, T-1] and
/// eps ~ N(0, I) drawn from seed. Non-finite loss raises TrainingAborted.
DsmResult dsm_loss(Tape& tape, const NoisePredictor& model, const Matrix& x0, const NoiseSchedule& sched,
                   std::uint64_t seed);
double dsm_loss(const Denoiser& model, const Matrix& x0, const NoiseSchedule& sched, std::uint64_t seed);

struct TeacherTrainConfig {
  DenoiserConfig arch;
  int steps = 20000;
  int batch_size = 256;
  double lr = 1e-4;
  /// Cosine decay to lr * final_lr_fraction; 1 keeps the rate constant.
  double final_lr_fraction = 1.0;
  std::uint64_t seed = 0;
  /// Acceptance threshold on FD(teacher samples, held-out style data).
  double fd_threshold = 0.05;
  int eval_samples = 5000;
  /// Abort when loss stays above divergence_factor x initial for divergence_window steps.
  double divergence_factor = 10.0;
  int divergence_window = 1000;
  /// Optional shared initialization (same architecture).
  const Denoiser* init_from = nullptr;
};

struct TeacherResult {
  int style_id = 0;
  Denoiser model;
  std::vector<double> loss_curve;
  double fd_to_style = 0.0;
  bool accepted = false;
};

/// Batch of n clean samples for a seed.
using DataSource = std::function<Matrix(int n, std::uint64_t seed)>;

/// Denoising score matching with Adam and cosine decay; returns the per-step loss.
std::vector<double> train_denoiser(Denoiser& model, const DataSource& source, const TeacherTrainConfig& config,
                                   const NoiseSchedule& sched, const std::string& label);

TeacherResult train_teacher(int style_id, const TeacherTrainConfig& config, const NoiseSchedule& sched);

/// Base network trained on the common pool, used as a shared teacher initialization.
Denoiser train_shared_base(std::span<const int> pool_styles, const TeacherTrainConfig& config,
                           const NoiseSchedule& sched);

/// Trailing moving average with the given window.
std::vector<double> smooth(const std::vector<double>& xs, int window);

/// Cosine-decayed learning rate at step (0-based) of total.
double cosine_lr(double base, double final_fraction, int step, int total);

}  // namespace dmm

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

// Discrete DDPM mathematics: schedule, forward noising, clean-sample recovery
// and two samplers. Timesteps are 0-based; t = 0 is the least noisy step.

#include "dmm/autodiff.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmm {

enum class ScheduleKind { kLinear };

struct NoiseSchedule {
  int num_steps = 0;
  double beta_min = 0.0;
  double beta_max = 0.0;
  ScheduleKind kind = ScheduleKind::kLinear;
  std::vector<double> beta;
  std::vector<double> alpha_bar;

  double sqrt_alpha_bar(int t) const;
  double sqrt_one_minus_alpha_bar(int t) const;
  void check_timestep(int t) const;
};

class DegenerateScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

NoiseSchedule build_schedule(int num_steps, double beta_min, double beta_max,
                             ScheduleKind kind = ScheduleKind::kLinear);

/// Rows are samples; columns are data coordinates.
struct SampleBatch {
  Matrix data;
  std::optional<int> style;

  Eigen::Index size() const { return data.rows(); }
  /// Throws when empty or non-finite.
  void validate() const;
};

Matrix add_noise(const Matrix& x0, const Matrix& eps, int t, const NoiseSchedule& sched);
/// Per-row timesteps.
Matrix add_noise(const Matrix& x0, const Matrix& eps, std::span<const int> t, const NoiseSchedule& sched);

Matrix predict_x0(const Matrix& x_t, const Matrix& eps_hat, int t, const NoiseSchedule& sched);
Matrix predict_x0(const Matrix& x_t, const Matrix& eps_hat, std::span<const int> t, const NoiseSchedule& sched);

/// Differentiable clean-sample estimate; x_t is a constant, eps_hat may carry gradients.
Var predict_x0(Var x_t, Var eps_hat, std::span<const int> t, const NoiseSchedule& sched);

/// Noise predictor evaluated at a batch of states sharing one timestep per row.
using EpsModel = std::function<Matrix(const Matrix& x_t, std::span<const int> t)>;

/// DDPM ancestral sampling with posterior variance. Pure function of
/// (model, n, seed, schedule).
SampleBatch ancestral_sample(const EpsModel& model, int data_dim, int n, std::uint64_t seed,
                             const NoiseSchedule& sched);

/// Deterministic DDIM (eta = 0) over an evenly spaced subset of timesteps.
SampleBatch ddim_sample(const EpsModel& model, int data_dim, int n, std::uint64_t seed,
                        const NoiseSchedule& sched, int num_inference_steps);

/// DDIM from caller-supplied initial noise.
Matrix ddim_from_noise(const EpsModel& model, Matrix x_T, const NoiseSchedule& sched, int num_inference_steps);

/// Timesteps visited by DDIM, highest first.
std::vector<int> ddim_timesteps(int num_steps, int num_inference_steps);

const char* to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& s);

}  // namespace dmm

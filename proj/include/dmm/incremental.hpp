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

// Continual merging: new teachers are distilled into an extended codebook
// while a frozen snapshot of the merged student self-distills the old styles.

#include "dmm/distill.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dmm {

/// Uniform draw from the old style index set.
int draw_old_style(std::span<const int> old_styles, std::uint64_t seed);

/// Self-distillation update: the frozen snapshot supervises the trainable
/// student at the same, uniformly drawn old style. Returns the loss record.
LossRecord regularization_step(DistillState& state, const Student& frozen, const Matrix& x0,
                               std::span<const int> old_styles, const NoiseSchedule& sched,
                               const MergeRunConfig& config, std::uint64_t seed);

struct IncrementalResult {
  Student student;
  Discriminator disc;
  std::vector<LossRecord> log;
  int num_old_styles = 0;
};

/// Extends the codebook and discriminator by k = new_teachers.size() styles and trains
/// for config.steps rounds. Each round runs one worker per new teacher (styles
/// N_old+1..N_old+k) plus, when regularize is set, exactly one regularization worker.
/// The common pool draws from pool_styles (registry ids). k = 0 returns the inputs.
IncrementalResult incremental_merge(const Student& old_student, const Discriminator& old_disc,
                                    const std::vector<const Denoiser*>& new_teachers,
                                    std::span<const int> pool_styles, const NoiseSchedule& sched,
                                    const MergeRunConfig& config, bool regularize);

}  // namespace dmm

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

#include "dmm/incremental.hpp"

#include "dmm/random.hpp"
#include "dmm/teacher.hpp"

namespace dmm {

int draw_old_style(std::span<const int> old_styles, std::uint64_t seed) {
  if (old_styles.empty()) throw std::invalid_argument("regularization: empty old style set");
  Rng rng(seed);
  const int k = uniform_ints(1, 0, static_cast<int>(old_styles.size()) - 1, rng).front();
  return old_styles[static_cast<std::size_t>(k)];
}

LossRecord regularization_step(DistillState& state, const Student& frozen, const Matrix& x0,
                               std::span<const int> old_styles, const NoiseSchedule& sched,
                               const MergeRunConfig& config, std::uint64_t seed) {
  const int style = draw_old_style(old_styles, derive_seed(seed, {1}));
  if (style < 1 || style > frozen.num_styles()) throw std::invalid_argument("regularization: style not in snapshot");
  return distill_step(state, snapshot_supervisor(frozen, style), x0, 0, sched, config,
                      PassSeeds::derive(derive_seed(seed, {2})));
}

IncrementalResult incremental_merge(const Student& old_student, const Discriminator& old_disc,
                                    const std::vector<const Denoiser*>& new_teachers,
                                    std::span<const int> pool_styles, const NoiseSchedule& sched,
                                    const MergeRunConfig& config, bool regularize) {
  config.validate();
  const int n_old = old_student.num_styles();
  const int k = static_cast<int>(new_teachers.size());
  if (k == 0) return {old_student, old_disc, {}, n_old};
  check_same_architecture(new_teachers, old_student.base().config());
  if (old_disc.num_styles() != n_old) throw std::invalid_argument("incremental_merge: discriminator/codebook mismatch");
  if (pool_styles.empty()) throw std::invalid_argument("incremental_merge: empty common pool");

  const Student frozen = old_student;
  Student student(old_student.base(), old_student.codebook().extended(k, derive_seed(config.seed, {60})));
  Discriminator disc = old_disc;
  disc.extend(k, derive_seed(config.seed, {61}));
  DistillState state(std::move(student), std::move(disc), config.lr);

  std::vector<int> old_styles(static_cast<std::size_t>(n_old));
  for (int i = 0; i < n_old; ++i) old_styles[static_cast<std::size_t>(i)] = i + 1;
  const int m_new = config.num_workers > 0 ? config.num_workers : k;
  const int reg_worker = m_new;
  BatchSource source = common_pool_source(config, pool_styles);
  const std::uint64_t seed = derive_seed(config.seed, {62});

  IncrementalResult result;
  result.num_old_styles = n_old;
  for (int r = 0; r < config.steps; ++r) {
    state.set_lr(cosine_lr(config.lr, config.final_lr_fraction, r, config.steps));
    const auto step = static_cast<std::uint64_t>(state.step);
    std::vector<WorkerJob> jobs;
    for (int j = 0; j < m_new; ++j) {
      const int i = assign_teacher(j, k);
      const int style = n_old + i;
      jobs.push_back({j, teacher_supervisor(*new_teachers[static_cast<std::size_t>(i - 1)], style),
                      source(state.step, j, style),
                      PassSeeds::derive(derive_seed(seed, {step, static_cast<std::uint64_t>(j)}))});
    }
    if (regularize) {
      const int style = draw_old_style(old_styles, derive_seed(seed, {step, 1000, 1}));
      jobs.push_back({reg_worker, snapshot_supervisor(frozen, style), source(state.step, reg_worker, style),
                      PassSeeds::derive(derive_seed(seed, {step, 1000, 2}))});
    }
    RoundGradients g = compute_round(state, jobs, sched, config, config.parallel);
    apply_round(state, g);
    result.log.insert(result.log.end(), g.records.begin(), g.records.end());
  }
  result.student = std::move(state.student);
  result.disc = std::move(state.disc);
  return result;
}

}  // namespace dmm

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

// Distillation-based merging: the three losses, the generator/discriminator
// alternation of one worker, synchronized multi-worker rounds with gradient
// averaging, the full merge loop, and the synthesized-data fine-tune.

#include "dmm/autodiff.hpp"
#include "dmm/diffusion.hpp"
#include "dmm/nets.hpp"
#include "dmm/optim.hpp"
#include "dmm/style_data.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmm {

struct SynthFinetuneConfig {
  int images_per_teacher = 200;
  int steps = 1000;
};

struct MergeRunConfig {
  double lambda_feat = 0.001;
  double lambda_adv = 0.01;
  /// Student and discriminator learning rate.
  double lr = 1e-5;
  /// Cosine decay to lr * final_lr_fraction over the run; 1 keeps it constant.
  double final_lr_fraction = 1.0;
  /// Logical worker count M; 0 means one worker per teacher.
  int num_workers = 0;
  int steps = 1000;
  int batch_size = 128;
  std::uint64_t seed = 0;
  /// Evaluate workers on threads and all-reduce their gradients.
  bool parallel = false;
  /// Common-pool background weight; the rest is spread uniformly over pool styles.
  double background_weight = 0.2;
  /// Registry style ids the common pool draws from; empty means the teachers' own ids.
  std::vector<int> pool_styles;
  SynthFinetuneConfig synth;
  StyleCodebookConfig codebook;
  DiscriminatorConfig discriminator;

  void validate() const;
};

/// Teacher served by logical worker j: (j mod N) + 1.
int assign_teacher(int worker, int num_teachers);

struct WorkerAssignment {
  int worker = 0;
  int teacher = 1;
};

std::vector<WorkerAssignment> worker_layout(int num_workers, int num_teachers);

class LossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Losses -----------------------------------------------------------------------

/// Batch-mean squared difference between student and (detached) teacher noise.
Var score_distill_loss(Var student_eps, Var teacher_eps);
double score_distill_loss(const Matrix& student_eps, const Matrix& teacher_eps);

/// Sum over supervised layers of per-layer mean squared differences.
Var feature_imitation_loss(std::span<const Var> student_features, std::span<const Var> teacher_features);
double feature_imitation_loss(std::span<const Matrix> student_features, std::span<const Matrix> teacher_features);

/// Cross-entropy of student-sample logits against the real class of 1-based style.
Var adv_generator_loss(Var logits, int style, int num_styles);
double adv_generator_loss(const Matrix& logits, int style, int num_styles);

/// CE(student logits, fake class N + style) + CE(teacher logits, real class style).
Var adv_discriminator_loss(Var student_logits, Var teacher_logits, int style, int num_styles);
double adv_discriminator_loss(const Matrix& student_logits, const Matrix& teacher_logits, int style, int num_styles);

/// l_score + lambda_feat * l_feat + lambda_adv * l_adv; non-finite components raise LossError.
Var total_loss(Var l_score, Var l_feat, Var l_adv, const MergeRunConfig& config);
double total_loss(double l_score, double l_feat, double l_adv, const MergeRunConfig& config);

// One worker -------------------------------------------------------------------

/// Frozen supervision source for one worker: a teacher, or a frozen student
/// snapshot queried with the same style index (self-distillation).
struct Supervisor {
  int style = 1;
  std::function<DenoiserOutput(Tape&, const Matrix& x_t, std::span<const int> t)> forward;
};

Supervisor teacher_supervisor(const Denoiser& teacher, int style);
Supervisor snapshot_supervisor(const Student& frozen, int style);

/// Seeds consumed by one worker pass.
struct PassSeeds {
  std::uint64_t noise = 0;
  std::uint64_t disc_generator = 0;
  std::uint64_t disc_student = 0;
  std::uint64_t disc_teacher = 0;

  static PassSeeds derive(std::uint64_t seed);
};

struct GeneratorGraph {
  Var l_score, l_feat, l_adv, l_total;
  Matrix x_t;
  std::vector<int> t;
  Matrix x0_student;  // detached
  Matrix x0_teacher;
};

/// Builds the generator objective on a tape. Student parameters are tracked;
/// supervisor and discriminator parameters are not. With lambda_adv == 0 the
/// discriminator is skipped and l_adv is a zero constant.
GeneratorGraph build_generator_graph(Tape& tape, const Student& student, const Discriminator& disc,
                                     const Supervisor& supervisor, const Matrix& x0, const NoiseSchedule& sched,
                                     const MergeRunConfig& config, const PassSeeds& seeds);

/// Builds the discriminator objective on detached clean-sample estimates.
Var build_discriminator_graph(Tape& tape, const Discriminator& disc, const Matrix& x0_student,
                              const Matrix& x0_teacher, int style, int num_styles, const NoiseSchedule& sched,
                              const PassSeeds& seeds);

struct LossRecord {
  long long step = 0;
  int worker = 0;
  int style = 0;
  double l_score = 0.0;
  double l_feat = 0.0;
  double l_adv_gen = 0.0;
  double l_adv_disc = 0.0;
  double l_total = 0.0;
};

struct WorkerPass {
  Gradients student_grads;
  Gradients disc_grads;
  LossRecord record;
};

WorkerPass distill_pass(const Student& student, const Discriminator& disc, const Supervisor& supervisor,
                        const Matrix& x0, const NoiseSchedule& sched, const MergeRunConfig& config,
                        const PassSeeds& seeds);

// Training state and rounds ------------------------------------------------------

/// Student, discriminator and their optimizers. Copies rebind the optimizers
/// to the copied parameters.
class DistillState {
 public:
  DistillState(Student student, Discriminator disc, double lr);
  DistillState(const DistillState& other);
  DistillState& operator=(const DistillState& other);

  Student student;
  Discriminator disc;
  Adam student_opt;
  Adam disc_opt;
  long long step = 0;

  void set_lr(double lr);
  /// Re-point optimizers after structural changes (e.g. codebook extension).
  void rebind();
};

struct WorkerJob {
  int worker = 0;
  Supervisor supervisor;
  Matrix x0;
  PassSeeds seeds;
};

struct RoundGradients {
  Gradients student;
  Gradients disc;
  std::vector<LossRecord> records;
};

/// Evaluates every job against the current state and averages the gradients.
/// `order` permutes the visitation (and summation) order; empty means job order.
RoundGradients compute_round(const DistillState& state, const std::vector<WorkerJob>& jobs,
                             const NoiseSchedule& sched, const MergeRunConfig& config, bool parallel,
                             std::span<const std::size_t> order = {});

/// Generator update, then discriminator update; advances the step counter.
void apply_round(DistillState& state, const RoundGradients& grads);

/// One worker's full iteration: pass + both updates.
LossRecord distill_step(DistillState& state, const Supervisor& supervisor, const Matrix& x0, int worker,
                        const NoiseSchedule& sched, const MergeRunConfig& config, const PassSeeds& seeds);

/// Source of x0 batches for (round, worker).
using BatchSource = std::function<Matrix(long long round, int worker, int style)>;

BatchSource common_pool_source(const MergeRunConfig& config, std::span<const int> pool_styles);

struct DistillResult {
  Student student;
  Discriminator disc;
  std::vector<LossRecord> log;
};

/// Fresh student: base copied from `init_base`, codebook with N rows.
Student make_student(const Denoiser& init_base, int num_styles, const MergeRunConfig& config);

void check_same_architecture(const std::vector<const Denoiser*>& teachers, const DenoiserConfig& expected);

/// Round-robin rounds over M workers, each supervised by its assigned teacher.
/// Teachers are listed in style order; teacher_style_ids name their registry styles
/// for the common pool. The student starts from init_base, or teacher 1 when null.
DistillResult run_distillation(const std::vector<const Denoiser*>& teachers, std::span<const int> teacher_style_ids,
                               const NoiseSchedule& sched, const MergeRunConfig& config,
                               const Denoiser* init_base = nullptr);

/// Continue training an existing state for config.steps rounds.
std::vector<LossRecord> train_rounds(DistillState& state, const std::vector<const Denoiser*>& teachers,
                                     const BatchSource& source, const NoiseSchedule& sched,
                                     const MergeRunConfig& config, int steps, std::uint64_t seed);

struct SynthSet {
  int teacher = 0;
  std::uint64_t seed = 0;
  Matrix data;
};

std::vector<SynthSet> synthesize_sets(const std::vector<const Denoiser*>& teachers, const NoiseSchedule& sched,
                                      int images_per_teacher, std::uint64_t seed);

struct SynthFinetuneResult {
  Student student;
  Discriminator disc;
  std::vector<SynthSet> sets;
  std::vector<LossRecord> log;
};

/// Fine-tunes with the three losses on teacher-synthesized x0 batches.
SynthFinetuneResult synth_finetune(const Student& student, const Discriminator& disc,
                                   const std::vector<const Denoiser*>& teachers, const NoiseSchedule& sched,
                                   const MergeRunConfig& config);
SynthFinetuneResult synth_finetune(const Student& student, const Discriminator& disc,
                                   const std::vector<const Denoiser*>& teachers, std::vector<SynthSet> sets,
                                   const NoiseSchedule& sched, const MergeRunConfig& config);

}  // namespace dmm

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

#include "dmm/distill.hpp"

#include "dmm/random.hpp"
#include "dmm/teacher.hpp"

#include <cmath>
#include <numeric>
#include <thread>

namespace dmm {

namespace {

double scalar(Var v) { return v.value()(0, 0); }

void check_style_range(int style, int num_styles, const char* who) {
  if (num_styles < 1) throw std::invalid_argument(std::string(who) + ": need at least one style");
  if (style < 1 || style > num_styles) {
    throw std::invalid_argument(std::string(who) + ": style " + std::to_string(style) + " outside [1, " +
                                std::to_string(num_styles) + "]");
  }
}

void check_logits(const Matrix& logits, int num_styles, const char* who) {
  if (logits.cols() != 2 * num_styles) {
    throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(2 * num_styles) +
                                " logits, got " + std::to_string(logits.cols()));
  }
}

void check_finite(double value, const char* component) {
  if (!std::isfinite(value)) {
    throw LossError(std::string("non-finite ") + component + " (" + std::to_string(value) + ")");
  }
}

std::vector<int> constant_labels(Eigen::Index n, int label) { return std::vector<int>(static_cast<std::size_t>(n), label); }

}  // namespace

void MergeRunConfig::validate() const {
  if (!(lambda_feat >= 0.0) || !(lambda_adv >= 0.0)) throw std::invalid_argument("loss weights must be >= 0");
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0)) {
    throw std::invalid_argument("final_lr_fraction must be in (0, 1]");
  }
  if (num_workers < 0) throw std::invalid_argument("num_workers must be >= 0");
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(background_weight >= 0.0 && background_weight < 1.0)) {
    throw std::invalid_argument("background_weight must be in [0, 1)");
  }
  if (synth.images_per_teacher < 0 || synth.steps < 0) throw std::invalid_argument("bad synth_finetune config");
}

int assign_teacher(int worker, int num_teachers) {
  if (num_teachers < 1) throw std::invalid_argument("assign_teacher: no teachers");
  if (worker < 0) throw std::invalid_argument("assign_teacher: negative worker index");
  return worker % num_teachers + 1;
}

std::vector<WorkerAssignment> worker_layout(int num_workers, int num_teachers) {
  std::vector<WorkerAssignment> out;
  for (int j = 0; j < num_workers; ++j) out.push_back({j, assign_teacher(j, num_teachers)});
  return out;
}

// Losses -----------------------------------------------------------------------

Var score_distill_loss(Var student_eps, Var teacher_eps) {
  if (student_eps.rows() != teacher_eps.rows() || student_eps.cols() != teacher_eps.cols()) {
    throw std::invalid_argument("score_distill_loss: shape mismatch");
  }
  return mse(student_eps, teacher_eps);
}

double score_distill_loss(const Matrix& student_eps, const Matrix& teacher_eps) {
  Tape tape;
  return scalar(score_distill_loss(tape.constant(student_eps), tape.constant(teacher_eps)));
}

Var feature_imitation_loss(std::span<const Var> student_features, std::span<const Var> teacher_features) {
  if (student_features.size() != teacher_features.size()) {
    throw std::invalid_argument("feature_imitation_loss: " + std::to_string(student_features.size()) +
                                " student layers vs " + std::to_string(teacher_features.size()) + " teacher layers");
  }
  if (student_features.empty()) throw std::invalid_argument("feature_imitation_loss: no layers");
  std::vector<Var> terms;
  for (std::size_t k = 0; k < student_features.size(); ++k) {
    const Var& s = student_features[k];
    const Var& t = teacher_features[k];
    if (s.rows() != t.rows() || s.cols() != t.cols()) {
      throw std::invalid_argument("feature_imitation_loss: shape mismatch at layer " + std::to_string(k));
    }
    terms.push_back(mse(s, t));
  }
  return sum(terms);
}

double feature_imitation_loss(std::span<const Matrix> student_features, std::span<const Matrix> teacher_features) {
  Tape tape;
  std::vector<Var> s, t;
  for (const Matrix& m : student_features) s.push_back(tape.constant(m));
  for (const Matrix& m : teacher_features) t.push_back(tape.constant(m));
  return scalar(feature_imitation_loss(s, t));
}

Var adv_generator_loss(Var logits, int style, int num_styles) {
  check_style_range(style, num_styles, "adv_generator_loss");
  check_logits(logits.value(), num_styles, "adv_generator_loss");
  const auto labels = constant_labels(logits.rows(), style - 1);
  return cross_entropy(logits, labels);
}

double adv_generator_loss(const Matrix& logits, int style, int num_styles) {
  Tape tape;
  return scalar(adv_generator_loss(tape.constant(logits), style, num_styles));
}

Var adv_discriminator_loss(Var student_logits, Var teacher_logits, int style, int num_styles) {
  check_style_range(style, num_styles, "adv_discriminator_loss");
  check_logits(student_logits.value(), num_styles, "adv_discriminator_loss");
  check_logits(teacher_logits.value(), num_styles, "adv_discriminator_loss");
  const auto fake = constant_labels(student_logits.rows(), num_styles + style - 1);
  const auto real = constant_labels(teacher_logits.rows(), style - 1);
  const Var terms[] = {cross_entropy(student_logits, fake), cross_entropy(teacher_logits, real)};
  return sum(terms);
}

double adv_discriminator_loss(const Matrix& student_logits, const Matrix& teacher_logits, int style,
                              int num_styles) {
  Tape tape;
  return scalar(
      adv_discriminator_loss(tape.constant(student_logits), tape.constant(teacher_logits), style, num_styles));
}

Var total_loss(Var l_score, Var l_feat, Var l_adv, const MergeRunConfig& config) {
  check_finite(scalar(l_score), "l_score");
  check_finite(scalar(l_feat), "l_feat");
  check_finite(scalar(l_adv), "l_adv");
  std::vector<Var> terms{l_score};
  if (config.lambda_feat != 0.0) terms.push_back(scale(l_feat, config.lambda_feat));
  if (config.lambda_adv != 0.0) terms.push_back(scale(l_adv, config.lambda_adv));
  Var total = sum(terms);
  check_finite(scalar(total), "l_total");
  return total;
}

double total_loss(double l_score, double l_feat, double l_adv, const MergeRunConfig& config) {
  check_finite(l_score, "l_score");
  check_finite(l_feat, "l_feat");
  check_finite(l_adv, "l_adv");
  double total = l_score;
  if (config.lambda_feat != 0.0) total += config.lambda_feat * l_feat;
  if (config.lambda_adv != 0.0) total += config.lambda_adv * l_adv;
  check_finite(total, "l_total");
  return total;
}

// One worker -------------------------------------------------------------------

Supervisor teacher_supervisor(const Denoiser& teacher, int style) {
  return {style, [&teacher](Tape& tape, const Matrix& x_t, std::span<const int> t) {
            return teacher.forward(tape, x_t, t, false);
          }};
}

Supervisor snapshot_supervisor(const Student& frozen, int style) {
  return {style, [&frozen, style](Tape& tape, const Matrix& x_t, std::span<const int> t) {
            return frozen.forward(tape, x_t, t, style, false);
          }};
}

PassSeeds PassSeeds::derive(std::uint64_t seed) {
  return {derive_seed(seed, {1}), derive_seed(seed, {2}), derive_seed(seed, {3}), derive_seed(seed, {4})};
}

GeneratorGraph build_generator_graph(Tape& tape, const Student& student, const Discriminator& disc,
                                     const Supervisor& supervisor, const Matrix& x0, const NoiseSchedule& sched,
                                     const MergeRunConfig& config, const PassSeeds& seeds) {
  if (x0.rows() < 1) throw std::invalid_argument("distill: empty batch");
  GeneratorGraph g;
  Rng rng(seeds.noise);
  g.t = uniform_ints(static_cast<std::size_t>(x0.rows()), 0, sched.num_steps - 1, rng);
  Matrix eps = standard_normal(x0.rows(), x0.cols(), rng);
  g.x_t = add_noise(x0, eps, g.t, sched);

  DenoiserOutput s = student.forward(tape, g.x_t, g.t, supervisor.style, true);
  DenoiserOutput t = supervisor.forward(tape, g.x_t, g.t);
  g.l_score = score_distill_loss(s.eps, t.eps);
  g.l_feat = feature_imitation_loss(s.features, t.features);

  Var x0_student = predict_x0(tape.constant(g.x_t), s.eps, g.t, sched);
  g.x0_student = x0_student.value();
  g.x0_teacher = predict_x0(g.x_t, t.eps.value(), g.t, sched);
  if (config.lambda_adv != 0.0) {
    Var logits =
        disc.discriminate(tape, x0_student, student.num_styles(), sched, seeds.disc_generator, false).logits;
    g.l_adv = adv_generator_loss(logits, supervisor.style, student.num_styles());
  } else {
    g.l_adv = tape.constant(Matrix::Zero(1, 1));
  }
  g.l_total = total_loss(g.l_score, g.l_feat, g.l_adv, config);
  return g;
}

Var build_discriminator_graph(Tape& tape, const Discriminator& disc, const Matrix& x0_student,
                              const Matrix& x0_teacher, int style, int num_styles, const NoiseSchedule& sched,
                              const PassSeeds& seeds) {
  Var ls = disc.discriminate(tape, tape.constant(x0_student), num_styles, sched, seeds.disc_student, true).logits;
  Var lt = disc.discriminate(tape, tape.constant(x0_teacher), num_styles, sched, seeds.disc_teacher, true).logits;
  return adv_discriminator_loss(ls, lt, style, num_styles);
}

WorkerPass distill_pass(const Student& student, const Discriminator& disc, const Supervisor& supervisor,
                        const Matrix& x0, const NoiseSchedule& sched, const MergeRunConfig& config,
                        const PassSeeds& seeds) {
  WorkerPass pass;
  pass.record.style = supervisor.style;
  Matrix x0_student, x0_teacher;
  {
    Tape tape;
    GeneratorGraph g = build_generator_graph(tape, student, disc, supervisor, x0, sched, config, seeds);
    tape.backward(g.l_total, pass.student_grads);
    pass.record.l_score = scalar(g.l_score);
    pass.record.l_feat = scalar(g.l_feat);
    pass.record.l_adv_gen = scalar(g.l_adv);
    pass.record.l_total = scalar(g.l_total);
    x0_student = std::move(g.x0_student);
    x0_teacher = std::move(g.x0_teacher);
  }
  if (config.lambda_adv != 0.0) {
    Tape tape;
    Var l_dis = build_discriminator_graph(tape, disc, x0_student, x0_teacher, supervisor.style,
                                          student.num_styles(), sched, seeds);
    pass.record.l_adv_disc = scalar(l_dis);
    check_finite(pass.record.l_adv_disc, "l_adv_disc");
    tape.backward(l_dis, pass.disc_grads);
  }
  return pass;
}

// Training state and rounds ------------------------------------------------------

DistillState::DistillState(Student s, Discriminator d, double lr)
    : student(std::move(s)),
      disc(std::move(d)),
      student_opt(student.parameters(), AdamConfig{.lr = lr}),
      disc_opt(disc.trainable_parameters(), AdamConfig{.lr = lr}) {}

DistillState::DistillState(const DistillState& other)
    : student(other.student),
      disc(other.disc),
      student_opt(other.student_opt),
      disc_opt(other.disc_opt),
      step(other.step) {
  rebind();
}

DistillState& DistillState::operator=(const DistillState& other) {
  if (this == &other) return *this;
  student = other.student;
  disc = other.disc;
  student_opt = other.student_opt;
  disc_opt = other.disc_opt;
  step = other.step;
  rebind();
  return *this;
}

void DistillState::set_lr(double lr) {
  student_opt.set_lr(lr);
  disc_opt.set_lr(lr);
}

void DistillState::rebind() {
  student_opt.rebind(student.parameters());
  disc_opt.rebind(disc.trainable_parameters());
}

RoundGradients compute_round(const DistillState& state, const std::vector<WorkerJob>& jobs,
                             const NoiseSchedule& sched, const MergeRunConfig& config, bool parallel,
                             std::span<const std::size_t> order) {
  if (jobs.empty()) throw std::invalid_argument("compute_round: no workers");
  std::vector<std::size_t> visit(jobs.size());
  if (order.empty()) {
    std::iota(visit.begin(), visit.end(), std::size_t{0});
  } else {
    if (order.size() != jobs.size()) throw std::invalid_argument("compute_round: order size mismatch");
    visit.assign(order.begin(), order.end());
    std::vector<bool> seen(jobs.size(), false);
    for (std::size_t k : visit) {
      if (k >= jobs.size() || seen[k]) throw std::invalid_argument("compute_round: order is not a permutation");
      seen[k] = true;
    }
  }

  std::vector<WorkerPass> passes(jobs.size());
  auto run = [&](std::size_t k) {
    const WorkerJob& job = jobs[k];
    passes[k] = distill_pass(state.student, state.disc, job.supervisor, job.x0, sched, config, job.seeds);
    passes[k].record.step = state.step;
    passes[k].record.worker = job.worker;
  };
  if (parallel && jobs.size() > 1) {
    std::vector<std::exception_ptr> errors(jobs.size());
    std::vector<std::thread> threads;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      threads.emplace_back([&, k] {
        try {
          run(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t k : visit) run(k);
  }

  RoundGradients out;
  for (std::size_t k : visit) {
    out.student.add(passes[k].student_grads);
    out.disc.add(passes[k].disc_grads);
  }
  const double inv = 1.0 / static_cast<double>(jobs.size());
  out.student.scale(inv);
  out.disc.scale(inv);
  for (auto& p : passes) out.records.push_back(p.record);
  return out;
}

void apply_round(DistillState& state, const RoundGradients& grads) {
  state.student_opt.step(grads.student);
  if (!grads.disc.empty()) state.disc_opt.step(grads.disc);
  ++state.step;
}

LossRecord distill_step(DistillState& state, const Supervisor& supervisor, const Matrix& x0, int worker,
                        const NoiseSchedule& sched, const MergeRunConfig& config, const PassSeeds& seeds) {
  std::vector<WorkerJob> jobs{{worker, supervisor, x0, seeds}};
  RoundGradients g = compute_round(state, jobs, sched, config, false);
  apply_round(state, g);
  return g.records.front();
}

BatchSource common_pool_source(const MergeRunConfig& config, std::span<const int> pool_styles) {
  PoolMix mix = default_pool_mix(pool_styles, config.background_weight);
  const int batch = config.batch_size;
  const std::uint64_t seed = config.seed;
  return [mix, batch, seed](long long round, int worker, int) {
    return sample_common_pool(batch, derive_seed(seed, {10, static_cast<std::uint64_t>(round),
                                                        static_cast<std::uint64_t>(worker)}),
                              mix)
        .data;
  };
}

Student make_student(const Denoiser& init_base, int num_styles, const MergeRunConfig& config) {
  StyleCodebook codebook(num_styles, init_base.config().emb_dim, config.codebook, derive_seed(config.seed, {30}));
  return Student(init_base, std::move(codebook));
}

void check_same_architecture(const std::vector<const Denoiser*>& teachers, const DenoiserConfig& expected) {
  for (std::size_t k = 0; k < teachers.size(); ++k) {
    if (teachers[k] == nullptr) throw std::invalid_argument("teacher " + std::to_string(k + 1) + " is missing");
    if (!(teachers[k]->config() == expected)) {
      throw std::invalid_argument("teacher " + std::to_string(k + 1) + " architecture " +
                                  teachers[k]->config().arch_tag() + " does not match " + expected.arch_tag());
    }
  }
}

std::vector<LossRecord> train_rounds(DistillState& state, const std::vector<const Denoiser*>& teachers,
                                     const BatchSource& source, const NoiseSchedule& sched,
                                     const MergeRunConfig& config, int steps, std::uint64_t seed) {
  config.validate();
  const int n = static_cast<int>(teachers.size());
  if (n < 1) throw std::invalid_argument("train_rounds: no teachers");
  check_same_architecture(teachers, state.student.base().config());
  if (state.student.num_styles() < n) throw std::invalid_argument("train_rounds: codebook smaller than teacher set");
  const int m = config.num_workers > 0 ? config.num_workers : n;
  const auto layout = worker_layout(m, n);

  std::vector<LossRecord> log;
  for (int r = 0; r < steps; ++r) {
    state.set_lr(cosine_lr(config.lr, config.final_lr_fraction, r, steps));
    std::vector<WorkerJob> jobs;
    for (const auto& a : layout) {
      const auto step = static_cast<std::uint64_t>(state.step);
      jobs.push_back({a.worker, teacher_supervisor(*teachers[static_cast<std::size_t>(a.teacher - 1)], a.teacher),
                      source(state.step, a.worker, a.teacher),
                      PassSeeds::derive(derive_seed(seed, {20, step, static_cast<std::uint64_t>(a.worker)}))});
    }
    RoundGradients g = compute_round(state, jobs, sched, config, config.parallel);
    apply_round(state, g);
    log.insert(log.end(), g.records.begin(), g.records.end());
  }
  return log;
}

DistillResult run_distillation(const std::vector<const Denoiser*>& teachers, std::span<const int> teacher_style_ids,
                               const NoiseSchedule& sched, const MergeRunConfig& config,
                               const Denoiser* init_base) {
  config.validate();
  if (teachers.size() < 2) throw std::invalid_argument("run_distillation: need at least two teachers");
  if (teacher_style_ids.size() != teachers.size()) {
    throw std::invalid_argument("run_distillation: one registry style id per teacher required");
  }
  if (teachers.front() == nullptr) throw std::invalid_argument("teacher 1 is missing");
  const Denoiser& base = init_base != nullptr ? *init_base : *teachers.front();
  check_same_architecture(teachers, base.config());

  const int n = static_cast<int>(teachers.size());
  Student student = make_student(base, n, config);
  Discriminator disc(student.base(), n, config.discriminator, derive_seed(config.seed, {31}));
  DistillState state(std::move(student), std::move(disc), config.lr);

  std::vector<int> pool(config.pool_styles);
  if (pool.empty()) pool.assign(teacher_style_ids.begin(), teacher_style_ids.end());
  BatchSource source = common_pool_source(config, pool);
  auto log = train_rounds(state, teachers, source, sched, config, config.steps, derive_seed(config.seed, {32}));
  return {std::move(state.student), std::move(state.disc), std::move(log)};
}

std::vector<SynthSet> synthesize_sets(const std::vector<const Denoiser*>& teachers, const NoiseSchedule& sched,
                                      int images_per_teacher, std::uint64_t seed) {
  if (images_per_teacher < 1) throw std::invalid_argument("synthesize_sets: empty synthesized set requested");
  std::vector<SynthSet> sets;
  for (std::size_t k = 0; k < teachers.size(); ++k) {
    const Denoiser& teacher = *teachers[k];
    SynthSet s;
    s.teacher = static_cast<int>(k) + 1;
    s.seed = derive_seed(seed, {40, k + 1});
    s.data = ancestral_sample(teacher.as_eps_model(), teacher.config().data_dim, images_per_teacher, s.seed, sched).data;
    sets.push_back(std::move(s));
  }
  return sets;
}

SynthFinetuneResult synth_finetune(const Student& student, const Discriminator& disc,
                                   const std::vector<const Denoiser*>& teachers, const NoiseSchedule& sched,
                                   const MergeRunConfig& config) {
  auto sets = synthesize_sets(teachers, sched, config.synth.images_per_teacher, config.seed);
  return synth_finetune(student, disc, teachers, std::move(sets), sched, config);
}

SynthFinetuneResult synth_finetune(const Student& student, const Discriminator& disc,
                                   const std::vector<const Denoiser*>& teachers, std::vector<SynthSet> sets,
                                   const NoiseSchedule& sched, const MergeRunConfig& config) {
  config.validate();
  if (sets.size() != teachers.size()) throw std::invalid_argument("synth_finetune: one synthesized set per teacher");
  for (const SynthSet& s : sets) {
    if (s.data.rows() < 1) {
      throw std::invalid_argument("synth_finetune: empty synthesized set for teacher " + std::to_string(s.teacher));
    }
  }
  DistillState state(student, disc, config.lr);
  const int batch = config.batch_size;
  const std::uint64_t seed = config.seed;
  BatchSource source = [&sets, batch, seed](long long round, int worker, int style) {
    const Matrix& data = sets[static_cast<std::size_t>(style - 1)].data;
    Rng rng(derive_seed(seed, {50, static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(worker)}));
    const auto rows = uniform_ints(static_cast<std::size_t>(batch), 0, static_cast<int>(data.rows()) - 1, rng);
    Matrix x0(batch, data.cols());
    for (int r = 0; r < batch; ++r) x0.row(r) = data.row(rows[static_cast<std::size_t>(r)]);
    return x0;
  };
  auto log = train_rounds(state, teachers, source, sched, config, config.synth.steps, derive_seed(seed, {51}));
  return {std::move(state.student), std::move(state.disc), std::move(sets), std::move(log)};
}

}  // namespace dmm

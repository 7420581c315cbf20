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

#include "dmm/teacher.hpp"

#include "dmm/random.hpp"
#include "dmm/style_data.hpp"

#include <cmath>
#include <numbers>

namespace dmm {

DsmResult dsm_loss(Tape& tape, const NoisePredictor& model, const Matrix& x0, const NoiseSchedule& sched,
                   std::uint64_t seed) {
  if (x0.rows() < 1) throw std::invalid_argument("dsm_loss: empty batch");
  Rng rng(seed);
  DsmResult r;
  r.timesteps = uniform_ints(static_cast<std::size_t>(x0.rows()), 0, sched.num_steps - 1, rng);
  Matrix eps = standard_normal(x0.rows(), x0.cols(), rng);
  Matrix x_t = add_noise(x0, eps, r.timesteps, sched);
  DenoiserOutput out = model(tape, x_t, r.timesteps);
  r.loss = mse(out.eps, tape.constant(std::move(eps)));
  if (!std::isfinite(r.loss.value()(0, 0))) {
    throw TrainingAborted("dsm_loss: non-finite loss " + std::to_string(r.loss.value()(0, 0)));
  }
  return r;
}

double dsm_loss(const Denoiser& model, const Matrix& x0, const NoiseSchedule& sched, std::uint64_t seed) {
  Tape tape;
  NoisePredictor fn = [&model](Tape& tp, const Matrix& x, std::span<const int> t) {
    return model.forward(tp, x, t, false);
  };
  return dsm_loss(tape, fn, x0, sched, seed).loss.value()(0, 0);
}

double cosine_lr(double base, double final_fraction, int step, int total) {
  if (total <= 1 || final_fraction >= 1.0) return base;
  const double progress = static_cast<double>(step) / static_cast<double>(total - 1);
  const double cos_term = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return base * (final_fraction + (1.0 - final_fraction) * cos_term);
}

std::vector<double> smooth(const std::vector<double>& xs, int window) {
  std::vector<double> out(xs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    acc += xs[i];
    if (i >= static_cast<std::size_t>(window)) acc -= xs[i - static_cast<std::size_t>(window)];
    out[i] = acc / static_cast<double>(std::min<std::size_t>(i + 1, static_cast<std::size_t>(window)));
  }
  return out;
}

std::vector<double> train_denoiser(Denoiser& model, const DataSource& source, const TeacherTrainConfig& config,
                                   const NoiseSchedule& sched, const std::string& label) {
  if (config.steps < 0 || config.batch_size < 1) throw std::invalid_argument("train: bad step/batch config");
  Adam opt(model.parameters(), AdamConfig{.lr = config.lr});
  NoisePredictor fn = [&model](Tape& tp, const Matrix& x, std::span<const int> t) {
    return model.forward(tp, x, t, true);
  };
  std::vector<double> curve;
  double initial = 0.0;
  int above = 0;
  for (int step = 0; step < config.steps; ++step) {
    const auto s = static_cast<std::uint64_t>(step);
    Matrix x0 = source(config.batch_size, derive_seed(config.seed, {2, s}));
    Tape tape;
    DsmResult r = dsm_loss(tape, fn, x0, sched, derive_seed(config.seed, {3, s}));
    const double loss = r.loss.value()(0, 0);
    curve.push_back(loss);
    if (step < 10) initial += loss / 10.0;
    if (step >= 10 && loss > config.divergence_factor * initial) {
      if (++above >= config.divergence_window) {
        throw TrainingAborted("train(" + label + "): diverged at step " + std::to_string(step));
      }
    } else {
      above = 0;
    }
    Gradients g;
    tape.backward(r.loss, g);
    opt.set_lr(cosine_lr(config.lr, config.final_lr_fraction, step, config.steps));
    opt.step(g);
  }
  return curve;
}

TeacherResult train_teacher(int style_id, const TeacherTrainConfig& config, const NoiseSchedule& sched) {
  const StyleRegistry& registry = StyleRegistry::builtin();
  registry.spec(style_id);
  TeacherResult result;
  result.style_id = style_id;
  if (config.init_from != nullptr) {
    if (!(config.init_from->config() == config.arch)) {
      throw std::invalid_argument("train_teacher: shared base has a different architecture");
    }
    result.model = *config.init_from;
  } else {
    result.model = Denoiser(config.arch, derive_seed(config.seed, {1, static_cast<std::uint64_t>(style_id)}));
  }
  TeacherTrainConfig cfg = config;
  cfg.seed = derive_seed(config.seed, {6, static_cast<std::uint64_t>(style_id)});
  DataSource source = [&registry, style_id](int n, std::uint64_t seed) { return registry.sample(style_id, n, seed).data; };
  result.loss_curve = train_denoiser(result.model, source, cfg, sched, "style " + std::to_string(style_id));

  SampleBatch samples =
      ancestral_sample(result.model.as_eps_model(), config.arch.data_dim, config.eval_samples,
                       derive_seed(config.seed, {4, static_cast<std::uint64_t>(style_id)}), sched);
  SampleBatch held_out = registry.sample(style_id, config.eval_samples, derive_seed(config.seed, {5}));
  result.fd_to_style = frechet_distance(gaussian_stats(samples.data), gaussian_stats(held_out.data));
  result.accepted = result.fd_to_style <= config.fd_threshold;
  return result;
}

Denoiser train_shared_base(std::span<const int> pool_styles, const TeacherTrainConfig& config,
                           const NoiseSchedule& sched) {
  Denoiser model(config.arch, derive_seed(config.seed, {7}));
  const PoolMix mix = default_pool_mix(pool_styles);
  TeacherTrainConfig cfg = config;
  cfg.seed = derive_seed(config.seed, {8});
  DataSource source = [&mix](int n, std::uint64_t seed) { return sample_common_pool(n, seed, mix).data; };
  train_denoiser(model, source, cfg, sched, "shared base");
  return model;
}

}  // namespace dmm

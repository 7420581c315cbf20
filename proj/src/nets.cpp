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

#include "dmm/nets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace dmm {

std::string DenoiserConfig::arch_tag() const {
  return "resmlp-x" + std::to_string(data_dim) + "-h" + std::to_string(hidden) + "-d" + std::to_string(emb_dim) +
         "-b" + std::to_string(num_blocks);
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(const std::string& name, int in, int out, bool bias, Rng& rng, double init_std) : has_bias_(bias) {
  if (in < 1 || out < 1) throw std::invalid_argument("Linear: non-positive dimension for " + name);
  const double std_dev = init_std < 0.0 ? 1.0 / std::sqrt(static_cast<double>(in)) : init_std;
  weight.name = name + ".weight";
  weight.value = standard_normal(in, out, rng) * std_dev;
  if (bias) {
    this->bias.name = name + ".bias";
    this->bias.value = Matrix::Zero(1, out);
  }
}

Var Linear::forward(Tape& tape, Var x, bool track) const {
  Var y = matmul(x, tape.param(weight, track));
  if (has_bias_) y = add_row(y, tape.param(bias, track));
  return y;
}

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  if (has_bias_) out.push_back(&bias);
}

void Linear::collect(std::vector<const Parameter*>& out) const {
  out.push_back(&weight);
  if (has_bias_) out.push_back(&bias);
}

std::size_t Linear::parameter_count() const {
  return static_cast<std::size_t>(weight.value.size() + (has_bias_ ? bias.value.size() : 0));
}

std::size_t count_parameters(std::span<const Parameter* const> params) {
  std::size_t n = 0;
  for (const Parameter* p : params) n += static_cast<std::size_t>(p->value.size());
  return n;
}

// ---------------------------------------------------------------------------
// Denoiser

Matrix sinusoidal_embedding(std::span<const int> t, int dim) {
  const int half = dim / 2;
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(t.size()), dim);
  for (std::size_t r = 0; r < t.size(); ++r) {
    for (int k = 0; k < half; ++k) {
      const double freq = std::exp(-std::log(10000.0) * k / std::max(half, 1));
      const double arg = static_cast<double>(t[r]) * freq;
      out(static_cast<Eigen::Index>(r), k) = std::cos(arg);
      out(static_cast<Eigen::Index>(r), half + k) = std::sin(arg);
    }
  }
  return out;
}

Denoiser::Denoiser(const DenoiserConfig& config, std::uint64_t seed, const std::string& prefix)
    : config_(config), prefix_(prefix) {
  if (config.data_dim < 1 || config.hidden < 1 || config.emb_dim < 2 || config.num_blocks < 1) {
    throw std::invalid_argument("Denoiser: invalid architecture " + config.arch_tag());
  }
  Rng rng(seed);
  const int d = config.emb_dim, h = config.hidden;
  time1_ = Linear(prefix + ".time1", d, d, true, rng);
  time2_ = Linear(prefix + ".time2", d, d, true, rng);
  input_ = Linear(prefix + ".input", config.data_dim, h, true, rng);
  for (int b = 0; b < config.num_blocks; ++b) {
    const std::string name = prefix + ".block" + std::to_string(b);
    Block blk;
    blk.fc1 = Linear(name + ".fc1", h, h, true, rng);
    blk.emb_proj = Linear(name + ".emb", d, h, true, rng);
    blk.fc2 = Linear(name + ".fc2", h, h, true, rng, 0.5 / std::sqrt(static_cast<double>(h)));
    blocks_.push_back(std::move(blk));
  }
  output_ = Linear(prefix + ".output", h, config.data_dim, true, rng);
}

TimeEmbedding Denoiser::time_embedding(Tape& tape, std::span<const int> t, bool track) const {
  TimeEmbedding out;
  std::vector<int> distinct;
  std::unordered_map<int, int> slot;
  out.index.reserve(t.size());
  for (int ts : t) {
    auto [it, inserted] = slot.try_emplace(ts, static_cast<int>(distinct.size()));
    if (inserted) distinct.push_back(ts);
    out.index.push_back(it->second);
  }
  Var s = tape.constant(sinusoidal_embedding(distinct, config_.emb_dim));
  out.table = time2_.forward(tape, silu(time1_.forward(tape, s, track)), track);
  return out;
}

Var Denoiser::run_block(Tape& tape, const Block& b, Var h, Var emb_act, std::span<const int> index,
                        bool track) const {
  Var cond = gather_rows(b.emb_proj.forward(tape, emb_act, track), index);
  Var u = add(b.fc1.forward(tape, silu(h), track), cond);
  return add(h, b.fc2.forward(tape, silu(u), track));
}

DenoiserOutput Denoiser::forward_with_embedding(Tape& tape, Var x_t, const TimeEmbedding& emb, bool track) const {
  if (x_t.cols() != config_.data_dim) throw std::invalid_argument("Denoiser: input width differs from data_dim");
  if (emb.table.cols() != config_.emb_dim || static_cast<Eigen::Index>(emb.index.size()) != x_t.rows()) {
    throw std::invalid_argument("Denoiser: embedding shape mismatch");
  }
  DenoiserOutput out;
  Var emb_act = silu(emb.table);
  Var h = input_.forward(tape, x_t, track);
  for (const Block& b : blocks_) {
    h = run_block(tape, b, h, emb_act, emb.index, track);
    out.features.push_back(h);
  }
  out.eps = output_.forward(tape, silu(h), track);
  return out;
}

DenoiserOutput Denoiser::forward(Tape& tape, const Matrix& x_t, std::span<const int> t, bool track) const {
  if (static_cast<Eigen::Index>(t.size()) != x_t.rows()) {
    throw std::invalid_argument("Denoiser: timestep count differs from batch size");
  }
  return forward_with_embedding(tape, tape.constant(x_t), time_embedding(tape, t, track), track);
}

Var Denoiser::encode(Tape& tape, Var x, std::span<const int> t, int num_blocks, bool track) const {
  if (num_blocks < 0 || num_blocks > static_cast<int>(blocks_.size())) {
    throw std::invalid_argument("Denoiser::encode: block count out of range");
  }
  TimeEmbedding emb = time_embedding(tape, t, track);
  Var emb_act = silu(emb.table);
  Var h = input_.forward(tape, x, track);
  for (int b = 0; b < num_blocks; ++b) {
    h = run_block(tape, blocks_[static_cast<std::size_t>(b)], h, emb_act, emb.index, track);
  }
  return h;
}

Denoiser Denoiser::truncated(int num_blocks, const std::string& prefix) const {
  if (num_blocks < 1 || num_blocks > static_cast<int>(blocks_.size())) {
    throw std::invalid_argument("Denoiser::truncated: block count out of range");
  }
  Denoiser d = *this;
  d.blocks_.resize(static_cast<std::size_t>(num_blocks));
  d.config_.num_blocks = num_blocks;
  d.prefix_ = prefix;
  for (Parameter* p : d.parameters()) {
    if (p->name.rfind(prefix_ + ".", 0) == 0) p->name = prefix + p->name.substr(prefix_.size());
  }
  return d;
}

std::vector<Parameter*> Denoiser::parameters() {
  std::vector<Parameter*> out;
  time1_.collect(out);
  time2_.collect(out);
  input_.collect(out);
  for (Block& b : blocks_) {
    b.fc1.collect(out);
    b.emb_proj.collect(out);
    b.fc2.collect(out);
  }
  output_.collect(out);
  return out;
}

std::vector<const Parameter*> Denoiser::parameters() const {
  std::vector<const Parameter*> out;
  time1_.collect(out);
  time2_.collect(out);
  input_.collect(out);
  for (const Block& b : blocks_) {
    b.fc1.collect(out);
    b.emb_proj.collect(out);
    b.fc2.collect(out);
  }
  output_.collect(out);
  return out;
}

std::size_t Denoiser::parameter_count() const { return count_parameters(parameters()); }

EpsModel Denoiser::as_eps_model() const {
  return [this](const Matrix& x, std::span<const int> t) {
    Tape tape;
    return forward(tape, x, t, false).eps.value();
  };
}

// ---------------------------------------------------------------------------
// StyleCodebook

StyleCodebook::StyleCodebook(int num_styles, int dim, const StyleCodebookConfig& config, std::uint64_t seed)
    : config_(config) {
  if (num_styles < 1) throw std::invalid_argument("StyleCodebook: need at least one style");
  if (dim < 1) throw std::invalid_argument("StyleCodebook: non-positive width");
  Rng rng(seed);
  embeddings_.name = "codebook.embeddings";
  embeddings_.value = standard_normal(num_styles, dim, rng) * config.init_std;
  inj_in_ = Linear("codebook.injector.in", dim, dim, config.injector_bias, rng);
  // Zero output map: injection is an exact no-op before training.
  inj_out_ = Linear("codebook.injector.out", dim, dim, config.injector_bias, rng, 0.0);
}

RowVector StyleCodebook::embedding_value(int style) const {
  if (style < 1 || style > size()) throw std::out_of_range("style index " + std::to_string(style) + " outside [1, " +
                                                           std::to_string(size()) + "]");
  return embeddings_.value.row(style - 1);
}

Var StyleCodebook::embedding(Tape& tape, int style, bool track) const {
  if (style < 1 || style > size()) throw std::out_of_range("style index " + std::to_string(style) + " outside [1, " +
                                                           std::to_string(size()) + "]");
  return select_row(tape.param(embeddings_, track), style - 1);
}

Var StyleCodebook::inject(Tape& tape, Var e, Var t_emb, bool track) const {
  if (e.rows() != 1 || e.cols() != dim() || t_emb.cols() != dim()) {
    throw std::invalid_argument("inject_style: width mismatch (style " + std::to_string(e.cols()) + ", timestep " +
                                std::to_string(t_emb.cols()) + ", codebook " + std::to_string(dim()) + ")");
  }
  Var adapted = inj_out_.forward(tape, silu(inj_in_.forward(tape, e, track)), track);
  return add_row(t_emb, adapted);
}

StyleCodebook StyleCodebook::extended(int k, std::uint64_t seed) const {
  if (k < 1) throw std::invalid_argument("extend_codebook: k must be >= 1");
  StyleCodebook out = *this;
  Rng rng(seed);
  Matrix rows = standard_normal(k, dim(), rng) * config_.init_std;
  out.embeddings_.value.conservativeResize(size() + k, Eigen::NoChange);
  out.embeddings_.value.bottomRows(k) = rows;
  return out;
}

std::vector<Parameter*> StyleCodebook::parameters() {
  std::vector<Parameter*> out{&embeddings_};
  inj_in_.collect(out);
  inj_out_.collect(out);
  return out;
}

std::vector<const Parameter*> StyleCodebook::parameters() const {
  std::vector<const Parameter*> out{&embeddings_};
  inj_in_.collect(out);
  inj_out_.collect(out);
  return out;
}

std::size_t StyleCodebook::injector_parameter_count() const {
  return inj_in_.parameter_count() + inj_out_.parameter_count();
}

std::size_t StyleCodebook::parameter_count() const { return count_parameters(parameters()); }

// ---------------------------------------------------------------------------
// Student

Student::Student(Denoiser base, StyleCodebook codebook) : base_(std::move(base)), codebook_(std::move(codebook)) {
  if (codebook_.dim() != base_.config().emb_dim) {
    throw std::invalid_argument("Student: codebook width " + std::to_string(codebook_.dim()) +
                                " differs from timestep-embedding width " + std::to_string(base_.config().emb_dim));
  }
}

void Student::check_style(int style) const {
  if (style < 1 || style > codebook_.size()) {
    throw std::out_of_range("style index " + std::to_string(style) + " outside [1, " +
                            std::to_string(codebook_.size()) + "]");
  }
}

DenoiserOutput Student::forward(Tape& tape, const Matrix& x_t, std::span<const int> t, int style, bool track) const {
  check_style(style);
  if (static_cast<Eigen::Index>(t.size()) != x_t.rows()) {
    throw std::invalid_argument("Student: timestep count differs from batch size");
  }
  TimeEmbedding emb = base_.time_embedding(tape, t, track);
  emb.table = codebook_.inject(tape, codebook_.embedding(tape, style, track), emb.table, track);
  return base_.forward_with_embedding(tape, tape.constant(x_t), emb, track);
}

DenoiserOutput Student::forward_embedding(Tape& tape, const Matrix& x_t, std::span<const int> t, const RowVector& e,
                                          bool track) const {
  if (static_cast<Eigen::Index>(t.size()) != x_t.rows()) {
    throw std::invalid_argument("Student: timestep count differs from batch size");
  }
  TimeEmbedding emb = base_.time_embedding(tape, t, track);
  emb.table = codebook_.inject(tape, tape.constant(Matrix(e)), emb.table, track);
  return base_.forward_with_embedding(tape, tape.constant(x_t), emb, track);
}

EpsModel Student::as_eps_model(int style) const {
  check_style(style);
  return [this, style](const Matrix& x, std::span<const int> t) {
    Tape tape;
    return forward(tape, x, t, style, false).eps.value();
  };
}

EpsModel Student::as_eps_model(const RowVector& e) const {
  return [this, e](const Matrix& x, std::span<const int> t) {
    Tape tape;
    return forward_embedding(tape, x, t, e, false).eps.value();
  };
}

std::vector<Parameter*> Student::parameters() {
  auto out = base_.parameters();
  auto cb = codebook_.parameters();
  out.insert(out.end(), cb.begin(), cb.end());
  return out;
}

std::vector<const Parameter*> Student::parameters() const {
  auto out = base_.parameters();
  auto cb = codebook_.parameters();
  out.insert(out.end(), cb.begin(), cb.end());
  return out;
}

std::size_t Student::parameter_count() const { return count_parameters(parameters()); }

// ---------------------------------------------------------------------------
// Discriminator

int renoise_max_timestep(const NoiseSchedule& sched, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("renoise fraction must be in (0, 1]");
  const int count = static_cast<int>(std::ceil(fraction * sched.num_steps));
  return std::clamp(count, 1, sched.num_steps) - 1;
}

Discriminator::Discriminator(const Denoiser& backbone, int num_styles, const DiscriminatorConfig& config,
                             std::uint64_t seed)
    : config_(config), num_styles_(num_styles) {
  if (num_styles < 1) throw std::invalid_argument("Discriminator: need at least one style");
  const int middle = (backbone.num_feature_layers() + 1) / 2;
  trunk_ = backbone.truncated(middle, "disc.trunk");
  Rng rng(seed);
  const int h = backbone.config().hidden, w = config.head_width;
  fc1_ = Linear("disc.fc1", h, w, true, rng);
  fc2_ = Linear("disc.fc2", w, w, true, rng);
  head_ = Linear("disc.head", w, 2 * num_styles, true, rng, 0.01 / std::sqrt(static_cast<double>(w)));
}

Var Discriminator::logits(Tape& tape, Var x, std::span<const int> s, bool track) const {
  // Trunk is frozen: it never contributes parameter gradients, but input gradients pass through it.
  Var h = trunk_.encode(tape, x, s, trunk_.num_feature_layers(), false);
  h = silu(layer_norm(fc1_.forward(tape, h, track)));
  h = silu(layer_norm(fc2_.forward(tape, h, track)));
  return head_.forward(tape, h, track);
}

Discriminator::Result Discriminator::discriminate(Tape& tape, Var x0_hat, int expected_styles,
                                                  const NoiseSchedule& sched, std::uint64_t seed, bool track) const {
  if (expected_styles != num_styles_) {
    throw std::invalid_argument("discriminator head has " + std::to_string(num_classes()) + " outputs but codebook has " +
                                std::to_string(expected_styles) + " styles; rebuild the head");
  }
  if (!x0_hat.value().allFinite()) throw std::invalid_argument("discriminate: non-finite input");
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(x0_hat.rows());
  Result r;
  r.timesteps = uniform_ints(n, 0, renoise_max_timestep(sched, config_.renoise_fraction), rng);
  Matrix noise = standard_normal(x0_hat.rows(), x0_hat.cols(), rng);
  Vector keep(x0_hat.rows());
  Matrix scaled_noise(noise.rows(), noise.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    keep(row) = sched.sqrt_alpha_bar(r.timesteps[i]);
    scaled_noise.row(row) = sched.sqrt_one_minus_alpha_bar(r.timesteps[i]) * noise.row(row);
  }
  Var noisy = add(row_scale(x0_hat, keep), tape.constant(std::move(scaled_noise)));
  r.logits = logits(tape, noisy, r.timesteps, track);
  return r;
}

void Discriminator::extend(int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("Discriminator::extend: k must be >= 1");
  const int n_old = num_styles_, n_new = num_styles_ + k;
  Rng rng(seed);
  const int w = config_.head_width;
  Linear fresh("disc.head", w, 2 * n_new, true, rng, 0.01 / std::sqrt(static_cast<double>(w)));
  // Real classes keep indices [0, n_old); fake classes move from [n_old, 2 n_old) to [n_new, n_new + n_old).
  fresh.weight.value.leftCols(n_old) = head_.weight.value.leftCols(n_old);
  fresh.bias.value.leftCols(n_old) = head_.bias.value.leftCols(n_old);
  fresh.weight.value.middleCols(n_new, n_old) = head_.weight.value.rightCols(n_old);
  fresh.bias.value.middleCols(n_new, n_old) = head_.bias.value.rightCols(n_old);
  head_ = std::move(fresh);
  num_styles_ = n_new;
}

std::vector<Parameter*> Discriminator::trainable_parameters() {
  std::vector<Parameter*> out;
  fc1_.collect(out);
  fc2_.collect(out);
  head_.collect(out);
  return out;
}

std::vector<const Parameter*> Discriminator::trainable_parameters() const {
  std::vector<const Parameter*> out;
  fc1_.collect(out);
  fc2_.collect(out);
  head_.collect(out);
  return out;
}

std::vector<Parameter*> Discriminator::parameters() {
  auto out = trunk_.parameters();
  auto head = trainable_parameters();
  out.insert(out.end(), head.begin(), head.end());
  return out;
}

std::vector<const Parameter*> Discriminator::parameters() const {
  auto out = trunk_.parameters();
  auto head = trainable_parameters();
  out.insert(out.end(), head.begin(), head.end());
  return out;
}

}  // namespace dmm

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

// Desk-scale networks: a residual-MLP denoiser with sinusoidal timestep
// embedding, the style codebook with its injection adapter, the
// style-promptable student built from both, and the 2N-way discriminator.

#include "dmm/autodiff.hpp"
#include "dmm/diffusion.hpp"
#include "dmm/random.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dmm {

struct DenoiserConfig {
  int data_dim = 2;
  int hidden = 128;
  /// Timestep-embedding width d; also the style-embedding width.
  int emb_dim = 128;
  int num_blocks = 3;

  std::string arch_tag() const;
  bool operator==(const DenoiserConfig&) const = default;
};

class Linear {
 public:
  Linear() = default;
  /// Weights ~ N(0, init_std^2); init_std < 0 selects 1/sqrt(in). Biases start at zero.
  Linear(const std::string& name, int in, int out, bool bias, Rng& rng, double init_std = -1.0);

  Var forward(Tape& tape, Var x, bool track) const;
  void collect(std::vector<Parameter*>& out);
  void collect(std::vector<const Parameter*>& out) const;
  std::size_t parameter_count() const;
  int in_features() const { return static_cast<int>(weight.value.rows()); }
  int out_features() const { return static_cast<int>(weight.value.cols()); }
  bool has_bias() const { return has_bias_; }

  Parameter weight;  // in x out
  Parameter bias;    // 1 x out

 private:
  bool has_bias_ = false;
};

/// eps prediction plus the output of every residual block (the supervised layer set).
struct DenoiserOutput {
  Var eps;
  std::vector<Var> features;
};

Matrix sinusoidal_embedding(std::span<const int> t, int dim);

/// Timestep embedding evaluated once per distinct timestep in a batch.
struct TimeEmbedding {
  Var table;               // distinct timesteps x d
  std::vector<int> index;  // table row of each sample
};

class Denoiser {
 public:
  Denoiser() = default;
  Denoiser(const DenoiserConfig& config, std::uint64_t seed, const std::string& prefix = "base");

  const DenoiserConfig& config() const { return config_; }

  TimeEmbedding time_embedding(Tape& tape, std::span<const int> t, bool track) const;
  /// Full forward given an already-modulated embedding table.
  DenoiserOutput forward_with_embedding(Tape& tape, Var x_t, const TimeEmbedding& emb, bool track) const;
  DenoiserOutput forward(Tape& tape, const Matrix& x_t, std::span<const int> t, bool track) const;
  /// Input projection and the first num_blocks residual blocks.
  Var encode(Tape& tape, Var x, std::span<const int> t, int num_blocks, bool track) const;

  /// Copy keeping only the first num_blocks residual blocks.
  Denoiser truncated(int num_blocks, const std::string& prefix) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;
  int num_feature_layers() const { return static_cast<int>(blocks_.size()); }

  /// Noise predictor usable by the samplers.
  EpsModel as_eps_model() const;

 private:
  struct Block {
    Linear fc1;
    Linear emb_proj;
    Linear fc2;
  };
  Var run_block(Tape& tape, const Block& b, Var h, Var emb_act, std::span<const int> index, bool track) const;

  DenoiserConfig config_;
  std::string prefix_;
  Linear time1_, time2_, input_, output_;
  std::vector<Block> blocks_;
};

struct StyleCodebookConfig {
  double init_std = 0.02;
  bool injector_bias = true;
};

class StyleCodebook {
 public:
  StyleCodebook() = default;
  StyleCodebook(int num_styles, int dim, const StyleCodebookConfig& config, std::uint64_t seed);

  int size() const { return static_cast<int>(embeddings_.value.rows()); }
  int dim() const { return static_cast<int>(embeddings_.value.cols()); }
  const StyleCodebookConfig& config() const { return config_; }

  const Matrix& embeddings() const { return embeddings_.value; }
  RowVector embedding_value(int style) const;
  /// 1-based style index; row of the codebook as a 1 x d node.
  Var embedding(Tape& tape, int style, bool track) const;
  /// t_emb + injector(e); e is 1 x d and broadcast over the rows of t_emb.
  Var inject(Tape& tape, Var e, Var t_emb, bool track) const;

  /// Copy with k new rows; existing rows are preserved bit for bit.
  StyleCodebook extended(int k, std::uint64_t seed) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t injector_parameter_count() const;
  std::size_t parameter_count() const;

  Linear& injector_in() { return inj_in_; }
  Linear& injector_out() { return inj_out_; }
  Parameter& embedding_table() { return embeddings_; }

 private:
  StyleCodebookConfig config_;
  Parameter embeddings_;
  Linear inj_in_, inj_out_;
};

/// Style-promptable denoiser: base network plus codebook.
class Student {
 public:
  Student() = default;
  Student(Denoiser base, StyleCodebook codebook);

  const Denoiser& base() const { return base_; }
  Denoiser& base() { return base_; }
  const StyleCodebook& codebook() const { return codebook_; }
  StyleCodebook& codebook() { return codebook_; }
  int num_styles() const { return codebook_.size(); }

  /// 1-based style index.
  DenoiserOutput forward(Tape& tape, const Matrix& x_t, std::span<const int> t, int style, bool track) const;
  /// Arbitrary style embedding (e.g. an interpolation of codebook rows).
  DenoiserOutput forward_embedding(Tape& tape, const Matrix& x_t, std::span<const int> t, const RowVector& e,
                                   bool track) const;

  EpsModel as_eps_model(int style) const;
  EpsModel as_eps_model(const RowVector& e) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;

 private:
  void check_style(int style) const;
  Denoiser base_;
  StyleCodebook codebook_;
};

struct DiscriminatorConfig {
  int head_width = 128;
  /// Re-noising timesteps are drawn uniformly from the lowest fraction of the schedule.
  double renoise_fraction = 0.25;
};

/// Clean-sample classifier over 2N classes: [0, N) real styles, [N, 2N) fake styles.
/// The trunk is a frozen prefix of a denoiser up to its middle block.
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(const Denoiser& backbone, int num_styles, const DiscriminatorConfig& config, std::uint64_t seed);

  int num_styles() const { return num_styles_; }
  int num_classes() const { return 2 * num_styles_; }
  const DiscriminatorConfig& config() const { return config_; }

  /// Logits for already re-noised inputs at timesteps s.
  Var logits(Tape& tape, Var x, std::span<const int> s, bool track) const;

  struct Result {
    Var logits;
    std::vector<int> timesteps;
  };
  /// Re-noises x0_hat at seed-drawn low timesteps, then classifies. expected_styles is the
  /// current codebook size; a mismatch with the head is an error.
  Result discriminate(Tape& tape, Var x0_hat, int expected_styles, const NoiseSchedule& sched, std::uint64_t seed,
                      bool track) const;

  /// Rebuilds the head for num_styles + k styles, keeping old real/fake rows at their classes.
  void extend(int k, std::uint64_t seed);

  std::vector<Parameter*> trainable_parameters();
  std::vector<const Parameter*> trainable_parameters() const;
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  const Denoiser& trunk() const { return trunk_; }
  int trunk_blocks() const { return trunk_.num_feature_layers(); }

 private:
  DiscriminatorConfig config_;
  int num_styles_ = 0;
  Denoiser trunk_;
  Linear fc1_, fc2_, head_;
};

/// Number of scalar entries across a parameter list.
std::size_t count_parameters(std::span<const Parameter* const> params);

/// Index of the re-noising range upper bound (inclusive) for a schedule.
int renoise_max_timestep(const NoiseSchedule& sched, double fraction);

}  // namespace dmm

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

#include "dmm/style_mix.hpp"

#include "dmm/random.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dmm {

void StyleMixWeights::validate(int num_styles) const {
  if (static_cast<int>(w.size()) != num_styles) {
    throw std::invalid_argument("mixing weights: expected " + std::to_string(num_styles) + " weights, got " +
                                std::to_string(w.size()));
  }
  double total = 0.0;
  for (double x : w) {
    if (!std::isfinite(x)) throw std::invalid_argument("mixing weights: non-finite weight");
    if (x < 0.0 && !allow_extrapolation) {
      throw std::invalid_argument("mixing weights: negative weight (use extrapolation mode to allow)");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("mixing weights: sum is " + std::to_string(total) + ", expected 1");
  }
}

StyleMixWeights StyleMixWeights::one_hot(int num_styles, int style) {
  if (style < 1 || style > num_styles) throw std::out_of_range("one_hot: style outside codebook");
  StyleMixWeights m;
  m.w.assign(static_cast<std::size_t>(num_styles), 0.0);
  m.w[static_cast<std::size_t>(style - 1)] = 1.0;
  return m;
}

StyleMixWeights StyleMixWeights::pair(int num_styles, int i, int j, double weight_j) {
  if (i == j) throw std::invalid_argument("pair: styles must differ");
  if (i < 1 || i > num_styles || j < 1 || j > num_styles) throw std::out_of_range("pair: style outside codebook");
  StyleMixWeights m;
  m.w.assign(static_cast<std::size_t>(num_styles), 0.0);
  m.w[static_cast<std::size_t>(i - 1)] = 1.0 - weight_j;
  m.w[static_cast<std::size_t>(j - 1)] = weight_j;
  return m;
}

RowVector interpolate_styles(const StyleCodebook& codebook, const StyleMixWeights& weights) {
  weights.validate(codebook.size());
  RowVector e = RowVector::Zero(codebook.dim());
  for (int i = 0; i < codebook.size(); ++i) {
    const double wi = weights.w[static_cast<std::size_t>(i)];
    if (wi != 0.0) e += wi * codebook.embeddings().row(i);
  }
  return e;
}

Matrix sample_mixed(const Student& student, const StyleMixWeights& weights, int n, std::uint64_t seed,
                    const NoiseSchedule& sched, int num_inference_steps) {
  const RowVector e = interpolate_styles(student.codebook(), weights);
  return ddim_sample(student.as_eps_model(e), student.base().config().data_dim, n, seed, sched, num_inference_steps)
      .data;
}

std::vector<SweepPoint> interpolation_sweep(const Student& student, int i, int j, int grid_points, int n,
                                            std::uint64_t seed, const NoiseSchedule& sched,
                                            int num_inference_steps) {
  if (grid_points < 2) throw std::invalid_argument("interpolation_sweep: need at least 2 grid points");
  if (i == j) throw std::invalid_argument("interpolation_sweep: styles must differ");
  Rng rng(seed);
  const Matrix noise = standard_normal(n, student.base().config().data_dim, rng);
  std::vector<SweepPoint> out;
  for (int g = 0; g < grid_points; ++g) {
    SweepPoint p;
    p.weight_j = static_cast<double>(g) / static_cast<double>(grid_points - 1);
    const RowVector e = interpolate_styles(student.codebook(), StyleMixWeights::pair(student.num_styles(), i, j, p.weight_j));
    p.samples = ddim_from_noise(student.as_eps_model(e), noise, sched, num_inference_steps);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace dmm

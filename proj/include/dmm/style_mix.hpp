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

// Inference-time style combination: sampling with a weighted combination of
// codebook rows in place of a single style embedding.

#include "dmm/diffusion.hpp"
#include "dmm/nets.hpp"

#include <cstdint>
#include <vector>

namespace dmm {

struct StyleMixWeights {
  std::vector<double> w;
  /// Permit negative entries (the sum constraint still applies).
  bool allow_extrapolation = false;

  /// Throws unless |w| = num_styles, sum(w) = 1 within 1e-9 and, by default, w >= 0.
  void validate(int num_styles) const;
  static StyleMixWeights one_hot(int num_styles, int style);
  static StyleMixWeights pair(int num_styles, int i, int j, double weight_j);
};

/// sum_i w_i e_i.
RowVector interpolate_styles(const StyleCodebook& codebook, const StyleMixWeights& weights);

/// Deterministic DDIM samples from the mixed embedding.
Matrix sample_mixed(const Student& student, const StyleMixWeights& weights, int n, std::uint64_t seed,
                    const NoiseSchedule& sched, int num_inference_steps);

struct SweepPoint {
  /// Weight on style j; style i receives 1 - weight_j.
  double weight_j = 0.0;
  Matrix samples;
};

/// Evenly spaced grid from pure style i (first point) to pure style j (last point),
/// all sharing one initial noise drawn from seed.
std::vector<SweepPoint> interpolation_sweep(const Student& student, int i, int j, int grid_points, int n,
                                            std::uint64_t seed, const NoiseSchedule& sched,
                                            int num_inference_steps);

}  // namespace dmm

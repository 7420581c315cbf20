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

// Synthetic 2D style distributions and the shared common training pool.
//
// Every style is a shape family, stretched by an aspect ratio and rotated, then
// mapped to zero mean with unit average per-coordinate variance. The
// anisotropy survives normalization, so styles differ in their second moments
// and remain separable by Frechet distance on raw coordinates.

#include "dmm/autodiff.hpp"
#include "dmm/diffusion.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dmm {

enum class StyleFamily {
  kTwoMoons,
  kConcentricRings,
  kGaussianGrid,
  kSpiral,
  kCheckerboard,
  kSwissRoll,
  kAnisotropicBlobs,
  kStar,
};

const char* to_string(StyleFamily family);

struct StyleSpec {
  int style_id = 0;
  StyleFamily family = StyleFamily::kTwoMoons;
  /// x is scaled by aspect and y by 1/aspect before rotation.
  double aspect = 1.0;
  double angle_deg = 0.0;
  double jitter = 0.05;
};

/// Affine map applied after the shape transform: (x - mean) * scale.
struct StyleNormalization {
  RowVector mean;
  double scale = 1.0;
};

class StyleRegistry {
 public:
  explicit StyleRegistry(std::vector<StyleSpec> specs);

  /// The eight built-in styles, ids 1..8.
  static const StyleRegistry& builtin();

  int size() const { return static_cast<int>(specs_.size()); }
  bool contains(int style_id) const;
  const StyleSpec& spec(int style_id) const;
  const StyleNormalization& normalization(int style_id) const;
  std::vector<int> ids() const;

  /// n i.i.d. normalized draws; deterministic in (style_id, n, seed).
  SampleBatch sample(int style_id, int n, std::uint64_t seed) const;

 private:
  std::vector<StyleSpec> specs_;
  std::vector<StyleNormalization> norms_;
};

/// Draws from the built-in registry.
SampleBatch sample_style(int style_id, int n, std::uint64_t seed);

/// Shape-transformed but unnormalized draws.
Matrix sample_raw_style(const StyleSpec& spec, int n, std::uint64_t seed);

struct PoolMix {
  std::vector<int> styles;
  /// One weight per style, followed by the background weight. Must sum to 1.
  std::vector<double> weights;
  double background_std = 2.0;

  void validate() const;
};

/// Uniform over styles with 20% isotropic background.
PoolMix default_pool_mix(std::span<const int> styles, double background_weight = 0.2);

struct PoolDraw {
  Matrix data;
  /// Style id per row, or 0 for the background component.
  std::vector<int> source;
};

PoolDraw sample_common_pool(int n, std::uint64_t seed, const PoolMix& mix,
                            const StyleRegistry& registry = StyleRegistry::builtin());

}  // namespace dmm

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

#include "dmm/style_data.hpp"

#include "dmm/random.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace dmm {

namespace {

constexpr int kNormalizationDraws = 100000;
constexpr std::uint64_t kNormalizationSeed = 0x5eed0f57u;

using std::numbers::pi;

Matrix raw_family(StyleFamily family, int n, double jitter, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix x(n, 2);
  for (int i = 0; i < n; ++i) {
    double a = 0.0, b = 0.0;
    switch (family) {
      case StyleFamily::kTwoMoons: {
        const double th = pi * unif(rng);
        if (unif(rng) < 0.5) {
          a = std::cos(th);
          b = std::sin(th);
        } else {
          a = 1.0 - std::cos(th);
          b = 0.5 - std::sin(th);
        }
        break;
      }
      case StyleFamily::kConcentricRings: {
        const double r = 1.0 + std::floor(3.0 * unif(rng)) * 0.75;
        const double th = 2.0 * pi * unif(rng);
        a = r * std::cos(th);
        b = r * std::sin(th);
        break;
      }
      case StyleFamily::kGaussianGrid: {
        a = -1.5 + 1.5 * std::floor(3.0 * unif(rng)) + 0.2 * gauss(rng);
        b = -1.5 + 1.5 * std::floor(3.0 * unif(rng)) + 0.2 * gauss(rng);
        break;
      }
      case StyleFamily::kSpiral: {
        const double th = 0.5 * pi + 3.5 * pi * std::sqrt(unif(rng));
        const double sign = unif(rng) < 0.5 ? 1.0 : -1.0;
        a = sign * th * std::cos(th) / (4.0 * pi);
        b = sign * th * std::sin(th) / (4.0 * pi);
        break;
      }
      case StyleFamily::kCheckerboard: {
        a = 4.0 * unif(rng) - 2.0;
        const double cell = std::floor(a) + 2.0;  // 0..3
        const double offset = std::fmod(cell, 2.0) == 0.0 ? 0.0 : 1.0;
        b = 2.0 * std::floor(2.0 * unif(rng)) - 2.0 + offset + unif(rng);
        break;
      }
      case StyleFamily::kSwissRoll: {
        const double th = 1.5 * pi * (1.0 + 2.0 * unif(rng));
        a = th * std::cos(th) / 10.0;
        b = th * std::sin(th) / 10.0;
        break;
      }
      case StyleFamily::kAnisotropicBlobs: {
        const int k = static_cast<int>(std::floor(3.0 * unif(rng)));
        const double u = gauss(rng), v = gauss(rng);
        const double cx[] = {-1.5, 0.5, 1.5}, cy[] = {-0.5, 1.0, -1.0};
        a = cx[k] + 0.6 * u - 0.4 * v;
        b = cy[k] - 0.2 * u + 0.3 * v;
        break;
      }
      case StyleFamily::kStar: {
        const int arm = static_cast<int>(std::floor(5.0 * unif(rng)));
        const double th = 2.0 * pi * arm / 5.0 + pi / 2.0;
        const double r = unif(rng);
        a = r * std::cos(th);
        b = r * std::sin(th);
        break;
      }
    }
    x(i, 0) = a + jitter * gauss(rng);
    x(i, 1) = b + jitter * gauss(rng);
  }
  return x;
}

}  // namespace

const char* to_string(StyleFamily family) {
  switch (family) {
    case StyleFamily::kTwoMoons: return "two_moons";
    case StyleFamily::kConcentricRings: return "concentric_rings";
    case StyleFamily::kGaussianGrid: return "gaussian_grid";
    case StyleFamily::kSpiral: return "spiral";
    case StyleFamily::kCheckerboard: return "checkerboard";
    case StyleFamily::kSwissRoll: return "swiss_roll";
    case StyleFamily::kAnisotropicBlobs: return "anisotropic_blobs";
    case StyleFamily::kStar: return "star";
  }
  return "unknown";
}

Matrix sample_raw_style(const StyleSpec& spec, int n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x = raw_family(spec.family, n, spec.jitter, rng);
  x.col(0) *= spec.aspect;
  x.col(1) /= spec.aspect;
  const double th = spec.angle_deg * pi / 180.0;
  Eigen::Matrix2d rot;
  rot << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);  // row-vector convention: x * rot
  return x * rot;
}

StyleRegistry::StyleRegistry(std::vector<StyleSpec> specs) : specs_(std::move(specs)) {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (specs_[i].style_id != static_cast<int>(i) + 1) {
      throw std::invalid_argument("StyleRegistry: style ids must be 1..N in order");
    }
    if (!(specs_[i].aspect > 0.0)) throw std::invalid_argument("StyleRegistry: aspect must be positive");
    Matrix ref = sample_raw_style(specs_[i], kNormalizationDraws, derive_seed(kNormalizationSeed, {i}));
    StyleNormalization norm;
    norm.mean = ref.colwise().mean();
    Matrix centered = ref.rowwise() - norm.mean;
    const double avg_var = centered.squaredNorm() / (static_cast<double>(ref.rows() - 1) * ref.cols());
    norm.scale = 1.0 / std::sqrt(avg_var);
    norms_.push_back(std::move(norm));
  }
}

const StyleRegistry& StyleRegistry::builtin() {
  static const StyleRegistry registry({
      {1, StyleFamily::kTwoMoons, 1.4, 0.0, 0.06},
      {2, StyleFamily::kConcentricRings, 2.0, 90.0, 0.05},
      {3, StyleFamily::kGaussianGrid, 1.8, 45.0, 0.05},
      {4, StyleFamily::kSpiral, 1.0, 0.0, 0.03},
      {5, StyleFamily::kCheckerboard, 2.0, -45.0, 0.02},
      {6, StyleFamily::kSwissRoll, 1.6, 25.0, 0.04},
      {7, StyleFamily::kAnisotropicBlobs, 1.0, 110.0, 0.05},
      {8, StyleFamily::kStar, 1.5, 155.0, 0.03},
  });
  return registry;
}

bool StyleRegistry::contains(int style_id) const { return style_id >= 1 && style_id <= size(); }

const StyleSpec& StyleRegistry::spec(int style_id) const {
  if (!contains(style_id)) {
    throw std::out_of_range("style id " + std::to_string(style_id) + " is not registered (1.." +
                            std::to_string(size()) + ")");
  }
  return specs_[static_cast<std::size_t>(style_id - 1)];
}

const StyleNormalization& StyleRegistry::normalization(int style_id) const {
  spec(style_id);
  return norms_[static_cast<std::size_t>(style_id - 1)];
}

std::vector<int> StyleRegistry::ids() const {
  std::vector<int> out(specs_.size());
  std::iota(out.begin(), out.end(), 1);
  return out;
}

SampleBatch StyleRegistry::sample(int style_id, int n, std::uint64_t seed) const {
  const StyleSpec& s = spec(style_id);
  if (n < 1) throw std::invalid_argument("sample_style: n must be >= 1");
  const StyleNormalization& norm = norms_[static_cast<std::size_t>(style_id - 1)];
  Matrix x = (sample_raw_style(s, n, derive_seed(seed, {static_cast<std::uint64_t>(style_id)})).rowwise() - norm.mean) *
             norm.scale;
  return SampleBatch{std::move(x), style_id};
}

SampleBatch sample_style(int style_id, int n, std::uint64_t seed) {
  return StyleRegistry::builtin().sample(style_id, n, seed);
}

void PoolMix::validate() const {
  if (weights.size() != styles.size() + 1) {
    throw std::invalid_argument("pool mix: need one weight per style plus a background weight");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("pool mix: weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("pool mix: weights sum to " + std::to_string(total) + ", expected 1");
  }
  if (!(background_std > 0.0)) throw std::invalid_argument("pool mix: background std must be positive");
}

PoolMix default_pool_mix(std::span<const int> styles, double background_weight) {
  PoolMix mix;
  mix.styles.assign(styles.begin(), styles.end());
  const double each = styles.empty() ? 0.0 : (1.0 - background_weight) / static_cast<double>(styles.size());
  mix.weights.assign(styles.size(), each);
  mix.weights.push_back(styles.empty() ? 1.0 : background_weight);
  return mix;
}

PoolDraw sample_common_pool(int n, std::uint64_t seed, const PoolMix& mix, const StyleRegistry& registry) {
  mix.validate();
  if (n < 1) throw std::invalid_argument("sample_common_pool: n must be >= 1");
  for (int s : mix.styles) registry.spec(s);
  Rng rng(derive_seed(seed, {0}));
  std::discrete_distribution<int> pick(mix.weights.begin(), mix.weights.end());
  std::vector<int> component(static_cast<std::size_t>(n));
  std::vector<int> counts(mix.weights.size(), 0);
  for (auto& c : component) {
    c = pick(rng);
    ++counts[static_cast<std::size_t>(c)];
  }
  // Draw each component in one batch, then scatter rows back in pick order.
  std::vector<Matrix> draws(mix.weights.size());
  for (std::size_t k = 0; k < mix.weights.size(); ++k) {
    if (counts[k] == 0) continue;
    if (k < mix.styles.size()) {
      draws[k] = registry.sample(mix.styles[k], counts[k], derive_seed(seed, {1, k})).data;
    } else {
      Rng bg(derive_seed(seed, {2}));
      draws[k] = standard_normal(counts[k], 2, bg) * mix.background_std;
    }
  }
  PoolDraw out;
  out.data.resize(n, 2);
  out.source.resize(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> cursor(mix.weights.size(), 0);
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(component[static_cast<std::size_t>(i)]);
    out.data.row(i) = draws[k].row(cursor[k]++);
    out.source[static_cast<std::size_t>(i)] = k < mix.styles.size() ? mix.styles[k] : 0;
  }
  return out;
}

}  // namespace dmm

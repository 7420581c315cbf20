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

#include "doctest.h"

#include "dmm/fid.hpp"
#include "dmm/style_data.hpp"

#include <cmath>
#include <vector>

using namespace dmm;

TEST_CASE("every built-in style is normalized") {
  const auto& reg = StyleRegistry::builtin();
  CHECK(reg.size() == 8);
  for (int id : reg.ids()) {
    const Matrix x = sample_style(id, 100000, 11).data;
    const RowVector mean = x.colwise().mean();
    CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
    const double avg_var = (x.rowwise() - mean).array().square().sum() / (2.0 * (x.rows() - 1));
    CHECK(avg_var == doctest::Approx(1.0).epsilon(0.03));
  }
}

TEST_CASE("style draws are deterministic in the seed") {
  const auto a = sample_style(3, 64, 5);
  const auto b = sample_style(3, 64, 5);
  const auto c = sample_style(3, 64, 6);
  CHECK((a.data.array() == b.data.array()).all());
  CHECK_FALSE((a.data.array() == c.data.array()).all());
  CHECK(a.style == 3);
}

TEST_CASE("unknown styles and empty batches are rejected") {
  CHECK_THROWS_AS(sample_style(0, 10, 1), std::out_of_range);
  CHECK_THROWS_AS(sample_style(9, 10, 1), std::out_of_range);
  CHECK_THROWS(sample_style(1, 0, 1));
}

TEST_CASE("styles are separable by Frechet distance") {
  const auto& reg = StyleRegistry::builtin();
  std::vector<GaussianStats> a, b;
  for (int id : reg.ids()) {
    a.push_back(gaussian_stats(sample_style(id, 5000, 1).data));
    b.push_back(gaussian_stats(sample_style(id, 5000, 2).data));
  }
  for (int i = 0; i < reg.size(); ++i) {
    const double floor = frechet_distance(a[i], b[i]);
    for (int j = 0; j < reg.size(); ++j) {
      if (i != j) CHECK(frechet_distance(a[i], b[j]) > 10.0 * floor);
    }
  }
}

TEST_CASE("common pool mixes styles with a background component") {
  const std::vector<int> styles{1, 2, 3};
  const PoolMix mix = default_pool_mix(styles);
  const int n = 30000;
  const PoolDraw draw = sample_common_pool(n, 4, mix);
  CHECK(draw.data.rows() == n);
  std::vector<int> counts(4, 0);
  for (int s : draw.source) counts[s == 0 ? 0 : s]++;
  const double expected[] = {0.2, 0.8 / 3, 0.8 / 3, 0.8 / 3};
  for (int k = 0; k < 4; ++k) {
    const double p = expected[k];
    CHECK(std::abs(counts[k] - n * p) < 3.0 * std::sqrt(n * p * (1 - p)));
  }

  const PoolMix bad{.styles = styles, .weights = {0.3, 0.3, 0.2, 0.1}};
  CHECK_THROWS(bad.validate());
  const PoolMix short_weights{.styles = styles, .weights = {0.5, 0.5}};
  CHECK_THROWS(short_weights.validate());

  const PoolMix single{.styles = {2}, .weights = {1.0, 0.0}};
  const PoolDraw only = sample_common_pool(500, 9, single);
  for (int s : only.source) REQUIRE(s == 2);
}

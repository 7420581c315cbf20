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
#include "test_util.hpp"

#include "dmm/style_mix.hpp"

#include <cmath>

using namespace dmm;

namespace {

Student mixed_student() {
  const DenoiserConfig arch{.data_dim = 2, .hidden = 8, .emb_dim = 6, .num_blocks = 2};
  Student s(Denoiser(arch, 1), StyleCodebook(4, 6, {.init_std = 1.0, .injector_bias = true}, 2));
  Rng rng(3);
  s.codebook().injector_out().weight.value = standard_normal(6, 6, rng);
  return s;
}

}  // namespace

TEST_CASE("mixing weights are validated") {
  CHECK_NOTHROW(StyleMixWeights{{0.25, 0.75}}.validate(2));
  CHECK_THROWS(StyleMixWeights{{0.5, 0.6}}.validate(2));
  CHECK_THROWS(StyleMixWeights{{1.0}}.validate(2));
  CHECK_THROWS(StyleMixWeights{{1.5, -0.5}}.validate(2));
  CHECK_NOTHROW(StyleMixWeights{{1.5, -0.5}, true}.validate(2));
  CHECK_THROWS(StyleMixWeights{{NAN, 1.0}}.validate(2));
  CHECK_THROWS(StyleMixWeights::one_hot(3, 4));
  const auto p = StyleMixWeights::pair(4, 2, 4, 0.3);
  CHECK(p.w == std::vector<double>{0.0, 0.7, 0.0, 0.3});
}

TEST_CASE("interpolation is linear in the weights") {
  const Student s = mixed_student();
  const auto& cb = s.codebook();
  CHECK(testing::bit_equal(interpolate_styles(cb, StyleMixWeights::one_hot(4, 3)), cb.embeddings().row(2)));
  const StyleMixWeights a{{0.1, 0.2, 0.3, 0.4}}, b{{0.4, 0.3, 0.2, 0.1}};
  for (double lam : {0.0, 0.25, 0.5, 0.9}) {
    StyleMixWeights c;
    for (std::size_t k = 0; k < 4; ++k) c.w.push_back(lam * a.w[k] + (1 - lam) * b.w[k]);
    const RowVector lhs = interpolate_styles(cb, c);
    const RowVector rhs = lam * interpolate_styles(cb, a) + (1 - lam) * interpolate_styles(cb, b);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
  const RowVector mid = interpolate_styles(cb, StyleMixWeights::pair(4, 1, 2, 0.5));
  CHECK((mid - 0.5 * (cb.embeddings().row(0) + cb.embeddings().row(1))).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("one-hot mixing reproduces pure-style sampling") {
  const Student s = mixed_student();
  const auto sched = build_schedule(50, 1e-3, 0.1);
  for (int style = 1; style <= 4; ++style) {
    const Matrix pure = ddim_sample(s.as_eps_model(style), 2, 16, 7, sched, 10).data;
    CHECK(testing::bit_equal(sample_mixed(s, StyleMixWeights::one_hot(4, style), 16, 7, sched, 10), pure));
  }
}

TEST_CASE("equal codebook rows mix to the shared style") {
  Student s = mixed_student();
  s.codebook().embedding_table().value.row(1) = s.codebook().embeddings().row(0);
  const auto sched = build_schedule(50, 1e-3, 0.1);
  const Matrix a = sample_mixed(s, StyleMixWeights::pair(4, 1, 2, 0.5), 8, 3, sched, 10);
  const Matrix b = sample_mixed(s, StyleMixWeights::one_hot(4, 1), 8, 3, sched, 10);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("interpolation sweep") {
  const Student s = mixed_student();
  const auto sched = build_schedule(50, 1e-3, 0.1);
  const auto sweep = interpolation_sweep(s, 1, 3, 11, 12, 5, sched, 10);
  REQUIRE(sweep.size() == 11);
  for (int g = 0; g < 11; ++g) CHECK(sweep[static_cast<std::size_t>(g)].weight_j == doctest::Approx(g / 10.0));
  CHECK(testing::bit_equal(sweep.front().samples, ddim_sample(s.as_eps_model(1), 2, 12, 5, sched, 10).data));
  CHECK(testing::bit_equal(sweep.back().samples, ddim_sample(s.as_eps_model(3), 2, 12, 5, sched, 10).data));
  CHECK_FALSE(testing::bit_equal(sweep[5].samples, sweep.front().samples));
  CHECK_THROWS(interpolation_sweep(s, 1, 3, 1, 12, 5, sched, 10));
  CHECK_THROWS(interpolation_sweep(s, 2, 2, 11, 12, 5, sched, 10));
  CHECK_THROWS(interpolation_sweep(s, 1, 5, 11, 12, 5, sched, 10));
}

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

#include "dmm/incremental.hpp"

#include <cmath>

using namespace dmm;

namespace {

const DenoiserConfig kArch{.data_dim = 2, .hidden = 8, .emb_dim = 4, .num_blocks = 2};

struct Merged {
  NoiseSchedule sched = build_schedule(20, 1e-3, 0.2);
  Denoiser t3{kArch, 3, "t3"};
  Student student;
  Discriminator disc;
  MergeRunConfig cfg;

  Merged() {
    cfg.lr = 1e-3;
    cfg.batch_size = 8;
    cfg.steps = 3;
    cfg.discriminator.head_width = 8;
    student = make_student(Denoiser(kArch, 1), 2, cfg);
    Rng rng(2);
    student.codebook().injector_out().weight.value = standard_normal(4, 4, rng);
    disc = Discriminator(student.base(), 2, cfg.discriminator, 5);
  }
};


}  // namespace

TEST_CASE("old styles are drawn uniformly") {
  const std::vector<int> old{1, 2, 3, 4};
  std::vector<int> count(5, 0);
  const int n = 10000;
  for (int k = 0; k < n; ++k) count[static_cast<std::size_t>(draw_old_style(old, static_cast<std::uint64_t>(k)))]++;
  const double sd = std::sqrt(n * 0.25 * 0.75);
  for (int s = 1; s <= 4; ++s) CHECK(std::abs(count[static_cast<std::size_t>(s)] - n / 4.0) < 3.0 * sd);
  CHECK_THROWS(draw_old_style(std::vector<int>{}, 1));
}

TEST_CASE("self-distillation from an identical snapshot has zero loss") {
  Merged f;
  const Student frozen = f.student;
  DistillState state(f.student, f.disc, f.cfg.lr);
  const LossRecord r =
      regularization_step(state, frozen, sample_style(1, 8, 1).data, std::vector<int>{1, 2}, f.sched, f.cfg, 4);
  CHECK(r.l_score == 0.0);
  CHECK(r.l_feat == 0.0);
  CHECK(testing::same_values(frozen.parameters(), f.student.parameters()));
  CHECK(state.step == 1);
}

TEST_CASE("adding no teachers returns the inputs") {
  Merged f;
  const auto r = incremental_merge(f.student, f.disc, {}, std::vector<int>{1, 2}, f.sched, f.cfg, true);
  CHECK(r.log.empty());
  CHECK(r.num_old_styles == 2);
  CHECK(testing::same_values(r.student.parameters(), f.student.parameters()));
  CHECK(testing::same_values(r.disc.parameters(), f.disc.parameters()));
}

TEST_CASE("incremental merge extends the student and keeps old codebook rows") {
  Merged f;
  const std::vector<int> pool{1, 2, 3};
  const auto r = incremental_merge(f.student, f.disc, {&f.t3}, pool, f.sched, f.cfg, true);
  CHECK(r.student.num_styles() == 3);
  CHECK(r.disc.num_classes() == 6);
  CHECK(r.log.size() == 6);
  int reg = 0;
  for (const auto& rec : r.log) {
    if (rec.worker == 1) {
      ++reg;
      CHECK(rec.style >= 1);
      CHECK(rec.style <= 2);
    } else {
      CHECK(rec.style == 3);
    }
  }
  CHECK(reg == 3);
  CHECK_FALSE(testing::same_values(r.student.parameters(), f.student.parameters()));

  const auto plain = incremental_merge(f.student, f.disc, {&f.t3}, pool, f.sched, f.cfg, false);
  CHECK(plain.log.size() == 3);
  for (const auto& rec : plain.log) CHECK(rec.style == 3);

  MergeRunConfig frozen_cfg = f.cfg;
  frozen_cfg.steps = 0;
  const auto ext = incremental_merge(f.student, f.disc, {&f.t3}, pool, f.sched, frozen_cfg, true);
  CHECK(testing::bit_equal(ext.student.codebook().embeddings().topRows(2), f.student.codebook().embeddings()));
}

TEST_CASE("incremental merge validates its inputs") {
  Merged f;
  Denoiser wrong({.data_dim = 2, .hidden = 4, .emb_dim = 4, .num_blocks = 2}, 1);
  CHECK_THROWS(incremental_merge(f.student, f.disc, {&wrong}, std::vector<int>{1}, f.sched, f.cfg, true));
  CHECK_THROWS(incremental_merge(f.student, f.disc, {&f.t3}, std::vector<int>{}, f.sched, f.cfg, true));
  Discriminator small(f.student.base(), 3, f.cfg.discriminator, 1);
  CHECK_THROWS(incremental_merge(f.student, small, {&f.t3}, std::vector<int>{1}, f.sched, f.cfg, true));
}

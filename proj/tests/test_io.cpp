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

#include "dmm/io.hpp"

#include <fstream>

using namespace dmm;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("dmm_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("overwrite protection") {
  TempDir dir;
  const fs::path p = dir.path / "sub" / "x.json";
  write_json(p, Json{{"a", 1}}, false);
  CHECK_THROWS(write_json(p, Json{{"a", 2}}, false));
  write_json(p, Json{{"a", 3}}, true);
  CHECK(read_json(p)["a"] == 3);
}

TEST_CASE("array container round trip") {
  TempDir dir;
  Rng rng(1);
  Parameter a{"a", standard_normal(3, 4, rng)}, b{"b", Matrix::Constant(1, 1, 1.0 / 3.0)};
  write_array_file(dir.path / "f.bin", Json{{"k", "v"}}, {&a, &b}, false);
  const ArrayFile f = read_array_file(dir.path / "f.bin");
  CHECK(f.metadata["k"] == "v");
  CHECK(testing::bit_equal(f.at("a"), a.value));
  CHECK(testing::bit_equal(f.at("b"), b.value));
  CHECK_THROWS(f.at("c"));

  Parameter c{"a", Matrix::Zero(3, 4)}, wrong{"b", Matrix::Zero(2, 2)};
  assign_parameters(f, {&c});
  CHECK(testing::bit_equal(c.value, a.value));
  CHECK_THROWS(assign_parameters(f, {&wrong}));

  std::ofstream(dir.path / "junk.bin") << "not a checkpoint";
  CHECK_THROWS(read_array_file(dir.path / "junk.bin"));
}

TEST_CASE("teacher and student checkpoints round trip") {
  TempDir dir;
  const DenoiserConfig arch{.data_dim = 2, .hidden = 8, .emb_dim = 4, .num_blocks = 2};
  const auto sched = build_schedule(30, 1e-4, 0.05);
  Denoiser t(arch, 4);
  save_teacher(dir.path / "t.bin", t, sched, 5, Json::object(), false);
  const TeacherCheckpoint tc = load_teacher(dir.path / "t.bin");
  CHECK(tc.style_id == 5);
  CHECK(tc.sched.num_steps == 30);
  CHECK(tc.model.config() == arch);
  const auto tp = tc.model.parameters();
  const auto op = std::as_const(t).parameters();
  REQUIRE(tp.size() == op.size());
  for (std::size_t k = 0; k < tp.size(); ++k) CHECK(testing::bit_equal(tp[k]->value, op[k]->value));

  MergeRunConfig cfg;
  cfg.discriminator.head_width = 8;
  StudentCheckpoint sc{make_student(t, 3, cfg), Discriminator(t, 3, cfg.discriminator, 2), sched, 17, "abc", {2, 4, 6},
                       Json::object()};
  save_student(dir.path / "s.bin", sc, false);
  CHECK_THROWS(save_student(dir.path / "s.bin", sc, false));
  const StudentCheckpoint back = load_student(dir.path / "s.bin");
  CHECK(back.step == 17);
  CHECK(back.config_hash == "abc");
  CHECK(back.style_ids == std::vector<int>{2, 4, 6});
  CHECK(back.disc.num_classes() == 6);
  const auto sp = back.student.parameters();
  const auto orig = std::as_const(sc.student).parameters();
  REQUIRE(sp.size() == orig.size());
  for (std::size_t k = 0; k < sp.size(); ++k) CHECK(testing::bit_equal(sp[k]->value, orig[k]->value));
  const auto dp = back.disc.parameters();
  const auto dorig = std::as_const(sc.disc).parameters();
  REQUIRE(dp.size() == dorig.size());
  for (std::size_t k = 0; k < dp.size(); ++k) CHECK(testing::bit_equal(dp[k]->value, dorig[k]->value));
}

TEST_CASE("loss log and csv round trips") {
  TempDir dir;
  const std::vector<LossRecord> log{{0, 0, 1, 0.5, 0.25, 1.5, 2.5, 0.6}, {1, 1, 2, 0.125, 3.0, 0.0, 0.0, 0.125}};
  write_loss_log(dir.path / "loss.csv", log, false);
  const auto back = read_loss_log(dir.path / "loss.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].step == 1);
  CHECK(back[1].worker == 1);
  CHECK(back[0].l_adv_disc == 2.5);
  CHECK(back[1].l_total == 0.125);

  Rng rng(3);
  const Matrix m = standard_normal(3, 3, rng);
  write_matrix_csv(dir.path / "m.csv", m, false);
  CHECK((read_matrix_csv(dir.path / "m.csv") - m).cwiseAbs().maxCoeff() < 1e-15);
  const Matrix s = standard_normal(5, 2, rng);
  write_samples_csv(dir.path / "s.csv", s, false);
  CHECK((read_samples_csv(dir.path / "s.csv") - s).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("run configuration") {
  RunConfig c;
  const Json j = to_json(c);
  const RunConfig back = run_config_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(config_hash(j) == config_hash(to_json(back)));
  CHECK(config_hash(j).size() == 16);
  CHECK(back.merge.lambda_feat == 0.001);
  CHECK(back.merge.lambda_adv == 0.01);
  CHECK(back.merge.lr == 1e-5);

  Json changed = j;
  changed["merge"]["lambda_adv"] = 0.0;
  CHECK(config_hash(changed) != config_hash(j));
  CHECK(run_config_from_json(changed).merge.lambda_adv == 0.0);

  CHECK(run_config_from_json(Json::object()).styles == std::vector<int>{1, 2, 3});
  Json unknown = j;
  unknown["merge"]["lamda_adv"] = 1.0;
  CHECK_THROWS(run_config_from_json(unknown));
  Json dup = j;
  dup["styles"] = {1, 1};
  CHECK_THROWS(run_config_from_json(dup));
  Json seeds = j;
  seeds["eval"]["ref_seed_b"] = seeds["eval"]["ref_seed_a"];
  CHECK_THROWS(run_config_from_json(seeds));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("run manifest") {
  TempDir dir;
  RunManifest m;
  m.command = "distill";
  m.config_hash = "0123";
  m.seeds["merge"] = 7;
  write_run_manifest(dir.path / "run.json", m, false);
  const Json j = read_json(dir.path / "run.json");
  CHECK(j["command"] == "distill");
  CHECK(j["seeds"]["merge"] == 7);
  CHECK(j.contains("version"));
  CHECK(j.contains("wall_seconds"));
}

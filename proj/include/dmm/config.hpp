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

// Experiment configuration: one JSON document covering schedule, network
// shape, teacher training, merging, and evaluation. Missing keys take the
// defaults below; unknown keys are rejected.

#include "dmm/diffusion.hpp"
#include "dmm/distill.hpp"
#include "dmm/fid.hpp"
#include "dmm/nets.hpp"
#include "dmm/teacher.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dmm {

using Json = nlohmann::json;

struct ScheduleConfig {
  int num_steps = 100;
  double beta_min = 1e-4;
  double beta_max = 0.02;
  ScheduleKind kind = ScheduleKind::kLinear;

  NoiseSchedule build() const;
};

struct EvalConfig {
  int n_samples = 5000;
  SamplingSpec sampling;
  std::uint64_t student_seed = 101;
  std::uint64_t teacher_seed = 202;
  std::uint64_t ref_seed_a = 303;
  std::uint64_t ref_seed_b = 404;
};

struct RunConfig {
  ScheduleConfig schedule;
  DenoiserConfig arch;
  /// Registry style ids, one teacher each, in student style order.
  std::vector<int> styles{1, 2, 3};
  TeacherTrainConfig teacher;
  /// Initialize every teacher from one base network trained on the common pool.
  bool shared_base = false;
  MergeRunConfig merge;
  EvalConfig eval;

  void validate() const;
};

Json to_json(const RunConfig& c);
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::string& path);

Json to_json(const NoiseSchedule& s);
NoiseSchedule schedule_from_json(const Json& j);
Json to_json(const DenoiserConfig& c);
DenoiserConfig arch_from_json(const Json& j);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// Hex FNV-1a of the canonical (sorted-key) serialization.
std::string config_hash(const Json& j);

}  // namespace dmm

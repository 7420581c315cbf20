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

// Persistence: a named-array checkpoint container, teacher and student
// checkpoints, the teacher manifest, run manifests, and CSV dumps.
//
// Container layout: the 8-byte magic "DMMARR1\n", a little-endian uint64 header
// length, a JSON header {"metadata": {...}, "arrays": [{name, rows, cols}]},
// then each array's row-major float64 payload in header order.

#include "dmm/config.hpp"
#include "dmm/distill.hpp"
#include "dmm/nets.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace dmm {

namespace fs = std::filesystem;

/// Throws if path exists and overwrite is false; creates parent directories.
void prepare_output(const fs::path& path, bool overwrite);

struct NamedArray {
  std::string name;
  Matrix value;
};

struct ArrayFile {
  Json metadata;
  std::vector<NamedArray> arrays;

  const Matrix& at(const std::string& name) const;
};

void write_array_file(const fs::path& path, const Json& metadata, const std::vector<const Parameter*>& arrays,
                      bool overwrite);
ArrayFile read_array_file(const fs::path& path);

/// Copies stored arrays into params by name; every parameter must be present with matching shape.
void assign_parameters(const ArrayFile& file, const std::vector<Parameter*>& params);

// Teachers ---------------------------------------------------------------------

struct TeacherCheckpoint {
  Denoiser model;
  NoiseSchedule sched;
  int style_id = 0;
  Json metadata;
};

void save_teacher(const fs::path& path, const Denoiser& model, const NoiseSchedule& sched, int style_id,
                  const Json& extra, bool overwrite);
TeacherCheckpoint load_teacher(const fs::path& path);

struct TeacherEntry {
  int index = 0;     // 1-based teacher / student style index
  int style_id = 0;  // registry style
  std::string path;  // relative to the manifest directory
  double fd_to_style = 0.0;
  bool accepted = false;
};

struct TeacherManifest {
  std::vector<TeacherEntry> teachers;
  Json schedule;
  Json arch;
};

void save_teacher_manifest(const fs::path& path, const TeacherManifest& manifest, bool overwrite);
TeacherManifest load_teacher_manifest(const fs::path& path);

/// Loaded teacher set; pointers() stays valid while the set is alive.
struct TeacherSet {
  std::vector<Denoiser> models;
  std::vector<int> style_ids;
  NoiseSchedule sched;

  std::vector<const Denoiser*> pointers() const;
};

/// Loads every teacher of a manifest and checks schedules and architectures agree.
TeacherSet load_teachers(const fs::path& manifest_path);

// Students ---------------------------------------------------------------------

struct StudentCheckpoint {
  Student student;
  Discriminator disc;
  NoiseSchedule sched;
  long long step = 0;
  std::string config_hash;
  /// Registry style id per student style.
  std::vector<int> style_ids;
  Json extra;
};

/// Metadata: N, d, arch tag, step, config hash, schedule, style ids.
void save_student(const fs::path& path, const StudentCheckpoint& ckpt, bool overwrite);
StudentCheckpoint load_student(const fs::path& path);

// Logs and samples -------------------------------------------------------------

void write_loss_log(const fs::path& path, const std::vector<LossRecord>& records, bool overwrite);
std::vector<LossRecord> read_loss_log(const fs::path& path);

void write_samples_csv(const fs::path& path, const Matrix& samples, bool overwrite);
Matrix read_samples_csv(const fs::path& path);

void write_matrix_csv(const fs::path& path, const Matrix& m, bool overwrite);
Matrix read_matrix_csv(const fs::path& path);

void write_json(const fs::path& path, const Json& j, bool overwrite);
Json read_json(const fs::path& path);

/// Provenance record written by every command.
struct RunManifest {
  std::string command;
  std::string config_hash;
  Json seeds = Json::object();
  Json inputs = Json::object();
  Json outputs = Json::object();
  double wall_seconds = 0.0;
};

std::string version_tag();
void write_run_manifest(const fs::path& path, const RunManifest& m, bool overwrite);

}  // namespace dmm

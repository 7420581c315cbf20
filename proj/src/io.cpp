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

#include "dmm/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace dmm {

namespace {

constexpr char kMagic[8] = {'D', 'M', 'M', 'A', 'R', 'R', '1', '\n'};

static_assert(std::endian::native == std::endian::little, "container format assumes a little-endian host");

std::ofstream open_out(const fs::path& path, bool overwrite, std::ios::openmode mode = std::ios::out) {
  prepare_output(path, overwrite);
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  if (!fs::exists(path)) throw std::runtime_error("missing file: " + path.string());
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

Matrix read_numeric_csv(const fs::path& path, bool header) {
  std::ifstream in = open_in(path);
  std::string line;
  if (header) std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& c : split(line, ',')) row.push_back(std::stod(c));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error(path.string() + ": ragged row " + std::to_string(rows.size() + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

void write_numeric_csv(const fs::path& path, const Matrix& m, const std::string& header, bool overwrite) {
  std::ofstream out = open_out(path, overwrite);
  out << std::setprecision(17);
  if (!header.empty()) out << header << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

}  // namespace

void prepare_output(const fs::path& path, bool overwrite) {
  if (fs::exists(path) && !overwrite) {
    throw std::runtime_error("refusing to overwrite " + path.string() + " (pass --overwrite)");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

const Matrix& ArrayFile::at(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return a.value;
  }
  throw std::out_of_range("array '" + name + "' not in checkpoint");
}

void write_array_file(const fs::path& path, const Json& metadata, const std::vector<const Parameter*>& arrays,
                      bool overwrite) {
  Json header;
  header["metadata"] = metadata;
  header["arrays"] = Json::array();
  for (const Parameter* p : arrays) {
    header["arrays"].push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  }
  const std::string text = header.dump();
  std::ofstream out = open_out(path, overwrite, std::ios::binary);
  out.write(kMagic, sizeof kMagic);
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const Parameter* p : arrays) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = p->value;
    out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ArrayFile read_array_file(const fs::path& path) {
  std::ifstream in = open_in(path, std::ios::binary);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error(path.string() + ": not a checkpoint container");
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || len > (1ULL << 30)) throw std::runtime_error(path.string() + ": corrupt header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error(path.string() + ": truncated header");
  Json header = Json::parse(text);
  ArrayFile file;
  file.metadata = header.at("metadata");
  for (const auto& a : header.at("arrays")) {
    const auto rows = a.at("rows").get<Eigen::Index>(), cols = a.at("cols").get<Eigen::Index>();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
    in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path.string() + ": truncated payload for " + a.at("name").get<std::string>());
    file.arrays.push_back({a.at("name").get<std::string>(), Matrix(rm)});
  }
  return file;
}

void assign_parameters(const ArrayFile& file, const std::vector<Parameter*>& params) {
  for (Parameter* p : params) {
    const Matrix& v = file.at(p->name);
    if (v.rows() != p->value.rows() || v.cols() != p->value.cols()) {
      throw std::runtime_error("checkpoint array " + p->name + " has shape " + std::to_string(v.rows()) + "x" +
                               std::to_string(v.cols()) + ", expected " + std::to_string(p->value.rows()) + "x" +
                               std::to_string(p->value.cols()));
    }
    p->value = v;
  }
}

// Teachers ---------------------------------------------------------------------

void save_teacher(const fs::path& path, const Denoiser& model, const NoiseSchedule& sched, int style_id,
                  const Json& extra, bool overwrite) {
  Json meta = {{"kind", "teacher"},
               {"arch", to_json(model.config())},
               {"arch_tag", model.config().arch_tag()},
               {"schedule", to_json(sched)},
               {"style_id", style_id},
               {"extra", extra}};
  write_array_file(path, meta, model.parameters(), overwrite);
}

TeacherCheckpoint load_teacher(const fs::path& path) {
  ArrayFile file = read_array_file(path);
  if (file.metadata.value("kind", "") != "teacher") throw std::runtime_error(path.string() + ": not a teacher checkpoint");
  TeacherCheckpoint t;
  t.model = Denoiser(arch_from_json(file.metadata.at("arch")), 0);
  assign_parameters(file, t.model.parameters());
  t.sched = schedule_from_json(file.metadata.at("schedule"));
  t.style_id = file.metadata.at("style_id").get<int>();
  t.metadata = file.metadata;
  return t;
}

void save_teacher_manifest(const fs::path& path, const TeacherManifest& manifest, bool overwrite) {
  Json j;
  j["schedule"] = manifest.schedule;
  j["arch"] = manifest.arch;
  j["teachers"] = Json::array();
  for (const auto& e : manifest.teachers) {
    j["teachers"].push_back({{"index", e.index},
                             {"style_id", e.style_id},
                             {"path", e.path},
                             {"fd_to_style", e.fd_to_style},
                             {"accepted", e.accepted}});
  }
  write_json(path, j, overwrite);
}

TeacherManifest load_teacher_manifest(const fs::path& path) {
  Json j = read_json(path);
  TeacherManifest m;
  m.schedule = j.at("schedule");
  m.arch = j.at("arch");
  for (const auto& e : j.at("teachers")) {
    m.teachers.push_back({e.at("index").get<int>(), e.at("style_id").get<int>(), e.at("path").get<std::string>(),
                          e.value("fd_to_style", 0.0), e.value("accepted", false)});
  }
  for (std::size_t k = 0; k < m.teachers.size(); ++k) {
    if (m.teachers[k].index != static_cast<int>(k) + 1) {
      throw std::runtime_error(path.string() + ": teacher indices must be 1..N in order");
    }
  }
  return m;
}

std::vector<const Denoiser*> TeacherSet::pointers() const {
  std::vector<const Denoiser*> out;
  for (const auto& m : models) out.push_back(&m);
  return out;
}

TeacherSet load_teachers(const fs::path& manifest_path) {
  TeacherManifest m = load_teacher_manifest(manifest_path);
  if (m.teachers.empty()) throw std::runtime_error(manifest_path.string() + ": no teachers listed");
  TeacherSet set;
  set.sched = schedule_from_json(m.schedule);
  const DenoiserConfig arch = arch_from_json(m.arch);
  const fs::path dir = manifest_path.parent_path();
  for (const auto& e : m.teachers) {
    TeacherCheckpoint t = load_teacher(dir / e.path);
    if (!(t.model.config() == arch)) {
      throw std::runtime_error("teacher " + std::to_string(e.index) + " architecture " + t.model.config().arch_tag() +
                               " differs from manifest " + arch.arch_tag());
    }
    if (t.sched.beta != set.sched.beta) {
      throw std::runtime_error("teacher " + std::to_string(e.index) + " was trained with a different schedule");
    }
    set.models.push_back(std::move(t.model));
    set.style_ids.push_back(e.style_id);
  }
  return set;
}

// Students ---------------------------------------------------------------------

void save_student(const fs::path& path, const StudentCheckpoint& ckpt, bool overwrite) {
  const Student& s = ckpt.student;
  const auto& cb = s.codebook().config();
  const auto& dc = ckpt.disc.config();
  Json meta = {{"kind", "student"},
               {"N", s.num_styles()},
               {"d", s.codebook().dim()},
               {"arch", to_json(s.base().config())},
               {"arch_tag", s.base().config().arch_tag()},
               {"step", ckpt.step},
               {"config_hash", ckpt.config_hash},
               {"schedule", to_json(ckpt.sched)},
               {"style_ids", ckpt.style_ids},
               {"codebook", {{"init_std", cb.init_std}, {"injector_bias", cb.injector_bias}}},
               {"discriminator", {{"head_width", dc.head_width}, {"renoise_fraction", dc.renoise_fraction}}},
               {"extra", ckpt.extra}};
  auto arrays = s.parameters();
  auto disc = ckpt.disc.parameters();
  arrays.insert(arrays.end(), disc.begin(), disc.end());
  write_array_file(path, meta, arrays, overwrite);
}

StudentCheckpoint load_student(const fs::path& path) {
  ArrayFile file = read_array_file(path);
  const Json& m = file.metadata;
  if (m.value("kind", "") != "student") throw std::runtime_error(path.string() + ": not a student checkpoint");
  const DenoiserConfig arch = arch_from_json(m.at("arch"));
  const int n = m.at("N").get<int>();
  StyleCodebookConfig cb;
  cb.init_std = m.at("codebook").at("init_std").get<double>();
  cb.injector_bias = m.at("codebook").at("injector_bias").get<bool>();
  DiscriminatorConfig dc;
  dc.head_width = m.at("discriminator").at("head_width").get<int>();
  dc.renoise_fraction = m.at("discriminator").at("renoise_fraction").get<double>();

  Denoiser shell(arch, 0);
  StudentCheckpoint ckpt;
  ckpt.student = Student(shell, StyleCodebook(n, arch.emb_dim, cb, 0));
  ckpt.disc = Discriminator(shell, n, dc, 0);
  assign_parameters(file, ckpt.student.parameters());
  assign_parameters(file, ckpt.disc.parameters());
  ckpt.sched = schedule_from_json(m.at("schedule"));
  ckpt.step = m.at("step").get<long long>();
  ckpt.config_hash = m.at("config_hash").get<std::string>();
  ckpt.style_ids = m.at("style_ids").get<std::vector<int>>();
  ckpt.extra = m.value("extra", Json::object());
  return ckpt;
}

// Logs and samples -------------------------------------------------------------

void write_loss_log(const fs::path& path, const std::vector<LossRecord>& records, bool overwrite) {
  std::ofstream out = open_out(path, overwrite);
  out << "step,worker,l_score,l_feat,l_adv_gen,l_adv_disc,l_total\n" << std::setprecision(10);
  for (const auto& r : records) {
    out << r.step << ',' << r.worker << ',' << r.l_score << ',' << r.l_feat << ',' << r.l_adv_gen << ','
        << r.l_adv_disc << ',' << r.l_total << '\n';
  }
}

std::vector<LossRecord> read_loss_log(const fs::path& path) {
  Matrix m = read_numeric_csv(path, true);
  std::vector<LossRecord> out;
  if (m.size() > 0 && m.cols() != 7) throw std::runtime_error(path.string() + ": expected 7 loss-log columns");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    LossRecord rec;
    rec.step = static_cast<long long>(m(r, 0));
    rec.worker = static_cast<int>(m(r, 1));
    rec.l_score = m(r, 2);
    rec.l_feat = m(r, 3);
    rec.l_adv_gen = m(r, 4);
    rec.l_adv_disc = m(r, 5);
    rec.l_total = m(r, 6);
    out.push_back(rec);
  }
  return out;
}

void write_samples_csv(const fs::path& path, const Matrix& samples, bool overwrite) {
  std::string header;
  for (Eigen::Index c = 0; c < samples.cols(); ++c) header += (c ? ",x" : "x") + std::to_string(c);
  write_numeric_csv(path, samples, header, overwrite);
}

Matrix read_samples_csv(const fs::path& path) { return read_numeric_csv(path, true); }

void write_matrix_csv(const fs::path& path, const Matrix& m, bool overwrite) {
  std::string header = "row";
  for (Eigen::Index c = 0; c < m.cols(); ++c) header += "," + std::to_string(c + 1);
  std::ofstream out = open_out(path, overwrite);
  out << header << '\n' << std::setprecision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << r + 1;
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << ',' << m(r, c);
    out << '\n';
  }
}

Matrix read_matrix_csv(const fs::path& path) {
  Matrix m = read_numeric_csv(path, true);
  if (m.cols() < 2) throw std::runtime_error(path.string() + ": not a matrix CSV");
  return m.rightCols(m.cols() - 1);
}

void write_json(const fs::path& path, const Json& j, bool overwrite) {
  std::ofstream out = open_out(path, overwrite);
  out << j.dump(2) << '\n';
}

Json read_json(const fs::path& path) {
  std::ifstream in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string version_tag() {
#ifdef DMM_VERSION
  return DMM_VERSION;
#else
  return "unversioned";
#endif
}

void write_run_manifest(const fs::path& path, const RunManifest& m, bool overwrite) {
  Json j = {{"command", m.command},     {"config_hash", m.config_hash}, {"seeds", m.seeds},
            {"inputs", m.inputs},       {"outputs", m.outputs},         {"version", version_tag()},
            {"wall_seconds", m.wall_seconds}};
  write_json(path, j, overwrite);
}

}  // namespace dmm

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

#include "dmm/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace dmm {

namespace {

// Reads an object field by field and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw std::invalid_argument(where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception& e) {
      throw std::invalid_argument(where_ + "." + key + ": " + e.what());
    }
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw std::invalid_argument(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

const char* to_string(SamplerKind k) { return k == SamplerKind::kDdim ? "ddim" : "ancestral"; }

SamplerKind sampler_from_string(const std::string& s) {
  if (s == "ddim") return SamplerKind::kDdim;
  if (s == "ancestral") return SamplerKind::kAncestral;
  throw std::invalid_argument("unknown sampler '" + s + "'");
}

}  // namespace

NoiseSchedule ScheduleConfig::build() const { return build_schedule(num_steps, beta_min, beta_max, kind); }

void RunConfig::validate() const {
  schedule.build();
  if (arch.data_dim < 1 || arch.hidden < 1 || arch.emb_dim < 2 || arch.num_blocks < 1) {
    throw std::invalid_argument("invalid architecture " + arch.arch_tag());
  }
  if (styles.empty()) throw std::invalid_argument("styles: at least one style required");
  std::set<int> unique(styles.begin(), styles.end());
  if (unique.size() != styles.size()) throw std::invalid_argument("styles: duplicate style id");
  merge.validate();
  if (eval.n_samples <= arch.data_dim) throw std::invalid_argument("eval.n_samples must exceed the data dimension");
  if (eval.ref_seed_a == eval.ref_seed_b) throw std::invalid_argument("eval: reference seeds must differ");
}

Json to_json(const NoiseSchedule& s) {
  return {{"num_steps", s.num_steps}, {"beta_min", s.beta_min}, {"beta_max", s.beta_max}, {"kind", to_string(s.kind)}};
}

NoiseSchedule schedule_from_json(const Json& j) {
  return build_schedule(j.at("num_steps").get<int>(), j.at("beta_min").get<double>(), j.at("beta_max").get<double>(),
                        schedule_kind_from_string(j.at("kind").get<std::string>()));
}

Json to_json(const DenoiserConfig& c) {
  return {{"data_dim", c.data_dim}, {"hidden", c.hidden}, {"emb_dim", c.emb_dim}, {"num_blocks", c.num_blocks}};
}

DenoiserConfig arch_from_json(const Json& j) {
  DenoiserConfig c;
  Reader r(j, "arch");
  r.get("data_dim", c.data_dim);
  r.get("hidden", c.hidden);
  r.get("emb_dim", c.emb_dim);
  r.get("num_blocks", c.num_blocks);
  r.finish();
  return c;
}

Json to_json(const RunConfig& c) {
  Json j;
  j["schedule"] = {{"num_steps", c.schedule.num_steps},
                   {"beta_min", c.schedule.beta_min},
                   {"beta_max", c.schedule.beta_max},
                   {"kind", to_string(c.schedule.kind)}};
  j["arch"] = to_json(c.arch);
  j["styles"] = c.styles;
  j["shared_base"] = c.shared_base;
  const TeacherTrainConfig& t = c.teacher;
  j["teacher"] = {{"steps", t.steps},
                  {"batch_size", t.batch_size},
                  {"lr", t.lr},
                  {"final_lr_fraction", t.final_lr_fraction},
                  {"seed", t.seed},
                  {"fd_threshold", t.fd_threshold},
                  {"eval_samples", t.eval_samples},
                  {"divergence_factor", t.divergence_factor},
                  {"divergence_window", t.divergence_window}};
  const MergeRunConfig& m = c.merge;
  j["merge"] = {{"lambda_feat", m.lambda_feat},
                {"lambda_adv", m.lambda_adv},
                {"lr", m.lr},
                {"final_lr_fraction", m.final_lr_fraction},
                {"num_workers", m.num_workers},
                {"steps", m.steps},
                {"batch_size", m.batch_size},
                {"seed", m.seed},
                {"parallel", m.parallel},
                {"background_weight", m.background_weight},
                {"pool_styles", m.pool_styles},
                {"synth_finetune", {{"images_per_teacher", m.synth.images_per_teacher}, {"steps", m.synth.steps}}},
                {"codebook", {{"init_std", m.codebook.init_std}, {"injector_bias", m.codebook.injector_bias}}},
                {"discriminator",
                 {{"head_width", m.discriminator.head_width},
                  {"renoise_fraction", m.discriminator.renoise_fraction}}}};
  j["eval"] = {{"n_samples", c.eval.n_samples},
               {"sampler", to_string(c.eval.sampling.kind)},
               {"ddim_steps", c.eval.sampling.ddim_steps},
               {"student_seed", c.eval.student_seed},
               {"teacher_seed", c.eval.teacher_seed},
               {"ref_seed_a", c.eval.ref_seed_a},
               {"ref_seed_b", c.eval.ref_seed_b}};
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  Reader root(j, "config");
  if (const Json* s = root.child("schedule")) {
    Reader r(*s, "schedule");
    std::string kind = to_string(c.schedule.kind);
    r.get("num_steps", c.schedule.num_steps);
    r.get("beta_min", c.schedule.beta_min);
    r.get("beta_max", c.schedule.beta_max);
    r.get("kind", kind);
    r.finish();
    c.schedule.kind = schedule_kind_from_string(kind);
  }
  if (const Json* a = root.child("arch")) c.arch = arch_from_json(*a);
  root.get("styles", c.styles);
  root.get("shared_base", c.shared_base);
  if (const Json* t = root.child("teacher")) {
    Reader r(*t, "teacher");
    r.get("steps", c.teacher.steps);
    r.get("batch_size", c.teacher.batch_size);
    r.get("lr", c.teacher.lr);
    r.get("final_lr_fraction", c.teacher.final_lr_fraction);
    r.get("seed", c.teacher.seed);
    r.get("fd_threshold", c.teacher.fd_threshold);
    r.get("eval_samples", c.teacher.eval_samples);
    r.get("divergence_factor", c.teacher.divergence_factor);
    r.get("divergence_window", c.teacher.divergence_window);
    r.finish();
  }
  if (const Json* m = root.child("merge")) {
    Reader r(*m, "merge");
    MergeRunConfig& mc = c.merge;
    r.get("lambda_feat", mc.lambda_feat);
    r.get("lambda_adv", mc.lambda_adv);
    r.get("lr", mc.lr);
    r.get("final_lr_fraction", mc.final_lr_fraction);
    r.get("num_workers", mc.num_workers);
    r.get("steps", mc.steps);
    r.get("batch_size", mc.batch_size);
    r.get("seed", mc.seed);
    r.get("parallel", mc.parallel);
    r.get("background_weight", mc.background_weight);
    r.get("pool_styles", mc.pool_styles);
    if (const Json* s = r.child("synth_finetune")) {
      Reader rs(*s, "merge.synth_finetune");
      rs.get("images_per_teacher", mc.synth.images_per_teacher);
      rs.get("steps", mc.synth.steps);
      rs.finish();
    }
    if (const Json* s = r.child("codebook")) {
      Reader rs(*s, "merge.codebook");
      rs.get("init_std", mc.codebook.init_std);
      rs.get("injector_bias", mc.codebook.injector_bias);
      rs.finish();
    }
    if (const Json* s = r.child("discriminator")) {
      Reader rs(*s, "merge.discriminator");
      rs.get("head_width", mc.discriminator.head_width);
      rs.get("renoise_fraction", mc.discriminator.renoise_fraction);
      rs.finish();
    }
    r.finish();
  }
  if (const Json* e = root.child("eval")) {
    Reader r(*e, "eval");
    std::string sampler = to_string(c.eval.sampling.kind);
    r.get("n_samples", c.eval.n_samples);
    r.get("sampler", sampler);
    r.get("ddim_steps", c.eval.sampling.ddim_steps);
    r.get("student_seed", c.eval.student_seed);
    r.get("teacher_seed", c.eval.teacher_seed);
    r.get("ref_seed_a", c.eval.ref_seed_a);
    r.get("ref_seed_b", c.eval.ref_seed_b);
    r.finish();
    c.eval.sampling.kind = sampler_from_string(sampler);
  }
  root.finish();
  c.teacher.arch = c.arch;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const Json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

}  // namespace dmm

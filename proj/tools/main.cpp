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

// dmm: command-line driver for data generation, teacher training, merging,
// evaluation, sampling, style mixing, plotting and the invariant suite.

#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "dmm/config.hpp"
#include "dmm/distill.hpp"
#include "dmm/fid.hpp"
#include "dmm/incremental.hpp"
#include "dmm/io.hpp"
#include "dmm/report.hpp"
#include "dmm/style_data.hpp"
#include "dmm/style_mix.hpp"
#include "dmm/teacher.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

using namespace dmm;

namespace {

using Clock = std::chrono::steady_clock;

struct Common {
  std::string config;
  std::string out;
  bool overwrite = false;
};

RunConfig load_config(const std::string& path) { return path.empty() ? RunConfig{} : load_run_config(path); }

void add_common(CLI::App* cmd, Common& c, bool needs_out = true) {
  cmd->add_option("--config", c.config, "Run configuration (JSON); defaults apply when omitted")
      ->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", c.out, needs_out ? "Output directory" : "Output directory (default: <run>/plots)");
  if (needs_out) out->required();
  cmd->add_flag("--overwrite", c.overwrite, "Replace existing outputs");
}

void save_text(const fs::path& path, const std::string& text, bool overwrite) {
  prepare_output(path, overwrite);
  std::ofstream(path) << text;
}

void finish(const fs::path& dir, RunManifest m, const RunConfig& cfg, Clock::time_point t0, bool overwrite) {
  m.config_hash = config_hash(to_json(cfg));
  m.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  write_run_manifest(dir / "manifest.json", m, overwrite);
  write_json(dir / "config.json", to_json(cfg), overwrite);
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stoi(item));
  return out;
}

// Teachers listed across several manifests, in order (e.g. the original set then an incremental one).
TeacherSet load_teacher_list(const std::vector<std::string>& paths) {
  TeacherSet all = load_teachers(paths.at(0));
  for (std::size_t k = 1; k < paths.size(); ++k) {
    TeacherSet more = load_teachers(paths[k]);
    if (to_json(more.sched) != to_json(all.sched)) {
      throw std::invalid_argument("teacher manifests " + paths[0] + " and " + paths[k] + " use different schedules");
    }
    for (auto& t : more.models) all.models.push_back(std::move(t));
    all.style_ids.insert(all.style_ids.end(), more.style_ids.begin(), more.style_ids.end());
  }
  return all;
}

// ---------------------------------------------------------------------------

int gen_data(const Common& c, int n, std::uint64_t seed) {
  const auto t0 = Clock::now();
  const RunConfig cfg = load_config(c.config);
  const fs::path dir(c.out);
  RunManifest m{.command = "gen-data"};
  for (int style : cfg.styles) {
    const fs::path p = dir / ("style_" + std::to_string(style) + ".csv");
    write_samples_csv(p, sample_style(style, n, derive_seed(seed, {static_cast<std::uint64_t>(style)})).data,
                      c.overwrite);
    m.outputs["style_" + std::to_string(style)] = p.filename().string();
  }
  std::vector<int> pool = cfg.merge.pool_styles.empty() ? cfg.styles : cfg.merge.pool_styles;
  const PoolDraw draw = sample_common_pool(n, derive_seed(seed, {0}), default_pool_mix(pool, cfg.merge.background_weight));
  write_samples_csv(dir / "common_pool.csv", draw.data, c.overwrite);
  m.outputs["common_pool"] = "common_pool.csv";
  m.seeds["data"] = seed;
  finish(dir, m, cfg, t0, c.overwrite);
  std::cout << "wrote " << cfg.styles.size() << " style files and the common pool to " << dir << "\n";
  return 0;
}

int train_teachers(const Common& c) {
  const auto t0 = Clock::now();
  const RunConfig cfg = load_config(c.config);
  const fs::path dir(c.out);
  const NoiseSchedule sched = cfg.schedule.build();
  prepare_output(dir / "teachers.json", c.overwrite);

  TeacherTrainConfig tcfg = cfg.teacher;
  tcfg.arch = cfg.arch;
  Denoiser base;
  if (cfg.shared_base) {
    std::cout << "training shared base on the common pool\n";
    base = train_shared_base(cfg.styles, tcfg, sched);
    tcfg.init_from = &base;
  }
  TeacherManifest manifest{{}, to_json(sched), to_json(cfg.arch)};
  RunManifest m{.command = "train-teachers"};
  for (std::size_t k = 0; k < cfg.styles.size(); ++k) {
    const int style = cfg.styles[k];
    TeacherResult r = train_teacher(style, tcfg, sched);
    const std::string name = "teacher_" + std::to_string(k + 1) + ".bin";
    save_teacher(dir / name, r.model, sched, style, {{"fd_to_style", r.fd_to_style}}, c.overwrite);
    std::vector<LossRecord> curve;
    for (std::size_t s = 0; s < r.loss_curve.size(); ++s) {
      curve.push_back({static_cast<long long>(s), 0, style, r.loss_curve[s], 0, 0, 0, r.loss_curve[s]});
    }
    write_loss_log(dir / ("teacher_" + std::to_string(k + 1) + "_loss.csv"), curve, c.overwrite);
    manifest.teachers.push_back({static_cast<int>(k) + 1, style, name, r.fd_to_style, r.accepted});
    std::printf("teacher %zu (style %d): FD to style data %.5f, %s\n", k + 1, style, r.fd_to_style,
                r.accepted ? "accepted" : "above threshold");
    std::fflush(stdout);
    m.outputs[name] = style;
  }
  save_teacher_manifest(dir / "teachers.json", manifest, c.overwrite);
  m.seeds["teacher"] = cfg.teacher.seed;
  finish(dir, m, cfg, t0, c.overwrite);
  return 0;
}

int distill(const Common& c, const std::string& teachers_path) {
  const auto t0 = Clock::now();
  const RunConfig cfg = load_config(c.config);
  const fs::path dir(c.out);
  prepare_output(dir / "student.bin", c.overwrite);
  const TeacherSet teachers = load_teachers(teachers_path);
  const DistillResult r = run_distillation(teachers.pointers(), teachers.style_ids, teachers.sched, cfg.merge);
  const std::string hash = config_hash(to_json(cfg));
  save_student(dir / "student.bin",
               {r.student, r.disc, teachers.sched, static_cast<long long>(cfg.merge.steps), hash, teachers.style_ids,
                Json::object()},
               c.overwrite);
  write_loss_log(dir / "loss.csv", r.log, c.overwrite);
  RunManifest m{.command = "distill"};
  m.inputs["teachers"] = teachers_path;
  m.outputs["checkpoint"] = "student.bin";
  m.outputs["loss_log"] = "loss.csv";
  m.seeds["merge"] = cfg.merge.seed;
  finish(dir, m, cfg, t0, c.overwrite);
  std::cout << "merged " << teachers.models.size() << " teachers into " << (dir / "student.bin") << "\n";
  return 0;
}

int finetune_synth(const Common& c, const std::string& checkpoint, const std::vector<std::string>& teachers_path) {
  const auto t0 = Clock::now();
  const RunConfig cfg = load_config(c.config);
  const fs::path dir(c.out);
  prepare_output(dir / "student.bin", c.overwrite);
  const StudentCheckpoint ckpt = load_student(checkpoint);
  const TeacherSet teachers = load_teacher_list(teachers_path);
  const SynthFinetuneResult r = synth_finetune(ckpt.student, ckpt.disc, teachers.pointers(), teachers.sched, cfg.merge);

  std::vector<Parameter> arrays;
  Json sets = Json::array();
  for (const SynthSet& s : r.sets) {
    arrays.push_back({"synth.teacher" + std::to_string(s.teacher), s.data});
    sets.push_back({{"teacher", s.teacher}, {"seed", s.seed}, {"rows", s.data.rows()}});
  }
  std::vector<const Parameter*> ptrs;
  for (const auto& a : arrays) ptrs.push_back(&a);
  write_array_file(dir / "synth_sets.bin", {{"kind", "synth_sets"}, {"sets", sets}}, ptrs, c.overwrite);

  save_student(dir / "student.bin",
               {r.student, r.disc, ckpt.sched, ckpt.step + cfg.merge.synth.steps, config_hash(to_json(cfg)),
                ckpt.style_ids, {{"finetuned_from", checkpoint}}},
               c.overwrite);
  write_loss_log(dir / "loss.csv", r.log, c.overwrite);
  RunManifest m{.command = "finetune-synth"};
  m.inputs["checkpoint"] = checkpoint;
  m.inputs["teachers"] = teachers_path;
  m.outputs["checkpoint"] = "student.bin";
  m.outputs["synth_sets"] = sets;
  m.seeds["merge"] = cfg.merge.seed;
  finish(dir, m, cfg, t0, c.overwrite);
  return 0;
}

int merge_incremental(const Common& c, const std::string& checkpoint, const std::string& teachers_path,
                      bool no_regularization) {
  const auto t0 = Clock::now();
  const RunConfig cfg = load_config(c.config);
  const fs::path dir(c.out);
  prepare_output(dir / "student.bin", c.overwrite);
  const StudentCheckpoint ckpt = load_student(checkpoint);
  const TeacherSet teachers = load_teachers(teachers_path);
  std::vector<int> pool = cfg.merge.pool_styles;
  if (pool.empty()) {
    std::set<int> ids(ckpt.style_ids.begin(), ckpt.style_ids.end());
    ids.insert(teachers.style_ids.begin(), teachers.style_ids.end());
    pool.assign(ids.begin(), ids.end());
  }
  const IncrementalResult r = incremental_merge(ckpt.student, ckpt.disc, teachers.pointers(), pool, ckpt.sched,
                                                cfg.merge, !no_regularization);
  std::vector<int> ids = ckpt.style_ids;
  ids.insert(ids.end(), teachers.style_ids.begin(), teachers.style_ids.end());
  save_student(dir / "student.bin",
               {r.student, r.disc, ckpt.sched, ckpt.step + cfg.merge.steps, config_hash(to_json(cfg)), ids,
                {{"extended_from", checkpoint}, {"regularized", !no_regularization}}},
               c.overwrite);
  write_loss_log(dir / "loss.csv", r.log, c.overwrite);
  RunManifest m{.command = "merge-incremental"};
  m.inputs["checkpoint"] = checkpoint;
  m.inputs["teachers"] = teachers_path;
  m.inputs["regularization"] = !no_regularization;
  m.outputs["checkpoint"] = "student.bin";
  m.seeds["merge"] = cfg.merge.seed;
  finish(dir, m, cfg, t0, c.overwrite);
  std::cout << "student now has " << r.student.num_styles() << " styles\n";
  return 0;
}

int eval_fidt(const Common& c, const std::string& checkpoint, const std::vector<std::string>& teachers_path) {
  const auto t0 = Clock::now();
  const RunConfig cfg = load_config(c.config);
  const fs::path dir(c.out);
  prepare_output(dir / "fid.csv", c.overwrite);
  const StudentCheckpoint ckpt = load_student(checkpoint);
  const TeacherSet teachers = load_teacher_list(teachers_path);
  if (static_cast<int>(teachers.models.size()) != ckpt.student.num_styles()) {
    throw std::invalid_argument("eval-fidt: student has " + std::to_string(ckpt.student.num_styles()) +
                                " styles but the manifests list " + std::to_string(teachers.models.size()) +
                                " teachers");
  }
  const EvalConfig& e = cfg.eval;
  const BatchStats cols = teacher_stats(teachers.pointers(), ckpt.sched, e.n_samples, e.teacher_seed,
                                        identity_extractor(), e.sampling);
  const FidMatrix m = fid_matrix(student_stats(ckpt.student, ckpt.student.num_styles(), ckpt.sched, e.n_samples,
                                               e.student_seed, identity_extractor(), e.sampling),
                                 cols);
  const FidMatrix ref = fid_matrix(
      teacher_stats(teachers.pointers(), ckpt.sched, e.n_samples, e.ref_seed_a, identity_extractor(), e.sampling),
      teacher_stats(teachers.pointers(), ckpt.sched, e.n_samples, e.ref_seed_b, identity_extractor(), e.sampling));
  write_matrix_csv(dir / "fid.csv", m.values, c.overwrite);
  write_matrix_csv(dir / "fid_ref.csv", ref.values, c.overwrite);
  save_text(dir / "fid_heatmap.svg",
            svg_heatmap(m.values, "FID matrix (student style i vs teacher j)", "student style", "teacher"), c.overwrite);
  save_text(dir / "fid_ref_heatmap.svg",
            svg_heatmap(ref.values, "Reference matrix (teacher i vs teacher j)", "teacher (seed a)", "teacher (seed b)"),
            c.overwrite);
  const Json summary = {{"fidt", fidt(m)},
                        {"fidt_ref", fidt(ref)},
                        {"ratio", fidt(m) / fidt(ref)},
                        {"n_samples", e.n_samples},
                        {"seeds",
                         {{"student", e.student_seed},
                          {"teacher", e.teacher_seed},
                          {"ref_a", e.ref_seed_a},
                          {"ref_b", e.ref_seed_b}}},
                        {"extractor_id", m.extractor_id}};
  write_json(dir / "fid.json", summary, c.overwrite);
  RunManifest rm{.command = "eval-fidt"};
  rm.inputs["checkpoint"] = checkpoint;
  rm.inputs["teachers"] = teachers_path;
  rm.seeds = summary["seeds"];
  rm.outputs["summary"] = "fid.json";
  finish(dir, rm, cfg, t0, c.overwrite);
  std::printf("FIDt %.6f  Tr(M_ref) %.6f  ratio %.3f\n", fidt(m), fidt(ref), fidt(m) / fidt(ref));
  return 0;
}

int sample(const Common& c, const std::string& checkpoint, int style, int n, std::uint64_t seed,
           const std::string& sampler, int ddim_steps) {
  const auto t0 = Clock::now();
  const RunConfig cfg = load_config(c.config);
  const fs::path dir(c.out);
  const StudentCheckpoint ckpt = load_student(checkpoint);
  const SamplingSpec spec{sampler == "ddim" ? SamplerKind::kDdim : SamplerKind::kAncestral, ddim_steps};
  const int dim = ckpt.student.base().config().data_dim;
  const Matrix x = draw_samples(ckpt.student.as_eps_model(style), dim, n, seed, ckpt.sched, spec).data;
  const std::string name = "samples_style" + std::to_string(style) + ".csv";
  write_samples_csv(dir / name, x, c.overwrite);
  RunManifest m{.command = "sample"};
  m.inputs["checkpoint"] = checkpoint;
  m.inputs["style"] = style;
  m.inputs["sampler"] = sampler;
  m.seeds["sample"] = seed;
  m.outputs["samples"] = name;
  finish(dir, m, cfg, t0, c.overwrite);
  return 0;
}

int mix(const Common& c, const std::string& checkpoint, const std::string& weights, const std::vector<int>& pair,
        int grid, int n, std::uint64_t seed, int ddim_steps, bool allow_extrapolation) {
  const auto t0 = Clock::now();
  const RunConfig cfg = load_config(c.config);
  const fs::path dir(c.out);
  const StudentCheckpoint ckpt = load_student(checkpoint);
  const Student& s = ckpt.student;
  RunManifest m{.command = "mix"};
  m.inputs["checkpoint"] = checkpoint;
  m.seeds["noise"] = seed;
  if (!weights.empty()) {
    StyleMixWeights w;
    std::stringstream in(weights);
    std::string item;
    while (std::getline(in, item, ',')) w.w.push_back(std::stod(item));
    w.allow_extrapolation = allow_extrapolation;
    write_samples_csv(dir / "mixed.csv", sample_mixed(s, w, n, seed, ckpt.sched, ddim_steps), c.overwrite);
    m.inputs["weights"] = w.w;
    m.outputs["samples"] = "mixed.csv";
  } else {
    const auto sweep = interpolation_sweep(s, pair[0], pair[1], grid, n, seed, ckpt.sched, ddim_steps);
    for (std::size_t g = 0; g < sweep.size(); ++g) {
      const std::string name = "sweep_" + std::to_string(g) + ".csv";
      write_samples_csv(dir / name, sweep[g].samples, c.overwrite);
      m.outputs[name] = sweep[g].weight_j;
    }
    save_text(dir / "strip.svg", svg_interpolation_strip(sweep, pair[0], pair[1]), c.overwrite);
    m.inputs["pair"] = pair;
    m.inputs["grid"] = grid;
  }
  finish(dir, m, cfg, t0, c.overwrite);
  return 0;
}

int plot(const Common& c, const std::string& run_dir, int smooth_window) {
  const auto t0 = Clock::now();
  const fs::path run(run_dir);
  const fs::path dir = c.out.empty() ? run / "plots" : fs::path(c.out);
  bool any = false;
  SummaryInputs summary;
  if (fs::exists(run / "loss.csv")) {
    save_text(dir / "loss_curves.svg", svg_loss_curves(read_loss_log(run / "loss.csv"), smooth_window), c.overwrite);
    any = true;
  }
  if (fs::exists(run / "fid.csv")) {
    summary.fid = read_matrix_csv(run / "fid.csv");
    summary.fidt = fidt(summary.fid);
    save_text(dir / "fid_heatmap.svg",
              svg_heatmap(summary.fid, "FID matrix (student style i vs teacher j)", "student style", "teacher"),
              c.overwrite);
    any = true;
  }
  if (fs::exists(run / "fid_ref.csv")) {
    summary.fid_ref = read_matrix_csv(run / "fid_ref.csv");
    summary.fidt_ref = fidt(summary.fid_ref);
  }
  if (fs::exists(run / "incremental.json")) {
    // {"before": [[...]], "after": [[...]], "after_regularized": [[...]]} diagonal comparison.
    const Json j = read_json(run / "incremental.json");
    auto diag = [&](const char* key) {
      std::vector<double> d;
      const Json& m = j.at(key);
      for (std::size_t i = 0; i < m.size(); ++i) d.push_back(m[i][i].get<double>());
      return d;
    };
    const auto before = diag("before");
    const auto after = diag("after");
    const auto reg = diag("after_regularized");
    std::vector<BarGroup> groups;
    for (std::size_t i = 0; i < after.size(); ++i) {
      groups.push_back({"style " + std::to_string(i + 1), {i < before.size() ? before[i] : 0.0, after[i], reg[i]}});
    }
    save_text(dir / "incremental.svg",
              svg_bar_chart(groups, {"before", "without regularization", "with regularization"},
                            "Diagonal FID before and after adding styles", "FID"),
              c.overwrite);
    any = true;
  }
  if (!any) throw std::runtime_error("plot: no metrics found in " + run.string() + " (loss.csv, fid.csv, incremental.json)");
  if (summary.fid.size() > 0 && summary.fid_ref.size() > 0) {
    save_text(dir / "summary.md", markdown_summary(summary), c.overwrite);
  }
  RunManifest m{.command = "plot"};
  m.inputs["run"] = run_dir;
  finish(dir, m, load_config(c.config), t0, c.overwrite);
  return 0;
}

int verify(const std::vector<std::string>& extra) {
  doctest::Context ctx;
  std::vector<const char*> args{"dmm verify"};
  for (const auto& a : extra) args.push_back(a.c_str());
  ctx.applyCommandLine(static_cast<int>(args.size()), args.data());
  ctx.setOption("no-breaks", true);
  return ctx.run();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion model merging at desk scale"};
  app.require_subcommand(1);

  Common c;
  int n = 5000;
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("gen-data", "Write per-style samples and a common-pool sample");
  add_common(gen, c);
  gen->add_option("--n", n, "Samples per file");
  gen->add_option("--seed", seed, "Data seed");

  auto* teach = app.add_subcommand("train-teachers", "Train one teacher per configured style");
  add_common(teach, c);

  std::string teachers, checkpoint;
  std::vector<std::string> teacher_list;
  auto* dist = app.add_subcommand("distill", "Merge teachers into a style-promptable student");
  add_common(dist, c);
  dist->add_option("--teachers", teachers, "Teacher manifest")->required()->check(CLI::ExistingFile);

  auto* ft = app.add_subcommand("finetune-synth", "Fine-tune a student on teacher-synthesized samples");
  add_common(ft, c);
  ft->add_option("--checkpoint", checkpoint, "Student checkpoint")->required()->check(CLI::ExistingFile);
  ft->add_option("--teachers", teacher_list, "Teacher manifests, in student style order")
      ->required()
      ->check(CLI::ExistingFile);

  bool no_reg = false;
  auto* inc = app.add_subcommand("merge-incremental", "Add new teachers to a merged student");
  add_common(inc, c);
  inc->add_option("--checkpoint", checkpoint, "Student checkpoint")->required()->check(CLI::ExistingFile);
  inc->add_option("--teachers", teachers, "Manifest of the new teachers")->required()->check(CLI::ExistingFile);
  inc->add_flag("--no-regularization", no_reg, "Disable frozen-student self-distillation");

  auto* ev = app.add_subcommand("eval-fidt", "FID matrix, reference matrix and FIDt");
  add_common(ev, c);
  ev->add_option("--checkpoint", checkpoint, "Student checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--teachers", teacher_list, "Teacher manifests, in student style order")
      ->required()
      ->check(CLI::ExistingFile);

  int style = 1, ddim_steps = 50;
  std::string sampler = "ancestral";
  auto* smp = app.add_subcommand("sample", "Draw samples for one style");
  add_common(smp, c);
  smp->add_option("--checkpoint", checkpoint, "Student checkpoint")->required()->check(CLI::ExistingFile);
  smp->add_option("--style", style, "1-based style index")->required();
  smp->add_option("--n", n, "Number of samples");
  smp->add_option("--seed", seed, "Sampling seed");
  smp->add_option("--sampler", sampler, "ancestral or ddim")->check(CLI::IsMember({"ancestral", "ddim"}));
  smp->add_option("--ddim-steps", ddim_steps, "DDIM inference steps");

  std::string weights;
  std::vector<int> pair;
  int grid = 11;
  bool extrapolate = false;
  auto* mx = app.add_subcommand("mix", "Sample from a weighted combination of style embeddings");
  add_common(mx, c);
  mx->add_option("--checkpoint", checkpoint, "Student checkpoint")->required()->check(CLI::ExistingFile);
  auto* w_opt = mx->add_option("--weights", weights, "Comma-separated weights, one per style");
  auto* p_opt = mx->add_option("--pair", pair, "Two style indices i j for an interpolation sweep")->expected(2);
  w_opt->excludes(p_opt);
  mx->add_option("--grid", grid, "Sweep grid points");
  mx->add_option("--n", n, "Samples per mixture");
  mx->add_option("--seed", seed, "Noise seed");
  mx->add_option("--ddim-steps", ddim_steps, "DDIM inference steps");
  mx->add_flag("--allow-extrapolation", extrapolate, "Permit negative weights");

  std::string run_dir;
  int smooth_window = 100;
  auto* pl = app.add_subcommand("plot", "Figures and a markdown summary for a run directory");
  add_common(pl, c, false);
  pl->add_option("--run", run_dir, "Directory holding loss.csv / fid.csv / incremental.json")
      ->required()
      ->check(CLI::ExistingDirectory);
  pl->add_option("--smooth", smooth_window, "Loss smoothing window");

  auto* ver = app.add_subcommand("verify", "Run the invariant suite; trailing arguments go to the test runner");
  ver->prefix_command();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return gen_data(c, n, seed);
    if (*teach) return train_teachers(c);
    if (*dist) return distill(c, teachers);
    if (*ft) return finetune_synth(c, checkpoint, teacher_list);
    if (*inc) return merge_incremental(c, checkpoint, teachers, no_reg);
    if (*ev) return eval_fidt(c, checkpoint, teacher_list);
    if (*smp) return sample(c, checkpoint, style, n, seed, sampler, ddim_steps);
    if (*mx) {
      if (weights.empty() && pair.size() != 2) throw CLI::ValidationError("mix: pass --weights or --pair i j");
      return mix(c, checkpoint, weights, pair, grid, n, seed, ddim_steps, extrapolate);
    }
    if (*pl) return plot(c, run_dir, smooth_window);
    if (*ver) return verify(ver->remaining());
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

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

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only 4,5] [--out DIR]
//
// Criteria 4-7 share one toy benchmark (three 2D styles, teachers trained
// once, merges cached across criteria). Figures and a JSON record of every
// measured quantity are written to --out.

#include "../test_util.hpp"

#include "dmm/distill.hpp"
#include "dmm/fid.hpp"
#include "dmm/incremental.hpp"
#include "dmm/io.hpp"
#include "dmm/report.hpp"
#include "dmm/style_mix.hpp"
#include "dmm/teacher.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

using namespace dmm;

namespace {

struct Outcome {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sample_std(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

void save_text(const fs::path& path, const std::string& text) {
  prepare_output(path, true);
  std::ofstream(path) << text;
}

// ---------------------------------------------------------------------------
// Toy benchmark shared by criteria 4-8.

class Benchmark {
 public:
  static constexpr int kStyles[3] = {1, 2, 3};
  static constexpr int kEvalSamples = 5000;
  static constexpr std::uint64_t kStudentSeed = 101;
  static constexpr std::uint64_t kTeacherSeed = 202;
  static constexpr std::uint64_t kRefSeed = 303;

  explicit Benchmark(fs::path out) : out_(std::move(out)), sched_(build_schedule(100, 1e-4, 0.02)) {}

  const NoiseSchedule& sched() const { return sched_; }
  const fs::path& out() const { return out_; }

  static TeacherTrainConfig teacher_config() {
    TeacherTrainConfig c;
    c.arch = {.data_dim = 2, .hidden = 64, .emb_dim = 64, .num_blocks = 3};
    c.steps = 5000;
    c.batch_size = 256;
    c.lr = 1e-3;
    c.final_lr_fraction = 0.1;
    c.seed = 7;
    return c;
  }

  static MergeRunConfig merge_config(std::uint64_t seed) {
    MergeRunConfig c;
    c.lr = 1e-3;
    c.final_lr_fraction = 0.1;
    c.steps = 4000;
    c.batch_size = 128;
    c.seed = seed;
    c.discriminator.head_width = 64;
    return c;
  }

  static MergeRunConfig finetune_config(const MergeRunConfig& merge) {
    MergeRunConfig c = merge;
    c.lr = 1e-5;
    c.final_lr_fraction = 1.0;
    c.synth.images_per_teacher = 200;
    c.synth.steps = 1000;
    return c;
  }

  const std::vector<const Denoiser*>& teachers() {
    if (teacher_ptrs_.empty()) {
      const auto t0 = std::chrono::steady_clock::now();
      for (int style : kStyles) {
        TeacherResult r = train_teacher(style, teacher_config(), sched_);
        std::printf("  teacher %d: FD to style data %.5f (%s)\n", style, r.fd_to_style,
                    r.accepted ? "accepted" : "above threshold");
        std::fflush(stdout);
        teachers_.push_back(std::make_unique<Denoiser>(std::move(r.model)));
      }
      for (const auto& t : teachers_) teacher_ptrs_.push_back(t.get());
      std::printf("  teachers trained in %.0f s\n", seconds_since(t0));
    }
    return teacher_ptrs_;
  }

  std::vector<const Denoiser*> teacher_subset(int count) {
    const auto& all = teachers();
    return {all.begin(), all.begin() + count};
  }

  /// Teacher columns at the shared column seed.
  const BatchStats& teacher_columns() {
    if (!columns_) columns_ = teacher_stats(teachers(), sched_, kEvalSamples, kTeacherSeed);
    return *columns_;
  }

  BatchStats columns(int count) {
    BatchStats c = teacher_columns();
    c.stats.resize(static_cast<std::size_t>(count));
    c.seeds.resize(static_cast<std::size_t>(count));
    return c;
  }

  const FidMatrix& reference() {
    if (!reference_) {
      reference_ = fid_matrix(teacher_stats(teachers(), sched_, kEvalSamples, kRefSeed), teacher_columns());
    }
    return *reference_;
  }

  FidMatrix evaluate(const Student& s) {
    return fid_matrix(student_stats(s, s.num_styles(), sched_, kEvalSamples, kStudentSeed),
                      columns(s.num_styles()));
  }

  struct Run {
    DistillResult result;
    FidMatrix fid;
  };

  /// Three-style merge; full == false drops the feature and adversarial terms.
  const Run& merge(std::uint64_t seed, bool full) {
    const auto key = std::make_pair(seed, full);
    auto it = runs_.find(key);
    if (it != runs_.end()) return it->second;
    MergeRunConfig cfg = merge_config(seed);
    if (!full) {
      cfg.lambda_feat = 0.0;
      cfg.lambda_adv = 0.0;
    }
    const auto t0 = std::chrono::steady_clock::now();
    DistillResult r = run_distillation(teachers(), kStyles, sched_, cfg);
    FidMatrix m = evaluate(r.student);
    std::printf("  merge seed %llu %s: FIDt %.5f (%.0f s)\n", static_cast<unsigned long long>(seed),
                full ? "score+feat+adv" : "score-only", fidt(m), seconds_since(t0));
    std::fflush(stdout);
    return runs_.emplace(key, Run{std::move(r), std::move(m)}).first->second;
  }

  static double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

 private:
  fs::path out_;
  NoiseSchedule sched_;
  std::vector<std::unique_ptr<Denoiser>> teachers_;
  std::vector<const Denoiser*> teacher_ptrs_;
  std::optional<BatchStats> columns_;
  std::optional<FidMatrix> reference_;
  std::map<std::pair<std::uint64_t, bool>, Run> runs_;
};

// ---------------------------------------------------------------------------

Outcome criterion1(Json& record) {
  double worst = 0.0;
  for (const NoiseSchedule& sched : {build_schedule(100, 1e-4, 0.02), build_schedule(1000, 1e-4, 0.02)}) {
    Rng rng(sched.num_steps);
    for (int k = 0; k < 1000; ++k) {
      const Matrix x0 = standard_normal(1, 2, rng) * 3.0;
      const Matrix eps = standard_normal(1, 2, rng);
      const int t = uniform_ints(1, 0, sched.num_steps - 1, rng).front();
      const Matrix back = predict_x0(add_noise(x0, eps, t, sched), eps, t, sched);
      worst = std::max(worst, (back - x0).norm() / x0.norm());
    }
  }
  record["max_relative_error"] = worst;
  return {1, "algebraic round trip", worst < 1e-6,
          fmt("max relative error %.2e over 2x1000 triples (T=100, T=1000); tolerance 1e-6", worst)};
}

Outcome criterion2(Json& record) {
  Rng rng(2);
  double err_1d = 0.0, err_diag = 0.0, self = 0.0, asym = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Matrix p = standard_normal(1, 4, rng);
    const double m1 = p(0, 0), m2 = p(0, 1), s1 = std::exp(p(0, 2)), s2 = std::exp(p(0, 3));
    const double expected = (m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2);
    const double got = frechet_distance(Vector::Constant(1, m1), Matrix::Constant(1, 1, s1 * s1),
                                        Vector::Constant(1, m2), Matrix::Constant(1, 1, s2 * s2));
    err_1d = std::max(err_1d, std::abs(got - expected));
  }
  for (int k = 0; k < 200; ++k) {
    const int d = 2 + k % 7;
    const Vector mu1 = standard_normal(d, 1, rng), mu2 = standard_normal(d, 1, rng);
    const Vector v1 = standard_normal(d, 1, rng).array().exp(), v2 = standard_normal(d, 1, rng).array().exp();
    double expected = (mu1 - mu2).squaredNorm();
    for (int i = 0; i < d; ++i) expected += v1(i) + v2(i) - 2.0 * std::sqrt(v1(i) * v2(i));
    const double got = frechet_distance(mu1, Matrix(v1.asDiagonal()), mu2, Matrix(v2.asDiagonal()));
    err_diag = std::max(err_diag, std::abs(got - expected));
  }
  for (int k = 0; k < 100; ++k) {
    const int d = 2 + k % 15;
    const Matrix a = standard_normal(d, d, rng), b = standard_normal(d, d, rng);
    const Matrix s1 = a * a.transpose() / d, s2 = b * b.transpose() / d;
    const Vector mu1 = standard_normal(d, 1, rng), mu2 = standard_normal(d, 1, rng);
    self = std::max(self, std::abs(frechet_distance(mu1, s1, mu1, s1)));
    asym = std::max(asym, std::abs(frechet_distance(mu1, s1, mu2, s2) - frechet_distance(mu2, s2, mu1, s1)));
  }
  const Matrix samples = standard_normal(5000, 2, rng);
  const GaussianStats g = gaussian_stats(samples);
  self = std::max(self, std::abs(frechet_distance(g, g)));
  record["max_error_1d"] = err_1d;
  record["max_error_diagonal"] = err_diag;
  record["max_fid_self"] = self;
  record["max_asymmetry"] = asym;
  const bool pass = err_1d < 1e-9 && err_diag < 1e-9 && self < 1e-6 && asym < 1e-9;
  return {2, "Frechet oracle", pass,
          fmt("1D %.1e, diagonal %.1e (tol 1e-9); FID(P,P) %.1e (tol 1e-6); asymmetry %.1e (tol 1e-9)", err_1d,
              err_diag, self, asym)};
}

Outcome criterion3(Json& record) {
  const DenoiserConfig arch{.data_dim = 2, .hidden = 4, .emb_dim = 4, .num_blocks = 1};
  const NoiseSchedule sched = build_schedule(20, 1e-3, 0.2);
  Denoiser teacher(arch, 2, "teacher");
  MergeRunConfig cfg;
  cfg.codebook.init_std = 0.5;
  cfg.discriminator.head_width = 4;
  Student student = make_student(Denoiser(arch, 1), 2, cfg);
  Discriminator disc(student.base(), 2, cfg.discriminator, 3);
  auto tp = teacher.parameters();
  auto sp = student.parameters();
  auto dp = disc.trainable_parameters();
  testing::randomize(tp, 0.6, 1);
  testing::randomize(sp, 0.6, 2);
  testing::randomize(dp, 0.6, 3);
  const std::size_t n_student = student.parameter_count(), n_disc = count_parameters(disc.trainable_parameters());

  const Matrix x0 = sample_style(2, 6, 4).data;
  const PassSeeds seeds = PassSeeds::derive(5);
  const Supervisor sup = teacher_supervisor(teacher, 2);

  std::vector<std::pair<std::string, double>> errors;
  using Pick = Var GeneratorGraph::*;
  const std::pair<const char*, Pick> picks[] = {{"L_score", &GeneratorGraph::l_score},
                                                {"L_feat", &GeneratorGraph::l_feat},
                                                {"L_adv(generator)", &GeneratorGraph::l_adv},
                                                {"L_total", &GeneratorGraph::l_total}};
  for (const auto& [name, pick] : picks) {
    auto loss = [&, pick = pick] {
      Tape tape;
      return (build_generator_graph(tape, student, disc, sup, x0, sched, cfg, seeds).*pick).value()(0, 0);
    };
    Tape tape;
    const GeneratorGraph g = build_generator_graph(tape, student, disc, sup, x0, sched, cfg, seeds);
    Gradients grads;
    tape.backward(g.*pick, grads);
    errors.emplace_back(name, testing::gradient_error(sp, loss, grads));
  }
  Tape gen;
  const GeneratorGraph g = build_generator_graph(gen, student, disc, sup, x0, sched, cfg, seeds);
  auto dloss = [&] {
    Tape tape;
    return build_discriminator_graph(tape, disc, g.x0_student, g.x0_teacher, 2, 2, sched, seeds).value()(0, 0);
  };
  Tape tape;
  Gradients grads;
  tape.backward(build_discriminator_graph(tape, disc, g.x0_student, g.x0_teacher, 2, 2, sched, seeds), grads);
  errors.emplace_back("L_adv(discriminator)", testing::gradient_error(dp, dloss, grads));

  bool pass = n_student <= 200 && n_disc <= 200;
  std::string detail = fmt("student %zu params, discriminator head %zu params;", n_student, n_disc);
  for (const auto& [name, err] : errors) {
    pass = pass && err < 1e-4;
    detail += fmt(" %s %.1e", name.c_str(), err);
    record[name] = err;
  }
  return {3, "gradient fidelity", pass, detail + " (tol 1e-4)"};
}

Outcome criterion4(Benchmark& bench, Json& record) {
  const auto& run = bench.merge(0, true);
  const Matrix& m = run.fid.values;
  const FidMatrix& ref = bench.reference();
  bool dominant = true;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j && !(m(i, i) < m(i, j))) dominant = false;
    }
  }
  const double ratio = fidt(m) / fidt(ref);
  record["fid"] = to_json(m);
  record["fid_ref"] = to_json(ref.values);
  record["fidt"] = fidt(m);
  record["fidt_ref"] = fidt(ref);
  record["ratio"] = ratio;
  save_text(bench.out() / "fid_matrix.svg", svg_heatmap(m, "FID matrix (student style i vs teacher j)", "student style",
                                                        "teacher"));
  save_text(bench.out() / "fid_reference.svg",
            svg_heatmap(ref.values, "Reference matrix (teacher i vs teacher j)", "teacher (seed a)", "teacher (seed b)"));
  save_text(bench.out() / "loss_curves.svg", svg_loss_curves(run.result.log, 100));
  save_text(bench.out() / "summary.md", markdown_summary({m, ref.values, fidt(m), fidt(ref), {}}));
  return {4, "merge quality", dominant && ratio <= 1.5,
          fmt("strict diagonal dominance %s; FIDt %.5f vs Tr(M_ref) %.5f, ratio %.3f (limit 1.5)",
              dominant ? "holds" : "violated", fidt(m), fidt(ref), ratio)};
}

Outcome criterion5(Benchmark& bench, Json& record) {
  std::vector<double> score_only, full, tuned;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    score_only.push_back(fidt(bench.merge(seed, false).fid));
    const auto& run = bench.merge(seed, true);
    full.push_back(fidt(run.fid));
    const auto t0 = std::chrono::steady_clock::now();
    const SynthFinetuneResult ft = synth_finetune(run.result.student, run.result.disc, bench.teachers(), bench.sched(),
                                                  Benchmark::finetune_config(Benchmark::merge_config(seed)));
    tuned.push_back(fidt(bench.evaluate(ft.student)));
    std::printf("  synth fine-tune seed %llu: FIDt %.5f (%.0f s)\n", static_cast<unsigned long long>(seed),
                tuned.back(), Benchmark::seconds_since(t0));
    std::fflush(stdout);
  }
  const double noise = std::sqrt(0.5 * (sample_std(score_only) * sample_std(score_only) + sample_std(full) * sample_std(full)));
  const double med_score = median(score_only), med_full = median(full), med_tuned = median(tuned);
  record["score_only"] = score_only;
  record["full"] = full;
  record["finetuned"] = tuned;
  record["run_noise"] = noise;
  const std::vector<BarGroup> groups{{"seed 0", {score_only[0], full[0], tuned[0]}},
                                     {"seed 1", {score_only[1], full[1], tuned[1]}},
                                     {"seed 2", {score_only[2], full[2], tuned[2]}},
                                     {"median", {med_score, med_full, med_tuned}}};
  save_text(bench.out() / "ablation.svg",
            svg_bar_chart(groups, {"score only", "score+feat+adv", "+ synth fine-tune"}, "Loss ablation", "FIDt"));
  const bool trend = med_full <= med_score + noise;
  const bool finetune = med_tuned <= med_full;
  return {5, "ablation trend", trend && finetune,
          fmt("median FIDt score-only %.5f, full %.5f (run noise %.5f): %s; after synth fine-tune %.5f: %s", med_score,
              med_full, noise, trend ? "full <= score-only + noise" : "full worse beyond noise", med_tuned,
              finetune ? "not increased" : "increased")};
}

Outcome criterion6(Benchmark& bench, Json& record) {
  const NoiseSchedule& sched = bench.sched();
  const std::vector<int> old_ids{1, 2};
  MergeRunConfig cfg = Benchmark::merge_config(0);
  auto t0 = std::chrono::steady_clock::now();
  const DistillResult two = run_distillation(bench.teacher_subset(2), old_ids, sched, cfg);
  const Matrix before = bench.evaluate(two.student).values;
  std::printf("  two-style merge: diagonal %.5f %.5f (%.0f s)\n", before(0, 0), before(1, 1),
              Benchmark::seconds_since(t0));

  const std::vector<const Denoiser*> added{bench.teachers()[2]};
  const std::vector<int> pool{1, 2, 3};
  Matrix after[2];
  for (int reg = 0; reg < 2; ++reg) {
    t0 = std::chrono::steady_clock::now();
    const IncrementalResult r = incremental_merge(two.student, two.disc, added, pool, sched, cfg, reg == 1);
    after[reg] = bench.evaluate(r.student).values;
    std::printf("  add style 3 %s regularization: diagonal %.5f %.5f %.5f (%.0f s)\n", reg ? "with" : "without",
                after[reg](0, 0), after[reg](1, 1), after[reg](2, 2), Benchmark::seconds_since(t0));
    std::fflush(stdout);
  }
  const double floor = bench.reference().values(2, 2);
  double min_growth = INFINITY, max_drift = 0.0;
  for (int i = 0; i < 2; ++i) {
    min_growth = std::min(min_growth, after[0](i, i) / before(i, i));
    max_drift = std::max(max_drift, std::abs(after[1](i, i) / before(i, i) - 1.0));
  }
  const double new_ratio = after[1](2, 2) / floor;
  record["before"] = to_json(before);
  record["after_without_regularization"] = to_json(after[0]);
  record["after_with_regularization"] = to_json(after[1]);
  record["new_style_floor"] = floor;
  const std::vector<BarGroup> groups{
      {"style 1", {before(0, 0), after[0](0, 0), after[1](0, 0)}},
      {"style 2", {before(1, 1), after[0](1, 1), after[1](1, 1)}},
      {"style 3", {floor, after[0](2, 2), after[1](2, 2)}}};
  save_text(bench.out() / "incremental.svg",
            svg_bar_chart(groups, {"before (style 3: split-half floor)", "without regularization", "with regularization"},
                          "Diagonal FID after adding style 3", "FID"));
  const bool pass = min_growth >= 2.0 && max_drift <= 0.2 && new_ratio <= 1.5;
  return {6, "catastrophic forgetting", pass,
          fmt("without regularization old diagonal grows >= %.2fx (need >= 2); with regularization old diagonal "
              "drifts <= %.1f%% (limit 20%%), new style %.2fx its split-half floor (limit 1.5)",
              min_growth, 100.0 * max_drift, new_ratio)};
}

Outcome criterion7(Benchmark& bench, Json& record) {
  const Student& s = bench.merge(0, true).result.student;
  const NoiseSchedule& sched = bench.sched();
  const int n = 500, steps = 50;
  const std::uint64_t seed = 77;
  bool exact = true;
  for (int i = 1; i <= s.num_styles(); ++i) {
    const Matrix pure = ddim_sample(s.as_eps_model(i), 2, n, seed, sched, steps).data;
    exact = exact && testing::bit_equal(sample_mixed(s, StyleMixWeights::one_hot(s.num_styles(), i), n, seed, sched,
                                                     steps),
                                        pure);
  }
  const auto sweep = interpolation_sweep(s, 1, 2, 11, n, seed, sched, steps);
  const bool strip = sweep.size() == 11 &&
                     testing::bit_equal(sweep.front().samples, ddim_sample(s.as_eps_model(1), 2, n, seed, sched, steps).data) &&
                     testing::bit_equal(sweep.back().samples, ddim_sample(s.as_eps_model(2), 2, n, seed, sched, steps).data);
  save_text(bench.out() / "interpolation_strip.svg", svg_interpolation_strip(sweep, 1, 2));

  Rng rng(7);
  double lin = 0.0;
  const int k = s.num_styles();
  auto simplex = [&] {
    Matrix u = standard_normal(1, k, rng).array().exp();
    u /= u.sum();
    StyleMixWeights w;
    for (int i = 0; i < k; ++i) w.w.push_back(u(0, i));
    const double total = std::accumulate(w.w.begin(), w.w.end(), 0.0);
    w.w.back() += 1.0 - total;
    return w;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const StyleMixWeights a = simplex(), b = simplex();
    const double lam = uniform_ints(1, 0, 1000, rng).front() / 1000.0;
    StyleMixWeights c;
    for (int i = 0; i < k; ++i) c.w.push_back(lam * a.w[static_cast<std::size_t>(i)] + (1 - lam) * b.w[static_cast<std::size_t>(i)]);
    const RowVector expected = lam * interpolate_styles(s.codebook(), a) + (1 - lam) * interpolate_styles(s.codebook(), b);
    lin = std::max(lin, (interpolate_styles(s.codebook(), c) - expected).cwiseAbs().maxCoeff());
  }
  record["one_hot_bit_exact"] = exact;
  record["strip_points"] = sweep.size();
  record["linearity_error"] = lin;
  return {7, "style-mixing endpoints", exact && strip && lin <= 1e-9,
          fmt("one-hot samples bit-exact: %s; 11-point strip with exact endpoints: %s; linearity error %.1e (tol 1e-9)",
              exact ? "yes" : "no", strip ? "yes" : "no", lin)};
}

Outcome criterion8(Benchmark& bench, Json& record) {
  MergeRunConfig cfg = Benchmark::merge_config(3);
  cfg.num_workers = 6;
  const auto& teachers = bench.teachers();
  Student student = make_student(*teachers.front(), 3, cfg);
  Discriminator disc(student.base(), 3, cfg.discriminator, 4);
  DistillState seq(student, disc, cfg.lr), par(student, disc, cfg.lr);
  const std::vector<int> pool{1, 2, 3};
  const BatchSource source = common_pool_source(cfg, pool);
  double worst = 0.0;
  for (int step = 0; step < 10; ++step) {
    cfg.parallel = false;
    train_rounds(seq, teachers, source, bench.sched(), cfg, 1, 9);
    cfg.parallel = true;
    train_rounds(par, teachers, source, bench.sched(), cfg, 1, 9);
    auto flatten = [](const DistillState& s) {
      std::vector<double> v;
      for (const Parameter* p : s.student.parameters()) v.insert(v.end(), p->value.data(), p->value.data() + p->value.size());
      for (const Parameter* p : s.disc.parameters()) v.insert(v.end(), p->value.data(), p->value.data() + p->value.size());
      return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
    };
    const Vector a = flatten(seq), b = flatten(par);
    worst = std::max(worst, (a - b).norm() / a.norm());
  }
  int mismatches = 0;
  for (int n = 1; n <= 16; ++n) {
    for (int j = 0; j < 1000; ++j) {
      if (assign_teacher(j, n) != (j % n) + 1) ++mismatches;
    }
  }
  record["max_relative_trajectory_difference"] = worst;
  record["assignment_mismatches"] = mismatches;
  return {8, "sharding equivalence", worst <= 1e-5 && mismatches == 0,
          fmt("sequential vs threaded 6-worker run: max relative parameter difference %.1e over 10 steps (tol 1e-5); "
              "assign_teacher mismatches %d of 16000",
              worst, mismatches)};
}

Outcome criterion9(Json& record) {
  const DenoiserConfig arch{.data_dim = 2, .hidden = 16, .emb_dim = 8, .num_blocks = 3};
  const NoiseSchedule sched = build_schedule(100, 1e-4, 0.02);
  const Denoiser base(arch, 1);
  const std::size_t d = static_cast<std::size_t>(arch.emb_dim);
  bool heads = true, mapping = true, accounting = true;
  Rng rng(5);
  const Matrix x = standard_normal(16, 2, rng);
  const std::vector<int> s(16, 3);
  for (int n = 1; n <= 8; ++n) {
    Discriminator disc(base, n, {.head_width = 16, .renoise_fraction = 0.25}, static_cast<std::uint64_t>(n));
    Tape t0;
    const Matrix before = disc.logits(t0, t0.constant(x), s, false).value();
    heads = heads && disc.num_classes() == 2 * n && before.cols() == 2 * n;
    for (int k = 1; k <= 3; ++k) {
      Discriminator ext = disc;
      ext.extend(k, 11);
      Tape t1;
      const Matrix after = ext.logits(t1, t1.constant(x), s, false).value();
      heads = heads && ext.num_classes() == 2 * (n + k) && after.cols() == 2 * (n + k);
      Tape t2;
      heads = heads && ext.discriminate(t2, t2.constant(x), n + k, sched, 1, false).logits.cols() == 2 * (n + k);
      mapping = mapping && testing::bit_equal(after.leftCols(n), before.leftCols(n)) &&
                testing::bit_equal(after.middleCols(n + k, n), before.rightCols(n));
    }
    for (bool bias : {true, false}) {
      const Student st(base, StyleCodebook(n, arch.emb_dim, {.init_std = 0.02, .injector_bias = bias}, 2));
      const std::size_t injector = 2 * d * d + (bias ? 2 * d : 0);
      const std::size_t extra = st.parameter_count() - base.parameter_count();
      accounting = accounting && extra == static_cast<std::size_t>(n) * d + injector;
      const Student grown(base, st.codebook().extended(2, 3));
      accounting = accounting && grown.parameter_count() - base.parameter_count() == static_cast<std::size_t>(n + 2) * d + injector;
    }
  }
  record["head_sizes"] = heads;
  record["extension_mapping"] = mapping;
  record["parameter_accounting"] = accounting;
  return {9, "architecture contracts", heads && mapping && accounting,
          fmt("head length 2N for N=1..8 and after extension: %s; old real/fake rows preserved: %s; "
              "extra parameters = N*d + injector: %s",
              heads ? "yes" : "no", mapping ? "yes" : "no", accounting ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::vector<int> only;
  std::string out = "acceptance_out";
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',')->check(CLI::Range(1, 9));
  app.add_option("--out", out, "Directory for figures and the JSON record");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected = only.empty() ? std::set<int>{1, 2, 3, 4, 5, 6, 7, 8, 9}
                                              : std::set<int>(only.begin(), only.end());

  Benchmark bench(out);
  Json record;
  std::vector<Outcome> outcomes;
  for (int id : selected) {
    const auto t0 = std::chrono::steady_clock::now();
    Json& rec = record[std::to_string(id)];
    Outcome o;
    try {
      switch (id) {
        case 1: o = criterion1(rec); break;
        case 2: o = criterion2(rec); break;
        case 3: o = criterion3(rec); break;
        case 4: o = criterion4(bench, rec); break;
        case 5: o = criterion5(bench, rec); break;
        case 6: o = criterion6(bench, rec); break;
        case 7: o = criterion7(bench, rec); break;
        case 8: o = criterion8(bench, rec); break;
        case 9: o = criterion9(rec); break;
      }
    } catch (const std::exception& e) {
      o = {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what()};
    }
    rec["pass"] = o.pass;
    rec["detail"] = o.detail;
    rec["seconds"] = Benchmark::seconds_since(t0);
    std::printf("criterion %d %s: %s (%.0f s) %s\n", o.id, o.pass ? "PASS" : "FAIL", o.name.c_str(),
                Benchmark::seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
    outcomes.push_back(o);
  }
  write_json(fs::path(out) / "acceptance.json", record, true);

  std::printf("\nsummary\n");
  int failed = 0;
  for (const Outcome& o : outcomes) {
    std::printf("  criterion %d %s: %s\n", o.id, o.pass ? "PASS" : "FAIL", o.name.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%zu criteria, %d failed\n", outcomes.size(), failed);
  return failed == 0 ? 0 : 1;
}

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

#include "dmm/fid.hpp"

#include "dmm/nets.hpp"
#include "dmm/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dmm {

namespace {

constexpr double kSymmetryTolerance = 1e-8;
constexpr double kClampRatio = 1e-10;

Matrix checked_symmetric(const Matrix& s, const char* what) {
  if (s.rows() != s.cols()) throw std::invalid_argument(std::string(what) + ": covariance is not square");
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
    throw std::invalid_argument(std::string(what) + ": covariance is not symmetric");
  }
  return 0.5 * (s + s.transpose());
}

}  // namespace

FeatureExtractor identity_extractor() {
  return FeatureExtractor{"identity", [](const Matrix& x) { return x; }};
}

GaussianStats gaussian_stats(const Matrix& samples, const FeatureExtractor& extractor) {
  Matrix f = extractor.apply(samples);
  if (f.rows() <= f.cols()) {
    throw std::invalid_argument("gaussian_stats: " + std::to_string(f.rows()) + " samples cannot give a full-rank " +
                                std::to_string(f.cols()) + "-dimensional covariance");
  }
  if (!f.allFinite()) throw std::invalid_argument("gaussian_stats: non-finite features");
  GaussianStats s;
  s.mean = f.colwise().mean().transpose();
  Matrix centered = f.rowwise() - s.mean.transpose();
  s.cov = centered.transpose() * centered / static_cast<double>(f.rows() - 1);
  return s;
}

Matrix psd_sqrt(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw std::runtime_error("psd_sqrt: eigendecomposition failed");
  Vector ev = es.eigenvalues();
  const double radius = ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    ev(i) = ev(i) < kClampRatio * radius ? 0.0 : std::sqrt(ev(i));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double frechet_distance(const Vector& mu1, const Matrix& sigma1, const Vector& mu2, const Matrix& sigma2) {
  const Eigen::Index d = mu1.size();
  if (mu2.size() != d || sigma1.rows() != d || sigma2.rows() != d) {
    throw std::invalid_argument("frechet_distance: dimension mismatch");
  }
  Matrix s1 = checked_symmetric(sigma1, "frechet_distance");
  Matrix s2 = checked_symmetric(sigma2, "frechet_distance");
  Matrix r1 = psd_sqrt(s1);
  Matrix inner = r1 * s2 * r1;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(inner, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("frechet_distance: eigendecomposition failed");
  // Only negative eigenvalues are clamped here: the inner spectrum is squared
  // relative to the covariances, so a relative cut would drop real mass.
  const Vector& ev = es.eigenvalues();
  double tr_sqrt = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) tr_sqrt += std::sqrt(std::max(ev(i), 0.0));
  const double mean_term = (mu1 - mu2).squaredNorm();
  const double trace_term = s1.trace() + s2.trace() - 2.0 * tr_sqrt;
  // Clamped spectra can leave the trace term a rounding error below zero.
  return mean_term + std::max(trace_term, 0.0);
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  return frechet_distance(a.mean, a.cov, b.mean, b.cov);
}

SampleBatch draw_samples(const EpsModel& model, int data_dim, int n, std::uint64_t seed, const NoiseSchedule& sched,
                         const SamplingSpec& spec) {
  switch (spec.kind) {
    case SamplerKind::kAncestral:
      return ancestral_sample(model, data_dim, n, seed, sched);
    case SamplerKind::kDdim:
      return ddim_sample(model, data_dim, n, seed, sched, spec.ddim_steps);
  }
  throw std::invalid_argument("unknown sampler");
}

double fidt(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("fidt: matrix is not square");
  return m.trace();
}

double fidt(const FidMatrix& m) { return fidt(m.values); }

std::uint64_t cell_seed(std::uint64_t base, int index) { return derive_seed(base, {static_cast<std::uint64_t>(index)}); }

Matrix frechet_matrix(const std::vector<GaussianStats>& rows, const std::vector<GaussianStats>& cols) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = frechet_distance(rows[i], cols[j]);
  return m;
}

namespace {

void check_sample_count(int n_samples, int feature_dim) {
  if (n_samples <= feature_dim) {
    throw std::invalid_argument("FID: n_samples " + std::to_string(n_samples) +
                                " is below the covariance-rank threshold " + std::to_string(feature_dim + 1));
  }
}

GaussianStats sampled_stats(const EpsModel& model, int dim, int n, std::uint64_t seed, const NoiseSchedule& sched,
                            const SamplingSpec& spec, const FeatureExtractor& extractor, const std::string& cell) {
  try {
    return gaussian_stats(draw_samples(model, dim, n, seed, sched, spec).data, extractor);
  } catch (const std::exception& e) {
    throw std::runtime_error("FID cell " + cell + ": " + e.what());
  }
}

}  // namespace

BatchStats student_stats(const Student& student, int num_styles, const NoiseSchedule& sched, int n_samples,
                         std::uint64_t seed, const FeatureExtractor& extractor, const SamplingSpec& spec) {
  if (num_styles < 1 || student.num_styles() < num_styles) {
    throw std::invalid_argument("student_stats: student has " + std::to_string(student.num_styles()) +
                                " styles but " + std::to_string(num_styles) + " were requested");
  }
  const int dim = student.base().config().data_dim;
  check_sample_count(n_samples, static_cast<int>(extractor.apply(Matrix::Zero(1, dim)).cols()));
  BatchStats out{{}, {}, n_samples, extractor.id};
  for (int i = 1; i <= num_styles; ++i) {
    out.seeds.push_back(cell_seed(seed, i));
    out.stats.push_back(sampled_stats(student.as_eps_model(i), dim, n_samples, out.seeds.back(), sched, spec,
                                      extractor, "student style " + std::to_string(i)));
  }
  return out;
}

BatchStats teacher_stats(const std::vector<const Denoiser*>& teachers, const NoiseSchedule& sched, int n_samples,
                         std::uint64_t seed, const FeatureExtractor& extractor, const SamplingSpec& spec) {
  if (teachers.empty()) throw std::invalid_argument("teacher_stats: no teachers");
  const int dim = teachers.front()->config().data_dim;
  check_sample_count(n_samples, static_cast<int>(extractor.apply(Matrix::Zero(1, dim)).cols()));
  BatchStats out{{}, {}, n_samples, extractor.id};
  for (std::size_t j = 0; j < teachers.size(); ++j) {
    const int index = static_cast<int>(j) + 1;
    out.seeds.push_back(cell_seed(seed, index));
    out.stats.push_back(sampled_stats(teachers[j]->as_eps_model(), dim, n_samples, out.seeds.back(), sched, spec,
                                      extractor, "teacher " + std::to_string(index)));
  }
  return out;
}

FidMatrix fid_matrix(const BatchStats& rows, const BatchStats& cols) {
  if (rows.extractor_id != cols.extractor_id) throw std::invalid_argument("fid_matrix: extractor mismatch");
  if (rows.n_samples != cols.n_samples) throw std::invalid_argument("fid_matrix: sample-count mismatch");
  FidMatrix out;
  out.values = frechet_matrix(rows.stats, cols.stats);
  out.n_samples = rows.n_samples;
  out.row_seeds = rows.seeds;
  out.col_seeds = cols.seeds;
  out.extractor_id = rows.extractor_id;
  return out;
}

FidMatrix fid_matrix(const Student& student, const std::vector<const Denoiser*>& teachers, const NoiseSchedule& sched,
                     int n_samples, std::uint64_t student_seed, std::uint64_t teacher_seed,
                     const FeatureExtractor& extractor, const SamplingSpec& spec) {
  const int n = static_cast<int>(teachers.size());
  if (n < 1) throw std::invalid_argument("fid_matrix: no teachers");
  if (student.num_styles() < n) {
    throw std::invalid_argument("fid_matrix: student has " + std::to_string(student.num_styles()) +
                                " styles but " + std::to_string(n) + " teachers were given");
  }
  return fid_matrix(student_stats(student, n, sched, n_samples, student_seed, extractor, spec),
                    teacher_stats(teachers, sched, n_samples, teacher_seed, extractor, spec));
}

FidMatrix reference_matrix(const std::vector<const Denoiser*>& teachers, const NoiseSchedule& sched, int n_samples,
                           std::uint64_t seed_a, std::uint64_t seed_b, const FeatureExtractor& extractor,
                           const SamplingSpec& spec) {
  if (seed_a == seed_b) throw std::invalid_argument("reference_matrix: seed_a must differ from seed_b");
  return fid_matrix(teacher_stats(teachers, sched, n_samples, seed_a, extractor, spec),
                    teacher_stats(teachers, sched, n_samples, seed_b, extractor, spec));
}

}  // namespace dmm

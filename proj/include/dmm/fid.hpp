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

// Gaussian moment fitting, the closed-form Frechet distance, and the pairwise
// student/teacher distance matrix whose trace is the merge-quality scalar.

#include "dmm/autodiff.hpp"
#include "dmm/diffusion.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dmm {

class Student;
class Denoiser;

struct FeatureExtractor {
  std::string id;
  std::function<Matrix(const Matrix&)> apply;
};

/// Raw coordinates as features.
FeatureExtractor identity_extractor();

struct GaussianStats {
  Vector mean;
  Matrix cov;
};

/// Sample mean and unbiased covariance of extracted features. Requires more
/// samples than feature dimensions.
GaussianStats gaussian_stats(const Matrix& samples, const FeatureExtractor& extractor = identity_extractor());

/// ||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2). Inputs are symmetrized;
/// asymmetry beyond 1e-8 is rejected. Negative eigenvalues of the inner product are
/// clamped to zero.
double frechet_distance(const Vector& mu1, const Matrix& sigma1, const Vector& mu2, const Matrix& sigma2);
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

/// Symmetric PSD square root with eigenvalues below 1e-10 of the spectral radius clamped to zero.
Matrix psd_sqrt(const Matrix& sym);

enum class SamplerKind { kAncestral, kDdim };

struct SamplingSpec {
  SamplerKind kind = SamplerKind::kAncestral;
  int ddim_steps = 50;
};

SampleBatch draw_samples(const EpsModel& model, int data_dim, int n, std::uint64_t seed, const NoiseSchedule& sched,
                         const SamplingSpec& spec);

struct FidMatrix {
  /// Rows: student style i; columns: teacher j (or teacher batch b for the reference matrix).
  Matrix values;
  int n_samples = 0;
  std::vector<std::uint64_t> row_seeds;
  std::vector<std::uint64_t> col_seeds;
  std::string extractor_id;

  int size() const { return static_cast<int>(values.rows()); }
};

double fidt(const Matrix& m);
double fidt(const FidMatrix& m);

/// Per-batch statistics for one side of a distance matrix.
struct BatchStats {
  std::vector<GaussianStats> stats;
  std::vector<std::uint64_t> seeds;
  int n_samples = 0;
  std::string extractor_id;
};

/// Student batches for styles 1..num_styles, seeds cell_seed(seed, i).
BatchStats student_stats(const Student& student, int num_styles, const NoiseSchedule& sched, int n_samples,
                         std::uint64_t seed, const FeatureExtractor& extractor = identity_extractor(),
                         const SamplingSpec& spec = {});
/// Teacher batches, seeds cell_seed(seed, j).
BatchStats teacher_stats(const std::vector<const Denoiser*>& teachers, const NoiseSchedule& sched, int n_samples,
                         std::uint64_t seed, const FeatureExtractor& extractor = identity_extractor(),
                         const SamplingSpec& spec = {});

FidMatrix fid_matrix(const BatchStats& rows, const BatchStats& cols);

/// M(i, j) = FD(student style i, teacher j). Student batch seeds derive from
/// student_seed, teacher batch seeds from teacher_seed.
FidMatrix fid_matrix(const Student& student, const std::vector<const Denoiser*>& teachers, const NoiseSchedule& sched,
                     int n_samples, std::uint64_t student_seed, std::uint64_t teacher_seed,
                     const FeatureExtractor& extractor = identity_extractor(), const SamplingSpec& spec = {});

/// M_ref(i, j) = FD(teacher i at seed_a, teacher j at seed_b); seed_a must differ from seed_b.
FidMatrix reference_matrix(const std::vector<const Denoiser*>& teachers, const NoiseSchedule& sched, int n_samples,
                           std::uint64_t seed_a, std::uint64_t seed_b,
                           const FeatureExtractor& extractor = identity_extractor(), const SamplingSpec& spec = {});

/// Build a matrix from precomputed per-row and per-column statistics.
Matrix frechet_matrix(const std::vector<GaussianStats>& rows, const std::vector<GaussianStats>& cols);

/// Per-cell seeds used by fid_matrix / reference_matrix.
std::uint64_t cell_seed(std::uint64_t base, int index);

}  // namespace dmm

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

#include "dmm/diffusion.hpp"

#include "dmm/random.hpp"

#include <cmath>

namespace dmm {

namespace {

constexpr double kAlphaBarFloor = 1e-12;

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

void require_row_count(std::span<const int> t, const Matrix& x, const char* what) {
  if (static_cast<Eigen::Index>(t.size()) != x.rows()) {
    throw std::invalid_argument(std::string(what) + ": timestep count differs from batch size");
  }
}

}  // namespace

double NoiseSchedule::sqrt_alpha_bar(int t) const {
  check_timestep(t);
  return std::sqrt(alpha_bar[static_cast<std::size_t>(t)]);
}

double NoiseSchedule::sqrt_one_minus_alpha_bar(int t) const {
  check_timestep(t);
  return std::sqrt(1.0 - alpha_bar[static_cast<std::size_t>(t)]);
}

void NoiseSchedule::check_timestep(int t) const {
  if (t < 0 || t >= num_steps) {
    throw std::out_of_range("timestep " + std::to_string(t) + " outside [0, " + std::to_string(num_steps - 1) + "]");
  }
}

NoiseSchedule build_schedule(int num_steps, double beta_min, double beta_max, ScheduleKind kind) {
  if (num_steps < 1) throw std::invalid_argument("build_schedule: num_steps must be >= 1");
  if (!(beta_min > 0.0 && beta_max < 1.0 && beta_min <= beta_max)) {
    throw std::invalid_argument("build_schedule: need 0 < beta_min <= beta_max < 1");
  }
  NoiseSchedule s;
  s.num_steps = num_steps;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  s.kind = kind;
  s.beta.resize(static_cast<std::size_t>(num_steps));
  s.alpha_bar.resize(static_cast<std::size_t>(num_steps));
  double running = 1.0;
  for (int t = 0; t < num_steps; ++t) {
    const double frac = num_steps == 1 ? 0.0 : static_cast<double>(t) / (num_steps - 1);
    const double b = beta_min + (beta_max - beta_min) * frac;
    s.beta[static_cast<std::size_t>(t)] = b;
    running *= 1.0 - b;
    s.alpha_bar[static_cast<std::size_t>(t)] = running;
  }
  return s;
}

void SampleBatch::validate() const {
  if (data.rows() < 1) throw std::invalid_argument("sample batch is empty");
  if (!data.allFinite()) throw std::invalid_argument("sample batch contains non-finite values");
}

Matrix add_noise(const Matrix& x0, const Matrix& eps, int t, const NoiseSchedule& sched) {
  require_same_shape(x0, eps, "add_noise");
  return sched.sqrt_alpha_bar(t) * x0 + sched.sqrt_one_minus_alpha_bar(t) * eps;
}

Matrix add_noise(const Matrix& x0, const Matrix& eps, std::span<const int> t, const NoiseSchedule& sched) {
  require_same_shape(x0, eps, "add_noise");
  require_row_count(t, x0, "add_noise");
  Matrix out(x0.rows(), x0.cols());
  for (Eigen::Index r = 0; r < x0.rows(); ++r) {
    const int tr = t[static_cast<std::size_t>(r)];
    out.row(r) = sched.sqrt_alpha_bar(tr) * x0.row(r) + sched.sqrt_one_minus_alpha_bar(tr) * eps.row(r);
  }
  return out;
}

namespace {

double checked_sqrt_alpha_bar(const NoiseSchedule& sched, int t) {
  sched.check_timestep(t);
  const double ab = sched.alpha_bar[static_cast<std::size_t>(t)];
  if (ab <= kAlphaBarFloor) {
    throw DegenerateScheduleError("alpha_bar[" + std::to_string(t) + "] = " + std::to_string(ab) +
                                  " underflows; cannot recover x0");
  }
  return std::sqrt(ab);
}

}  // namespace

Matrix predict_x0(const Matrix& x_t, const Matrix& eps_hat, int t, const NoiseSchedule& sched) {
  require_same_shape(x_t, eps_hat, "predict_x0");
  const double sa = checked_sqrt_alpha_bar(sched, t);
  return (x_t - sched.sqrt_one_minus_alpha_bar(t) * eps_hat) / sa;
}

Matrix predict_x0(const Matrix& x_t, const Matrix& eps_hat, std::span<const int> t, const NoiseSchedule& sched) {
  require_same_shape(x_t, eps_hat, "predict_x0");
  require_row_count(t, x_t, "predict_x0");
  Matrix out(x_t.rows(), x_t.cols());
  for (Eigen::Index r = 0; r < x_t.rows(); ++r) {
    const int tr = t[static_cast<std::size_t>(r)];
    const double sa = checked_sqrt_alpha_bar(sched, tr);
    out.row(r) = (x_t.row(r) - sched.sqrt_one_minus_alpha_bar(tr) * eps_hat.row(r)) / sa;
  }
  return out;
}

Var predict_x0(Var x_t, Var eps_hat, std::span<const int> t, const NoiseSchedule& sched) {
  require_same_shape(x_t.value(), eps_hat.value(), "predict_x0");
  require_row_count(t, x_t.value(), "predict_x0");
  Vector inv_sa(x_t.rows()), noise_coeff(x_t.rows());
  for (Eigen::Index r = 0; r < x_t.rows(); ++r) {
    const int tr = t[static_cast<std::size_t>(r)];
    inv_sa(r) = 1.0 / checked_sqrt_alpha_bar(sched, tr);
    noise_coeff(r) = -sched.sqrt_one_minus_alpha_bar(tr) * inv_sa(r);
  }
  return add(row_scale(x_t, inv_sa), row_scale(eps_hat, noise_coeff));
}

namespace {

Matrix eval_model(const EpsModel& model, const Matrix& x, int t) {
  std::vector<int> ts(static_cast<std::size_t>(x.rows()), t);
  Matrix eps = model(x, ts);
  if (eps.rows() != x.rows() || eps.cols() != x.cols()) {
    throw std::runtime_error("sampler: model returned wrong shape at t=" + std::to_string(t));
  }
  if (!eps.allFinite()) throw std::runtime_error("sampler: model returned non-finite values at t=" + std::to_string(t));
  return eps;
}

void check_sampler_args(int data_dim, int n) {
  if (n < 1) throw std::invalid_argument("sampler: batch size must be >= 1");
  if (data_dim < 1) throw std::invalid_argument("sampler: data_dim must be >= 1");
}

}  // namespace

SampleBatch ancestral_sample(const EpsModel& model, int data_dim, int n, std::uint64_t seed,
                             const NoiseSchedule& sched) {
  check_sampler_args(data_dim, n);
  Rng rng(seed);
  Matrix x = standard_normal(n, data_dim, rng);
  for (int t = sched.num_steps - 1; t >= 0; --t) {
    const auto ti = static_cast<std::size_t>(t);
    const double beta = sched.beta[ti];
    const double ab = sched.alpha_bar[ti];
    Matrix eps = eval_model(model, x, t);
    Matrix mean = (x - (beta / std::sqrt(1.0 - ab)) * eps) / std::sqrt(1.0 - beta);
    if (t > 0) {
      const double ab_prev = sched.alpha_bar[ti - 1];
      const double var = beta * (1.0 - ab_prev) / (1.0 - ab);
      x = mean + std::sqrt(var) * standard_normal(n, data_dim, rng);
    } else {
      x = std::move(mean);
    }
  }
  return SampleBatch{std::move(x), std::nullopt};
}

std::vector<int> ddim_timesteps(int num_steps, int num_inference_steps) {
  if (num_inference_steps < 1) throw std::invalid_argument("ddim: num_inference_steps must be >= 1");
  if (num_inference_steps > num_steps) {
    throw std::invalid_argument("ddim: num_inference_steps " + std::to_string(num_inference_steps) +
                                " exceeds schedule length " + std::to_string(num_steps));
  }
  std::vector<int> ts;
  ts.reserve(static_cast<std::size_t>(num_inference_steps));
  for (int k = num_inference_steps - 1; k >= 0; --k) {
    // Evenly spaced, always ending at the noisiest step.
    const auto offset = static_cast<long long>(num_inference_steps - 1 - k) * num_steps / num_inference_steps;
    ts.push_back(num_steps - 1 - static_cast<int>(offset));
  }
  return ts;
}

Matrix ddim_from_noise(const EpsModel& model, Matrix x, const NoiseSchedule& sched, int num_inference_steps) {
  const std::vector<int> ts = ddim_timesteps(sched.num_steps, num_inference_steps);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const int t = ts[k];
    Matrix eps = eval_model(model, x, t);
    Matrix x0 = predict_x0(x, eps, t, sched);
    const double ab_prev = k + 1 < ts.size() ? sched.alpha_bar[static_cast<std::size_t>(ts[k + 1])] : 1.0;
    x = std::sqrt(ab_prev) * x0 + std::sqrt(1.0 - ab_prev) * eps;
  }
  return x;
}

SampleBatch ddim_sample(const EpsModel& model, int data_dim, int n, std::uint64_t seed, const NoiseSchedule& sched,
                        int num_inference_steps) {
  check_sampler_args(data_dim, n);
  ddim_timesteps(sched.num_steps, num_inference_steps);
  Rng rng(seed);
  Matrix x = standard_normal(n, data_dim, rng);
  return SampleBatch{ddim_from_noise(model, std::move(x), sched, num_inference_steps), std::nullopt};
}

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kLinear:
      return "linear";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
  if (s == "linear") return ScheduleKind::kLinear;
  throw std::invalid_argument("unknown schedule kind: " + s);
}

}  // namespace dmm

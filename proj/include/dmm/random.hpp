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

#include "dmm/autodiff.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace dmm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Child seed for a (seed, tag...) path, e.g. derive_seed(run_seed, {step, worker}).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// n integers uniform over [lo, hi].
std::vector<int> uniform_ints(std::size_t n, int lo, int hi, Rng& rng);

}  // namespace dmm

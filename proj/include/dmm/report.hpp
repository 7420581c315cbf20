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

// SVG figures and the markdown summary emitted by `plot`.

#include "dmm/autodiff.hpp"
#include "dmm/distill.hpp"
#include "dmm/style_mix.hpp"

#include <string>
#include <vector>

namespace dmm {

/// Heatmap with rows and columns labeled 1..N and the value printed in each cell.
std::string svg_heatmap(const Matrix& m, const std::string& title, const std::string& row_axis,
                        const std::string& col_axis);

/// One panel per loss component (l_score, l_feat, l_adv_gen, l_adv_disc), averaged over
/// workers per step and smoothed with a trailing window.
std::string svg_loss_curves(const std::vector<LossRecord>& records, int smooth_window);

/// Row of scatter panels, one per sweep point.
std::string svg_interpolation_strip(const std::vector<SweepPoint>& sweep, int i, int j);

struct BarGroup {
  std::string label;
  std::vector<double> values;  // one per series
};

std::string svg_bar_chart(const std::vector<BarGroup>& groups, const std::vector<std::string>& series,
                          const std::string& title, const std::string& y_axis);

/// Scatter of point clouds, one color per cloud.
std::string svg_scatter(const std::vector<Matrix>& clouds, const std::vector<std::string>& labels,
                        const std::string& title);

struct SummaryInputs {
  Matrix fid;
  Matrix fid_ref;
  double fidt = 0.0;
  double fidt_ref = 0.0;
  std::vector<std::string> notes;
};

std::string markdown_summary(const SummaryInputs& in);

}  // namespace dmm

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

#include "dmm/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace dmm {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" "
         "fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 12) {
  return "<text x=\"" + fmt(x, 6) + "\" y=\"" + fmt(y, 6) + "\" text-anchor=\"" + anchor + "\" font-size=\"" +
         std::to_string(size) + "\">" + escape(s) + "</text>\n";
}

// Sequential white-to-blue ramp.
std::string ramp(double u) {
  u = std::clamp(u, 0.0, 1.0);
  const int r = static_cast<int>(247 - u * (247 - 8));
  const int g = static_cast<int>(251 - u * (251 - 48));
  const int b = static_cast<int>(255 - u * (255 - 107));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string polyline(const std::vector<double>& xs, const std::vector<double>& ys, const char* color) {
  std::string pts;
  for (std::size_t k = 0; k < xs.size(); ++k) pts += fmt(xs[k], 6) + "," + fmt(ys[k], 6) + " ";
  return "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
         "\"/>\n";
}

struct Box {
  double x, y, w, h;
};

// Scatter panel with its own bounding box.
std::string scatter_panel(const Box& b, const std::vector<const Matrix*>& clouds, double lo, double hi,
                          std::size_t max_points) {
  std::string s = "<rect x=\"" + fmt(b.x, 6) + "\" y=\"" + fmt(b.y, 6) + "\" width=\"" + fmt(b.w, 6) +
                  "\" height=\"" + fmt(b.h, 6) + "\" fill=\"none\" stroke=\"#999\"/>\n";
  for (std::size_t c = 0; c < clouds.size(); ++c) {
    const Matrix& m = *clouds[c];
    const Eigen::Index n = std::min<Eigen::Index>(m.rows(), static_cast<Eigen::Index>(max_points));
    for (Eigen::Index r = 0; r < n; ++r) {
      const double y = m.cols() > 1 ? m(r, 1) : 0.0;
      const double px = b.x + std::clamp((m(r, 0) - lo) / (hi - lo), 0.0, 1.0) * b.w;
      const double py = b.y + b.h - std::clamp((y - lo) / (hi - lo), 0.0, 1.0) * b.h;
      s += "<circle cx=\"" + fmt(px, 6) + "\" cy=\"" + fmt(py, 6) + "\" r=\"1\" fill=\"" + kPalette[c % 10] +
           "\" fill-opacity=\"0.5\"/>\n";
    }
  }
  return s;
}

}  // namespace

std::string svg_heatmap(const Matrix& m, const std::string& title, const std::string& row_axis,
                        const std::string& col_axis) {
  const int n_r = static_cast<int>(m.rows()), n_c = static_cast<int>(m.cols());
  const int cell = 56, left = 70, top = 50;
  const int w = left + n_c * cell + 30, h = top + n_r * cell + 50;
  const double lo = m.size() ? m.minCoeff() : 0.0, hi = m.size() ? m.maxCoeff() : 1.0;
  std::string s = header(w, h);
  s += text(left + n_c * cell / 2.0, 20, title, "middle", 14);
  for (int r = 0; r < n_r; ++r) {
    for (int c = 0; c < n_c; ++c) {
      const double v = m(r, c);
      const double u = hi > lo ? (std::log1p(v - lo) / std::log1p(hi - lo)) : 0.0;
      s += "<rect x=\"" + std::to_string(left + c * cell) + "\" y=\"" + std::to_string(top + r * cell) +
           "\" width=\"" + std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"" + ramp(u) +
           "\" stroke=\"white\"/>\n";
      s += "<text x=\"" + std::to_string(left + c * cell + cell / 2) + "\" y=\"" +
           std::to_string(top + r * cell + cell / 2 + 4) + "\" text-anchor=\"middle\" font-size=\"10\" fill=\"" +
           (u > 0.6 ? "white" : "black") + "\">" + fmt(v, 3) + "</text>\n";
    }
    s += text(left - 10, top + r * cell + cell / 2.0 + 4, std::to_string(r + 1), "end");
  }
  for (int c = 0; c < n_c; ++c) s += text(left + c * cell + cell / 2.0, top + n_r * cell + 16, std::to_string(c + 1));
  s += text(left + n_c * cell / 2.0, top + n_r * cell + 36, col_axis);
  s += "<text x=\"16\" y=\"" + std::to_string(top + n_r * cell / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       std::to_string(top + n_r * cell / 2) + ")\">" + escape(row_axis) + "</text>\n";
  return s + "</svg>\n";
}

std::string svg_loss_curves(const std::vector<LossRecord>& records, int smooth_window) {
  std::map<long long, std::array<double, 5>> per_step;  // 4 components + count
  for (const auto& r : records) {
    auto& a = per_step[r.step];
    a[0] += r.l_score;
    a[1] += r.l_feat;
    a[2] += r.l_adv_gen;
    a[3] += r.l_adv_disc;
    a[4] += 1.0;
  }
  const char* names[] = {"l_score", "l_feat", "l_adv_gen", "l_adv_disc"};
  std::vector<double> steps;
  std::array<std::vector<double>, 4> series;
  for (const auto& [step, a] : per_step) {
    steps.push_back(static_cast<double>(step));
    for (int k = 0; k < 4; ++k) series[static_cast<std::size_t>(k)].push_back(a[static_cast<std::size_t>(k)] / a[4]);
  }
  const int pw = 300, ph = 180, margin = 50;
  std::string s = header(2 * (pw + margin) + 20, 2 * (ph + margin) + 30);
  s += text(pw + margin, 18, "Training losses (mean over workers)", "middle", 14);
  for (int k = 0; k < 4; ++k) {
    const double x0 = margin + (k % 2) * (pw + margin), y0 = 40 + (k / 2) * (ph + margin);
    std::vector<double> ys = series[static_cast<std::size_t>(k)];
    std::vector<double> sm(ys.size());
    double acc = 0.0;
    const std::size_t win = static_cast<std::size_t>(std::max(1, smooth_window));
    for (std::size_t i = 0; i < ys.size(); ++i) {
      acc += ys[i];
      if (i >= win) acc -= ys[i - win];
      sm[i] = acc / static_cast<double>(std::min(i + 1, win));
    }
    s += "<rect x=\"" + fmt(x0, 6) + "\" y=\"" + fmt(y0, 6) + "\" width=\"" + std::to_string(pw) + "\" height=\"" +
         std::to_string(ph) + "\" fill=\"none\" stroke=\"#999\"/>\n";
    s += text(x0 + pw / 2.0, y0 - 6, names[k]);
    if (sm.empty()) continue;
    const double lo = *std::min_element(sm.begin(), sm.end()), hi = *std::max_element(sm.begin(), sm.end());
    const double span = hi > lo ? hi - lo : 1.0;
    const double s_lo = steps.front(), s_span = steps.back() > steps.front() ? steps.back() - steps.front() : 1.0;
    std::vector<double> px, py;
    for (std::size_t i = 0; i < sm.size(); ++i) {
      px.push_back(x0 + (steps[i] - s_lo) / s_span * pw);
      py.push_back(y0 + ph - (sm[i] - lo) / span * ph);
    }
    s += polyline(px, py, kPalette[k]);
    s += text(x0 - 4, y0 + 10, fmt(hi, 3), "end", 10);
    s += text(x0 - 4, y0 + ph, fmt(lo, 3), "end", 10);
    s += text(x0 + pw, y0 + ph + 14, "step " + fmt(steps.back(), 6), "end", 10);
  }
  return s + "</svg>\n";
}

std::string svg_interpolation_strip(const std::vector<SweepPoint>& sweep, int i, int j) {
  const int pw = 110, gap = 8, top = 40;
  const int w = static_cast<int>(sweep.size()) * (pw + gap) + gap;
  std::string s = header(w, top + pw + 40);
  s += text(w / 2.0, 18, "Style " + std::to_string(i) + " to style " + std::to_string(j), "middle", 14);
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    const Box b{gap + static_cast<double>(k) * (pw + gap), static_cast<double>(top), static_cast<double>(pw),
                static_cast<double>(pw)};
    s += scatter_panel(b, {&sweep[k].samples}, -3.5, 3.5, 1500);
    s += text(b.x + pw / 2.0, top + pw + 16, "w_j=" + fmt(sweep[k].weight_j, 2), "middle", 10);
  }
  return s + "</svg>\n";
}

std::string svg_bar_chart(const std::vector<BarGroup>& groups, const std::vector<std::string>& series,
                          const std::string& title, const std::string& y_axis) {
  const int group_w = 40 + 24 * static_cast<int>(series.size()), left = 70, top = 40, ph = 220;
  const int w = left + static_cast<int>(groups.size()) * group_w + 160, h = top + ph + 60;
  double hi = 0.0;
  for (const auto& g : groups) {
    for (double v : g.values) hi = std::max(hi, v);
  }
  if (hi <= 0.0) hi = 1.0;
  std::string s = header(w, h);
  s += text(left + groups.size() * group_w / 2.0, 20, title, "middle", 14);
  s += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(top + ph) + "\" x2=\"" +
       std::to_string(left + static_cast<int>(groups.size()) * group_w) + "\" y2=\"" + std::to_string(top + ph) +
       "\" stroke=\"black\"/>\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double gx = left + static_cast<double>(g) * group_w + 20;
    for (std::size_t k = 0; k < groups[g].values.size(); ++k) {
      const double v = groups[g].values[k], bh = v / hi * ph;
      s += "<rect x=\"" + fmt(gx + 24.0 * static_cast<double>(k), 6) + "\" y=\"" + fmt(top + ph - bh, 6) +
           "\" width=\"20\" height=\"" + fmt(bh, 6) + "\" fill=\"" + kPalette[k % 10] + "\"/>\n";
      s += text(gx + 24.0 * static_cast<double>(k) + 10, top + ph - bh - 4, fmt(v, 3), "middle", 9);
    }
    s += text(gx + 12.0 * static_cast<double>(groups[g].values.size()), top + ph + 16, groups[g].label);
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double lx = left + static_cast<double>(groups.size()) * group_w + 10, ly = top + 16.0 * static_cast<double>(k);
    s += "<rect x=\"" + fmt(lx, 6) + "\" y=\"" + fmt(ly, 6) + "\" width=\"10\" height=\"10\" fill=\"" +
         kPalette[k % 10] + "\"/>\n";
    s += text(lx + 14, ly + 9, series[k], "start", 11);
  }
  s += "<text x=\"16\" y=\"" + std::to_string(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       std::to_string(top + ph / 2) + ")\">" + escape(y_axis) + "</text>\n";
  return s + "</svg>\n";
}

std::string svg_scatter(const std::vector<Matrix>& clouds, const std::vector<std::string>& labels,
                        const std::string& title) {
  const int side = 360, top = 40, left = 20;
  std::string s = header(left + side + 140, top + side + 20);
  s += text(left + side / 2.0, 20, title, "middle", 14);
  std::vector<const Matrix*> ptrs;
  for (const auto& c : clouds) ptrs.push_back(&c);
  s += scatter_panel({static_cast<double>(left), static_cast<double>(top), static_cast<double>(side),
                      static_cast<double>(side)},
                     ptrs, -3.5, 3.5, 3000);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const double ly = top + 16.0 * static_cast<double>(k);
    s += "<rect x=\"" + std::to_string(left + side + 10) + "\" y=\"" + fmt(ly, 6) +
         "\" width=\"10\" height=\"10\" fill=\"" + kPalette[k % 10] + "\"/>\n";
    s += text(left + side + 24, ly + 9, labels[k], "start", 11);
  }
  return s + "</svg>\n";
}

std::string markdown_summary(const SummaryInputs& in) {
  std::ostringstream md;
  md << "# Merge report\n\n";
  md << "| quantity | value |\n|---|---|\n";
  md << "| FIDt | " << fmt(in.fidt, 6) << " |\n";
  md << "| Tr(M_ref) | " << fmt(in.fidt_ref, 6) << " |\n";
  md << "| FIDt / Tr(M_ref) | " << (in.fidt_ref > 0.0 ? fmt(in.fidt / in.fidt_ref, 4) : "n/a") << " |\n\n";
  auto table = [&md](const Matrix& m, const char* name) {
    if (m.size() == 0) return;
    md << "## " << name << "\n\n| |";
    for (Eigen::Index c = 0; c < m.cols(); ++c) md << ' ' << c + 1 << " |";
    md << "\n|---|";
    for (Eigen::Index c = 0; c < m.cols(); ++c) md << "---|";
    md << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      md << "| " << r + 1 << " |";
      for (Eigen::Index c = 0; c < m.cols(); ++c) md << ' ' << fmt(m(r, c), 4) << " |";
      md << '\n';
    }
    md << '\n';
  };
  table(in.fid, "FID matrix (rows: student style, columns: teacher)");
  table(in.fid_ref, "Reference matrix (teacher vs teacher)");
  for (const auto& n : in.notes) md << "- " << n << '\n';
  return md.str();
}

}  // namespace dmm

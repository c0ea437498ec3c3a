// Copyright 2026 The satmpc Authors
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

#include "satmpc/svg.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace satmpc {

namespace {

constexpr double kSize = 560.0;    // plot area, pixels
constexpr double kMargin = 60.0;

// Maps the state box onto a square plot area, x2 pointing up.
class Canvas {
 public:
  explicit Canvas(const OcpSpec& spec)
      : x_lo_(spec.x_lower(0)), x_hi_(spec.x_upper(0)),
        y_lo_(spec.x_lower(1)), y_hi_(spec.x_upper(1)) {
    const double total = kSize + 2 * kMargin;
    out_ = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" "
        "viewBox=\"0 0 {0} {0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"{0}\" height=\"{0}\" fill=\"white\"/>\n",
        total);
  }

  double px(double x) const { return kMargin + (x - x_lo_) / (x_hi_ - x_lo_) * kSize; }
  double py(double y) const { return kMargin + (y_hi_ - y) / (y_hi_ - y_lo_) * kSize; }
  double sx() const { return kSize / (x_hi_ - x_lo_); }
  double sy() const { return kSize / (y_hi_ - y_lo_); }

  void raw(const std::string& s) { out_ += s; }

  void circle(double x, double y, double r, const char* fill, const char* stroke = "none") {
    out_ += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{}\" fill=\"{}\" stroke=\"{}\"/>\n",
                        px(x), py(y), r, fill, stroke);
  }

  void polyline(const std::vector<StateVec>& pts, const char* stroke, double width,
                bool closed = false, const char* dash = nullptr) {
    std::string p;
    for (const auto& x : pts) p += fmt::format("{:.2f},{:.2f} ", px(x(0)), py(x(1)));
    const std::string d = dash ? fmt::format(" stroke-dasharray=\"{}\"", dash) : "";
    out_ += fmt::format("<{} points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{}/>\n",
                        closed ? "polygon" : "polyline", p, stroke, width, d);
  }

  void text(double x_px, double y_px, const std::string& s, const char* anchor = "start") {
    out_ += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"{}\">{}</text>\n",
                        x_px, y_px, anchor, s);
  }

  void axes() {
    out_ += fmt::format("<rect x=\"{0}\" y=\"{0}\" width=\"{1}\" height=\"{1}\" fill=\"none\" "
                        "stroke=\"black\"/>\n",
                        kMargin, kSize);
    for (int i = 0; i <= 4; ++i) {
      const double vx = x_lo_ + (x_hi_ - x_lo_) * i / 4.0;
      const double vy = y_lo_ + (y_hi_ - y_lo_) * i / 4.0;
      out_ += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1}\" x2=\"{0:.1f}\" y2=\"{2}\" stroke=\"black\"/>\n",
                          px(vx), kMargin + kSize, kMargin + kSize + 5);
      text(px(vx), kMargin + kSize + 20, fmt::format("{:g}", vx), "middle");
      out_ += fmt::format("<line x1=\"{1}\" y1=\"{0:.1f}\" x2=\"{2}\" y2=\"{0:.1f}\" stroke=\"black\"/>\n",
                          py(vy), kMargin - 5, kMargin);
      text(kMargin - 8, py(vy) + 4, fmt::format("{:g}", vy), "end");
    }
    text(kMargin + kSize / 2, kMargin + kSize + 42, "x1", "middle");
    text(18, kMargin + kSize / 2, "x2", "middle");
  }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  double x_lo_, x_hi_, y_lo_, y_hi_;
  std::string out_;
};

void require_planar(const OcpSpec& spec) {
  require(spec.state_dim() == 2, "svg rendering needs a two-state problem");
}

const char* sample_color(SampleClass cls) {
  switch (cls) {
    case SampleClass::Lower: return "#1f4fd6";
    case SampleClass::Upper: return "#d62728";
    default: return "black";
  }
}

const char* cell_color(GridClass cls) {
  switch (cls) {
    case GridClass::Lower: return "#c6dbef";
    case GridClass::Upper: return "#fcbba1";
    case GridClass::Other: return "#d9d9d9";
    case GridClass::Terminal: return "#c7e9c0";
    case GridClass::Infeasible: break;
  }
  return nullptr;
}

}  // namespace

std::vector<StateVec> terminal_ellipse(const OcpSpec& spec, int points) {
  require_planar(spec);
  require(points >= 3, "terminal_ellipse: need at least three points");
  // x = L^-T v with |v|^2 = alpha, where P = L L'.
  const Eigen::LLT<Matrix> llt(spec.P);
  const Matrix Lt = llt.matrixU();
  std::vector<StateVec> out;
  out.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double t = 2.0 * std::numbers::pi * i / points;
    Vector v(2);
    v << std::cos(t), std::sin(t);
    v *= std::sqrt(spec.alpha);
    out.push_back(Lt.triangularView<Eigen::Upper>().solve(v));
  }
  return out;
}

std::string render_samples_svg(const OcpSpec& spec,
                               const std::vector<ClassifiedSample>& samples) {
  require_planar(spec);
  Canvas c(spec);
  for (const auto& s : samples) {
    if (s.cls == SampleClass::InfeasibleCandidate) continue;
    c.circle(s.x0(0), s.x0(1), 1.6, sample_color(s.cls));
  }
  c.polyline(terminal_ellipse(spec), "#2ca02c", 1.5, true);
  c.axes();
  c.text(kMargin, 30, "feasible initial states by saturation of u(0)");
  const double ly = 44;
  c.raw(fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"/>\n", kMargin + 330, ly - 4,
                    sample_color(SampleClass::Upper)));
  c.text(kMargin + 338, ly, "upper");
  c.raw(fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"/>\n", kMargin + 400, ly - 4,
                    sample_color(SampleClass::Lower)));
  c.text(kMargin + 408, ly, "lower");
  c.raw(fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"black\"/>\n", kMargin + 470, ly - 4));
  c.text(kMargin + 478, ly, "none");
  return c.finish();
}

std::string render_trajectories_svg(const OcpSpec& spec, const FeasibilityGrid& grid,
                                    const std::vector<Trajectory>& trajectories) {
  require_planar(spec);
  Canvas c(spec);
  if (grid.resolution > 1) {
    const double w = c.sx() * (spec.x_upper(0) - spec.x_lower(0)) / (grid.resolution - 1);
    const double h = c.sy() * (spec.x_upper(1) - spec.x_lower(1)) / (grid.resolution - 1);
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
      const char* fill = cell_color(grid.classes[i]);
      if (fill == nullptr) continue;
      c.raw(fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
                        "fill=\"{}\"/>\n",
                        c.px(grid.points[i](0)) - w / 2, c.py(grid.points[i](1)) - h / 2,
                        w + 0.3, h + 0.3, fill));
    }
  }
  c.polyline(terminal_ellipse(spec), "#2ca02c", 1.5, true);

  static const char* colors[] = {"black", "#ff7f0e", "#9467bd", "#8c564b"};
  for (std::size_t t = 0; t < trajectories.size(); ++t) {
    const auto& tr = trajectories[t];
    const char* col = colors[t % 4];
    // Trajectories from the same start overlap, so later ones are drawn
    // dashed and with smaller markers on top of the first.
    const bool first = t == 0;
    c.polyline(tr.states, col, first ? 2.5 : 1.2, false, first ? nullptr : "5,3");
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      const bool solved = k < tr.nlp_solved.size() ? tr.nlp_solved[k] : true;
      c.circle(tr.states[k](0), tr.states[k](1), first ? 5.0 : 2.5, solved ? col : "white", col);
    }
    c.text(kMargin + 10, kMargin + 18 + 16.0 * static_cast<double>(t), tr.label);
    c.raw(fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"{4}/>\n",
                      kMargin + 120, kMargin + 14 + 16.0 * static_cast<double>(t), kMargin + 150, col,
                      t == 0 ? "" : " stroke-dasharray=\"5,3\""));
  }
  c.axes();
  c.text(kMargin, 30, "closed-loop trajectories over the approximated feasible set");
  return c.finish();
}

}  // namespace satmpc

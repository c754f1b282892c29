#include "edmlift/pipeline/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "edmlift/core/error.hpp"
#include "edmlift/pipeline/format.hpp"

namespace edmlift::pipeline {
namespace {

constexpr double kWidth = 720, kHeight = 460;
constexpr double kLeft = 80, kRight = 170, kTop = 50, kBottom = 70;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Round step of 1, 2 or 5 times a power of ten giving about `target` ticks.
double tick_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

struct Axis {
  double lo, hi;
  void pad() {
    if (hi - lo <= 0.0) {
      const double d = std::max(1.0, std::abs(lo) * 0.1);
      lo -= d;
      hi += d;
    }
  }
};

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  Axis ax{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  Axis ay = ax;
  for (const auto& s : spec.series) {
    if (s.x.size() != s.y.size()) throw Error(ErrorCode::kShape, "series x/y lengths differ");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      ax.lo = std::min(ax.lo, s.x[i]);
      ax.hi = std::max(ax.hi, s.x[i]);
      ay.lo = std::min(ay.lo, s.y[i]);
      ay.hi = std::max(ay.hi, s.y[i]);
    }
  }
  if (!std::isfinite(ax.lo)) throw Error(ErrorCode::kInvalidArgument, "nothing to plot");
  ay.lo = std::min(ay.lo, 0.0);
  ax.pad();
  ay.pad();
  ay.hi += 0.05 * (ay.hi - ay.lo);

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" +
         escape(spec.title) + "</text>\n";

  // Ticks and grid.
  const double ys = tick_step(ay.hi - ay.lo, 6);
  for (double y = std::ceil(ay.lo / ys) * ys; y <= ay.hi + 1e-9 * ys; y += ys) {
    svg += "<line x1=\"" + num(kLeft) + "\" x2=\"" + num(kLeft + pw) + "\" y1=\"" + num(py(y)) +
           "\" y2=\"" + num(py(y)) + "\" stroke=\"#e0e0e0\"/>\n";
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(y) + 4) +
           "\" text-anchor=\"end\">" + escape(format9(round9(y))) + "</text>\n";
  }
  if (!spec.categories.empty()) {
    for (std::size_t i = 0; i < spec.categories.size(); ++i) {
      const double x = static_cast<double>(i);
      if (x < ax.lo || x > ax.hi) continue;
      svg += "<text x=\"" + num(px(x)) + "\" y=\"" + num(kTop + ph + 18) +
             "\" text-anchor=\"middle\">" + escape(spec.categories[i]) + "</text>\n";
    }
  } else {
    const double xs = tick_step(ax.hi - ax.lo, 8);
    for (double x = std::ceil(ax.lo / xs) * xs; x <= ax.hi + 1e-9 * xs; x += xs) {
      svg += "<text x=\"" + num(px(x)) + "\" y=\"" + num(kTop + ph + 18) +
             "\" text-anchor=\"middle\">" + escape(format9(round9(x))) + "</text>\n";
    }
  }
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 20) +
         "\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
  svg += "<text transform=\"translate(20," + num(kTop + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(spec.y_label) + "</text>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const Series& s = spec.series[k];
    const std::string color = kColors[k % std::size(kColors)];
    if (s.line && s.x.size() > 1) {
      svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
          svg += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
        }
      }
      svg += "\"/>\n";
    }
    const double r = s.line ? 3.5 : 1.5;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      svg += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" + num(py(s.y[i])) + "\" r=\"" +
             num(r) + "\" fill=\"" + color + "\"" + (s.line ? "" : " fill-opacity=\"0.4\"") +
             "/>\n";
    }
    const double ly = kTop + 10 + 20 * static_cast<double>(k);
    svg += "<rect x=\"" + num(kLeft + pw + 15) + "\" y=\"" + num(ly - 8) +
           "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + num(kLeft + pw + 32) + "\" y=\"" + num(ly + 2) + "\">" +
           escape(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace edmlift::pipeline

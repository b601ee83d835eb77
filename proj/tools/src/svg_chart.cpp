#include "amest/cli/svg_chart.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace amest::cli {
namespace {

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

std::string fmt(double v, int precision = 4) {
  std::ostringstream o;
  o.precision(precision);
  o << v;
  return o.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // Guarantees a non-empty span with a small margin.
  void finish(double margin) {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      const double pad = std::max(std::abs(lo) * 0.05, 1e-3);
      lo -= pad;
      hi += pad;
    } else {
      const double pad = (hi - lo) * margin;
      lo -= pad;
      hi += pad;
    }
  }
};

// Roughly five round tick values covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

}  // namespace

std::string palette(std::size_t i) {
  static const std::array<const char*, 8> colors{"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd",
                                                 "#8c564b", "#e377c2", "#17becf", "#7f7f7f"};
  return colors[i % colors.size()];
}

std::string render_chart(const std::string& title, const std::string& x_label, const std::vector<Panel>& panels,
                         int width, int panel_height, std::size_t max_points) {
  const int left = 80, right = 170, top = 40, gap = 45, bottom = 50;
  const int plot_w = width - left - right;
  const int plot_h = panel_height - gap;
  const int height = top + panel_height * static_cast<int>(panels.size()) + bottom;

  Range xr;
  for (const Panel& p : panels) {
    for (const Series& s : p.series) {
      for (double x : s.x) xr.add(x);
    }
  }
  xr.finish(0.0);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">" << escape(title)
      << "</text>\n";

  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const Panel& p = panels[pi];
    const int y0 = top + static_cast<int>(pi) * panel_height + 20;

    Range yr;
    for (const Series& s : p.series) {
      for (double y : s.y) yr.add(y);
    }
    for (const Rule& r : p.rules) yr.add(r.y);
    yr.finish(0.08);

    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto py = [&](double y) { return y0 + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h; };

    svg << "<g>\n<text x=\"" << left << "\" y=\"" << y0 - 6 << "\" font-size=\"13\">" << escape(p.title)
        << "</text>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << y0 << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (double t : ticks(yr.lo, yr.hi)) {
      svg << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << fmt(py(t), 6) << "\" y2=\""
          << fmt(py(t), 6) << "\" stroke=\"#e5e5e5\"/>\n";
      svg << "<text x=\"" << left - 6 << "\" y=\"" << fmt(py(t) + 4, 6) << "\" text-anchor=\"end\">" << fmt(t)
          << "</text>\n";
    }
    for (double t : ticks(xr.lo, xr.hi)) {
      svg << "<line x1=\"" << fmt(px(t), 6) << "\" x2=\"" << fmt(px(t), 6) << "\" y1=\"" << y0 << "\" y2=\""
          << y0 + plot_h << "\" stroke=\"#f0f0f0\"/>\n";
      svg << "<text x=\"" << fmt(px(t), 6) << "\" y=\"" << y0 + plot_h + 15 << "\" text-anchor=\"middle\">"
          << fmt(t) << "</text>\n";
    }
    svg << "<text transform=\"translate(" << 18 << ',' << y0 + plot_h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(p.y_label) << "</text>\n";

    int legend_y = y0 + 12;
    for (const Rule& r : p.rules) {
      svg << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << fmt(py(r.y), 6) << "\" y2=\""
          << fmt(py(r.y), 6) << "\" stroke=\"" << r.color << "\" stroke-dasharray=\"2,3\" stroke-width=\"1.5\"/>\n";
      svg << "<text x=\"" << left + plot_w + 10 << "\" y=\"" << legend_y << "\" fill=\"" << r.color << "\">"
          << escape(r.label) << "</text>\n";
      legend_y += 16;
    }
    for (const Series& s : p.series) {
      const std::size_t n = std::min(s.x.size(), s.y.size());
      const std::size_t stride = n > max_points ? (n + max_points - 1) / max_points : 1;
      svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.4\"";
      if (s.dashed) svg << " stroke-dasharray=\"6,4\"";
      svg << " points=\"";
      for (std::size_t i = 0; i < n; i += stride) {
        if (!std::isfinite(s.y[i])) continue;
        svg << fmt(px(s.x[i]), 6) << ',' << fmt(py(s.y[i]), 6) << ' ';
      }
      if (n > 0 && (n - 1) % stride != 0 && std::isfinite(s.y[n - 1])) {
        svg << fmt(px(s.x[n - 1]), 6) << ',' << fmt(py(s.y[n - 1]), 6);
      }
      svg << "\"/>\n";
      svg << "<text x=\"" << left + plot_w + 10 << "\" y=\"" << legend_y << "\" fill=\"" << s.color << "\">"
          << escape(s.label) << "</text>\n";
      legend_y += 16;
    }
    svg << "</g>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace amest::cli

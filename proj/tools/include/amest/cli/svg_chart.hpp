#pragma once

#include <string>
#include <vector>

namespace amest::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

/// Horizontal reference line, e.g. a true parameter value.
struct Rule {
  std::string label;
  double y = 0.0;
  std::string color = "#d62728";
};

struct Panel {
  std::string title;
  std::string y_label;
  std::vector<Series> series;
  std::vector<Rule> rules;
};

/// Static SVG with the panels stacked vertically and a shared time axis.
/// Long series are thinned to at most max_points per line.
std::string render_chart(const std::string& title, const std::string& x_label, const std::vector<Panel>& panels,
                         int width = 900, int panel_height = 220, std::size_t max_points = 2000);

/// A distinct colour for the i-th line of an overlay.
std::string palette(std::size_t i);

}  // namespace amest::cli

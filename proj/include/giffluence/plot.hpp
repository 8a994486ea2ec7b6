#pragma once

#include <string>
#include <vector>

namespace giffluence {

struct PlotSeries {
  std::string label;
  std::vector<double> values;  // NaN breaks the line
};

struct PlotStyle {
  std::string title;
  std::string y_label;
  int width = 960;
  int height = 420;
};

/// Self-contained SVG line chart over shared x keys (ISO dates or bucket keys).
/// Legend entries follow input order. Throws Error{EmptySeries} when there is no
/// series or no present value, Error{SchemaMismatch} when lengths differ from keys.
std::string emit_plot(const std::vector<std::string>& keys, const std::vector<PlotSeries>& series,
                      const PlotStyle& style);

}  // namespace giffluence

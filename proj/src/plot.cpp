#include "giffluence/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "giffluence/error.hpp"
#include "giffluence/stats.hpp"

namespace giffluence {

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
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

}  // namespace

std::string emit_plot(const std::vector<std::string>& keys, const std::vector<PlotSeries>& series,
                      const PlotStyle& style) {
  if (series.empty()) throw Error(ErrorCode::EmptySeries, "nothing to plot");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series) {
    if (s.values.size() != keys.size())
      throw Error(ErrorCode::SchemaMismatch, "series '" + s.label + "' does not match the key count");
    for (const double v : s.values)
      if (!is_missing(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  }
  if (!(lo <= hi)) throw Error(ErrorCode::EmptySeries, "every plotted value is missing");
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }

  const double left = 70, right = 20, top = 40, bottom = 60;
  const double legend_h = 18.0 * static_cast<double>(series.size());
  const double W = style.width, H = style.height + legend_h;
  const double pw = W - left - right, ph = style.height - top - bottom;
  const std::size_t n = keys.size();
  auto px = [&](std::size_t i) { return left + (n > 1 ? pw * static_cast<double>(i) / static_cast<double>(n - 1) : pw / 2); };
  auto py = [&](double v) { return top + ph * (hi - v) / (hi - lo); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\"" << num(H)
      << "\" viewBox=\"0 0 " << style.width << ' ' << num(H) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\"" << num(H) << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(style.title)
      << "</text>\n";

  // Axes.
  out << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(left + pw) << "\" y2=\""
      << num(top + ph) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\"" << num(top + ph)
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    out << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(py(v)) << "\" x2=\"" << num(left) << "\" y2=\""
        << num(py(v)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">" << tick_label(v)
        << "</text>\n";
  }
  const std::size_t ticks = std::min<std::size_t>(n, 6);
  for (std::size_t k = 0; k < ticks; ++k) {
    const std::size_t i = ticks > 1 ? k * (n - 1) / (ticks - 1) : 0;
    out << "<line x1=\"" << num(px(i)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(px(i)) << "\" y2=\""
        << num(top + ph + 4) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(px(i)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">"
        << xml_escape(keys[i]) << "</text>\n";
  }
  if (!style.y_label.empty())
    out << "<text x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << num(top + ph / 2) << ")\">" << xml_escape(style.y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = kPalette[s % kPalette.size()];
    std::string d;
    bool pen_down = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = series[s].values[i];
      if (is_missing(v)) {
        pen_down = false;
        continue;
      }
      d += (pen_down ? " L" : (d.empty() ? "M" : " M")) + num(px(i)) + ' ' + num(py(v));
      pen_down = true;
    }
    out << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\"/>\n";
    const double ly = style.height - 10 + 18.0 * static_cast<double>(s);
    out << "<line x1=\"" << num(left) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + 24) << "\" y2=\"" << num(ly)
        << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(left + 30) << "\" y=\"" << num(ly + 4) << "\">" << xml_escape(series[s].label)
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace giffluence

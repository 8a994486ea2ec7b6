#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "giffluence/corpus.hpp"
#include "giffluence/dates.hpp"

namespace testsupport {

namespace fs = std::filesystem;
namespace gf = giffluence;

/// Fresh scratch directory under the system temp dir.
inline fs::path scratch(const std::string& name) {
  static std::atomic<int> counter{0};
  auto dir = fs::temp_directory_path() /
             ("giffluence_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline gf::Date date(const char* s) { return *gf::parse_date(s); }

/// Exchange-local wall clock on `day` as an instant.
inline gf::Instant local(const gf::TradingCalendar& cal, const char* day, int hh, int mm) {
  return cal.to_instant(date(day), std::chrono::hours{hh} + std::chrono::minutes{mm});
}

inline gf::PostRecord post(std::string id, gf::Instant ts, std::vector<std::string> gifs,
                           gf::Declaration decl = gf::Declaration::None) {
  gf::PostRecord p;
  p.post_id = std::move(id);
  p.timestamp = ts;
  p.user_id = "u";
  p.body = "$SPY";
  p.cashtags = {"SPY"};
  p.gif_ids = std::move(gifs);
  p.declaration = decl;
  return p;
}

/// Three trading days, twelve posts. With min_decl = 2 every valence and weight is dyadic:
///   day 1: g1 {B2 A2} -> 1;                GIF 1,     POS 1,   SELFDEC 1/2
///   day 2: g1 {B2 A4} -> 1/2, g2 {b2 A2} -> -1; GIF -1/4, POS 1/2, NEG -1, SELFDEC missing
///   day 3: g2 {B1 b2 A4} -> -1/4, g3 ineligible; GIF -1/4, NEG -1/4, SELFDEC -1
inline std::vector<gf::PostRecord> hand_corpus(const gf::TradingCalendar& cal) {
  using D = gf::Declaration;
  std::vector<gf::PostRecord> v;
  auto add = [&](const char* day, int hh, std::vector<std::string> gifs, D d, std::optional<double> text = {}) {
    auto p = post("p" + std::to_string(v.size() + 1), local(cal, day, hh, 0), std::move(gifs), d);
    p.text_score = text;
    v.push_back(std::move(p));
  };
  add("2021-03-01", 9, {"g1"}, D::Bullish, 0.5);
  add("2021-03-01", 10, {"g1"}, D::Bullish);
  add("2021-03-01", 11, {}, D::Bullish, -0.25);
  add("2021-03-01", 12, {}, D::None);
  add("2021-03-02", 9, {"g2"}, D::Bearish);
  add("2021-03-02", 10, {"g2"}, D::Bearish, 0.75);
  add("2021-03-02", 11, {"g1"}, D::None);
  add("2021-03-02", 12, {"g1"}, D::None);
  add("2021-03-03", 9, {"g2"}, D::Bullish);
  add("2021-03-03", 10, {"g2"}, D::None);
  add("2021-03-03", 11, {}, D::Bearish);
  add("2021-03-03", 12, {"g3"}, D::Bullish);
  return v;
}

/// One-sample Kolmogorov-Smirnov p-value against U(0, 1), asymptotic law with
/// the small-sample adjustment of the statistic.
inline double ks_uniform_pvalue(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lo = static_cast<double>(i) / n, hi = static_cast<double>(i + 1) / n;
    d = std::max({d, hi - x[i], x[i] - lo});
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  if (lambda < 0.2) return 1.0;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) q += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace testsupport

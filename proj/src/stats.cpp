#include "giffluence/stats.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace giffluence {

double mean(std::span<const double> x) {
  if (x.empty()) return kMissing;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return kMissing;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

double percentile_linear(std::span<const double> sorted, double pct) {
  if (sorted.empty()) return kMissing;
  const double h = pct / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double percentile_nearest_rank(std::span<const double> sorted, double pct) {
  if (sorted.empty()) return kMissing;
  const auto n = static_cast<double>(sorted.size());
  // Guard against 0.95 * 100 landing on 95.00000000000001.
  auto rank = static_cast<std::ptrdiff_t>(std::ceil(pct / 100.0 * n - 1e-9));
  rank = std::clamp<std::ptrdiff_t>(rank, 1, static_cast<std::ptrdiff_t>(sorted.size()));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

double median(std::vector<double> x) {
  if (x.empty()) return kMissing;
  std::sort(x.begin(), x.end());
  return percentile_linear(x, 50.0);
}

std::optional<double> lag1_autocorrelation(std::span<const double> x) {
  if (x.size() < 3) return std::nullopt;
  auto constant = [](std::span<const double> v) { return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end(); };
  const auto head = x.first(x.size() - 1);
  const auto tail = x.subspan(1);
  if (constant(head) || constant(tail)) return std::nullopt;
  const double mh = mean(head), mt = mean(tail);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < head.size(); ++i) {
    sxy += (head[i] - mh) * (tail[i] - mt);
    sxx += (head[i] - mh) * (head[i] - mh);
    syy += (tail[i] - mt) * (tail[i] - mt);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double normal_two_sided_p(double z) {
  if (std::isnan(z)) return kMissing;
  if (std::isinf(z)) return 0.0;
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal_distribution<>{}, std::abs(z)));
}

double t_two_sided_p(double t, double df) {
  if (std::isnan(t) || !(df > 0.0)) return kMissing;
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t_distribution<> dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

Summary summarize(std::vector<double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.mean = mean(values);
  s.sd = values.size() >= 2 ? sample_sd(values) : kMissing;
  s.p10 = percentile_linear(values, 10);
  s.p25 = percentile_linear(values, 25);
  s.p50 = percentile_linear(values, 50);
  s.p75 = percentile_linear(values, 75);
  s.p90 = percentile_linear(values, 90);
  return s;
}

}  // namespace giffluence

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace giffluence {

/// Missing numeric values are quiet NaNs throughout the numeric tables.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double x) noexcept { return std::isnan(x); }

double mean(std::span<const double> x);
/// Sample (n-1) variance. Requires x.size() >= 2.
double sample_variance(std::span<const double> x);
double sample_sd(std::span<const double> x);

/// Linear-interpolation percentile (the "type 7" rule) of ascending-sorted data, pct in [0, 100].
double percentile_linear(std::span<const double> sorted, double pct);
/// Nearest-rank percentile: the value at 1-based rank ceil(pct/100 * n), clamped to [1, n].
double percentile_nearest_rank(std::span<const double> sorted, double pct);
double median(std::vector<double> x);

/// Pearson correlation between x[0..n-2] and x[1..n-1]; nullopt when either side is constant or n < 3.
std::optional<double> lag1_autocorrelation(std::span<const double> x);

/// Two-sided p-value of a standard normal statistic.
double normal_two_sided_p(double z);
/// Two-sided p-value of a Student-t statistic with df degrees of freedom.
double t_two_sided_p(double t, double df);

struct Summary {
  std::size_t n = 0;
  double mean = kMissing;
  double sd = kMissing;
  double p10 = kMissing;
  double p25 = kMissing;
  double p50 = kMissing;
  double p75 = kMissing;
  double p90 = kMissing;
};

/// Distribution summary with linear-interpolation percentiles.
Summary summarize(std::vector<double> values);

}  // namespace giffluence

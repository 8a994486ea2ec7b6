#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "giffluence/corpus.hpp"
#include "giffluence/stats.hpp"

namespace giffluence {

// Window helpers index series by trading-day (or bucket) position. A window
// reaching outside the series throws Error{WindowOutOfRange}; a window that
// is in range but touches a missing value yields NaN.

/// Compounded return in %: (prod(1 + r_i/100) - 1) * 100 over t+m .. t+n inclusive.
double cum_return(std::span<const double> returns, std::ptrdiff_t t, int m, int n);
/// Sample sd of returns over t .. t+n; needs n >= 1.
double realized_vol(std::span<const double> returns, std::ptrdiff_t t, int n);
/// ln(1 + sum of volume over t+m .. t+n).
double log_total_volume(std::span<const double> volumes, std::ptrdiff_t t, int m, int n);
/// ln(1 + count_t) - ln(1 + median(count_{t-10..t-1})); nullopt without 10 prior values.
std::optional<double> log_abn_messages(std::span<const double> counts, std::ptrdiff_t t);
/// ln(1 + count).
double log_ea(double count);

/// Whole-series forms: NaN wherever the window is out of range or incomplete.
std::vector<double> cum_return_series(std::span<const double> returns, int m, int n);
std::vector<double> realized_vol_series(std::span<const double> returns, int n);
std::vector<double> log_total_volume_series(std::span<const double> volumes, int m, int n);
std::vector<double> log_abn_messages_series(std::span<const double> counts);

enum class SeasonalScheme {
  DayOfWeekAndMonth,  // residuals from projecting on weekday and month dummies plus intercept
  WeekOfSample,       // value minus its calendar-week mean
};

/// Missing values stay missing and do not enter the fit. Weekday/month cells
/// holding a single observation throw Error{RankDeficient}.
std::vector<double> deseasonalize(std::span<const Date> dates, std::span<const double> values, SeasonalScheme scheme);

/// Weekday and month indicator design used by DayOfWeekAndMonth (intercept
/// first, one reference level dropped per group), over the rows where `use` is true.
Eigen::MatrixXd seasonal_design(std::span<const Date> dates, std::span<const bool> use);

/// sum(cap_i * ret_i) / sum(cap_i).
double value_weighted_return(std::span<const double> caps, std::span<const double> returns);

struct FirmObservation {
  std::string firm_id;
  double ret_pct = kMissing;
  double mktcap = kMissing;
  double characteristic = kMissing;
};

/// Quintile assignment: firms sorted by (characteristic, firm_id); rank r in
/// [0, N) joins the first quintile q with r <= the (20q)-th linear percentile of
/// the rank positions. Firms missing any field are skipped.
std::array<std::vector<std::size_t>, 5> quintile_members(std::span<const FirmObservation> firms);

/// Value-weighted return per quintile (index 0 = lowest characteristic).
/// Throws Error{TooFewFirms} under five usable firms.
std::array<double, 5> quintile_portfolios(std::span<const FirmObservation> firms);

/// Sample sd of residuals from regressing the last `lookback` firm returns
/// (observations with any missing value skipped) on the factor columns plus an
/// intercept. All-zero factor columns are dropped. Throws
/// Error{InsufficientHistory} under `min_obs` rows, Error{RankDeficient}.
double idio_vol(const Eigen::Ref<const Eigen::VectorXd>& firm_returns, const Eigen::Ref<const Eigen::MatrixXd>& factors,
                int lookback = 36, int min_obs = 24);

enum class Characteristic { Size, IdioVol, TotalVol };

std::string_view to_string(Characteristic c) noexcept;

/// Long-format firm panel: `date,firm_id,ret_pct,mktcap,<factor columns>`.
struct FirmPanel {
  std::vector<Date> dates;  // one per row
  std::vector<std::string> firm_ids;
  std::vector<double> ret_pct;
  std::vector<double> mktcap;
  std::vector<std::string> factor_names;
  std::vector<std::vector<double>> factors;  // [factor][row]

  static FirmPanel load(const std::filesystem::path& path);
  std::size_t rows() const noexcept { return dates.size(); }
};

struct SortOptions {
  Characteristic characteristic = Characteristic::Size;
  int lookback_months = 36;
  int min_months = 24;
  /// Factor columns regressed out for IdioVol. A column named `rf` is subtracted
  /// from firm returns and factor-free otherwise.
  std::vector<std::string> factor_set = {"mkt_rf", "smb", "hml", "rmw", "cma"};
};

/// Per trading day and quintile, value-weighted returns (NaN when fewer than
/// five firms qualify). Volatility characteristics use monthly returns
/// compounded from the panel over the months before the day's month.
std::vector<std::array<double, 5>> characteristic_portfolios(const FirmPanel& panel, const TradingCalendar& cal,
                                                             const SortOptions& options);

void write_quintiles_csv(std::ostream& out, std::span<const Date> dates,
                         std::span<const std::array<double, 5>> returns);

}  // namespace giffluence

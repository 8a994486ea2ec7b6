#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "giffluence/dates.hpp"
#include "giffluence/econ.hpp"

namespace giffluence {

/// Named series aligned to trading days, plus bucket series with 48 slots per day.
class SeriesStore {
 public:
  static constexpr std::size_t kSlots = 48;

  SeriesStore() = default;
  explicit SeriesStore(std::vector<Date> dates) : dates_(std::move(dates)) {}

  std::span<const Date> dates() const noexcept { return dates_; }

  /// Throws Error{SchemaMismatch} when the length does not match.
  void add_daily(const std::string& name, std::vector<double> values);
  void add_bucket(const std::string& name, std::vector<double> values);

  bool has_daily(const std::string& name) const { return daily_.contains(name); }
  bool has_bucket(const std::string& name) const { return bucket_.contains(name); }
  /// Throw Error{UnknownSeries} naming the id.
  const std::vector<double>& daily(const std::string& name) const;
  const std::vector<double>& bucket(const std::string& name) const;

 private:
  std::vector<Date> dates_;
  std::map<std::string, std::vector<double>> daily_;
  std::map<std::string, std::vector<double>> bucket_;
};

enum class Transform {
  Level,        // value at t+m
  Sum,          // sum over t+m .. t+n
  CumReturn,    // compounded % return over t+m .. t+n
  RealizedVol,  // sample sd over t+m .. t+n
  LogVolume,    // ln(1 + sum) over t+m .. t+n
};

struct Dependent {
  std::string series;
  Transform transform = Transform::CumReturn;
  int m = 0;
  int n = 0;

  std::string label() const;
};

struct Regressor {
  std::string series;
  bool absolute = false;
  int lag = 0;  // value at t - lag

  std::string label() const;
};

enum class Method { Classical, BlockBootstrap, NelsonKim };
std::string_view to_string(Method m) noexcept;

struct InferenceSpec {
  Method method = Method::BlockBootstrap;
  int block_len = 0;  // 0: the dependent window length (n - m + 1)
  int reps = 2000;
  std::uint64_t seed = 0;
};

struct SampleFilters {
  double winsorize_pct = 0.0;  // applied to the dependent, 0 = off
  bool dfbeta = false;
  std::optional<double> dfbeta_threshold;  // default 2 / sqrt(n)
  std::optional<Date> from;
  std::optional<Date> to;
};

struct RegressionSpec {
  std::string label;
  bool intraday = false;
  Dependent dependent;
  std::vector<Regressor> regressors;
  std::vector<Regressor> controls;
  InferenceSpec inference;
  SampleFilters filters;
};

struct Term {
  std::string name;
  double coef = kMissing;
  double se = kMissing;
  double p = kMissing;
};

struct Exclusion {
  std::string key;
  std::string reason;  // missing, date_range, dfbeta
};

struct RegressionResult {
  std::string label;
  std::string dependent;
  std::vector<Term> terms;  // regressors, controls, then the intercept
  std::size_t n = 0;
  double r2 = kMissing;
  double adj_r2 = kMissing;
  Method method = Method::Classical;
  int block_len = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  int redraws = 0;
  bool permutation_fallback = false;
  std::vector<Exclusion> excluded;
};

/// Throws Error{UnknownSeries} for unresolvable ids, Error{Config} for invalid
/// inference settings, and estimation errors from econ.
RegressionResult run_regression(const RegressionSpec& spec, const SeriesStore& store, int workers = 1);

/// "***", "**", "*" at 1%, 5%, 10%.
std::string stars(double p);

struct RegressionTable {
  std::string title;
  std::vector<RegressionResult> columns;
};

RegressionTable run_table(const std::string& title, std::span<const RegressionSpec> specs, const SeriesStore& store,
                          int workers = 1);

/// Long format `column,label,dependent,term,coef,se,p,stars,n,adj_r2`.
void write_table_csv(std::ostream& out, const RegressionTable& table);
/// Coefficient with stars over (SE), one column per spec, N and adjusted R² rows.
void write_table_markdown(std::ostream& out, const RegressionTable& table);
/// Method, seed, replicates, block length, sample size and excluded rows per column.
void write_table_metadata(std::ostream& out, const RegressionTable& table);

struct CorrelationCell {
  std::string x;
  std::string y;
  Correlation result;
};

/// Pearson tests for every pair of daily series, in input order. Pairs that
/// cannot be tested (constant or too few points) carry NaN.
std::vector<CorrelationCell> correlation_table(std::span<const std::string> names, const SeriesStore& store);
void write_correlation_csv(std::ostream& out, std::span<const CorrelationCell> cells);
void write_correlation_markdown(std::ostream& out, std::span<const std::string> names,
                                std::span<const CorrelationCell> cells);

}  // namespace giffluence

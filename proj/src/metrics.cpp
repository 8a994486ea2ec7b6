#include "giffluence/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>

#include "giffluence/csv.hpp"
#include "giffluence/error.hpp"

namespace giffluence {

namespace {

void check_window(std::size_t size, std::ptrdiff_t lo, std::ptrdiff_t hi, const char* what) {
  if (lo > hi || lo < 0 || hi >= static_cast<std::ptrdiff_t>(size))
    throw Error(ErrorCode::WindowOutOfRange, std::string(what) + " window [" + std::to_string(lo) + ", " +
                                                 std::to_string(hi) + "] outside series of length " +
                                                 std::to_string(size));
}

bool window_ok(std::size_t size, std::ptrdiff_t lo, std::ptrdiff_t hi) {
  return lo <= hi && lo >= 0 && hi < static_cast<std::ptrdiff_t>(size);
}

}  // namespace

double cum_return(std::span<const double> returns, std::ptrdiff_t t, int m, int n) {
  check_window(returns.size(), t + m, t + n, "cumulative return");
  if (m == n) return returns[static_cast<std::size_t>(t + m)];
  double growth = 1.0;
  for (std::ptrdiff_t i = t + m; i <= t + n; ++i) growth *= 1.0 + returns[static_cast<std::size_t>(i)] / 100.0;
  return (growth - 1.0) * 100.0;
}

double realized_vol(std::span<const double> returns, std::ptrdiff_t t, int n) {
  if (n < 1) throw Error(ErrorCode::WindowOutOfRange, "realized volatility needs at least two days");
  check_window(returns.size(), t, t + n, "realized volatility");
  return sample_sd(returns.subspan(static_cast<std::size_t>(t), static_cast<std::size_t>(n) + 1));
}

double log_total_volume(std::span<const double> volumes, std::ptrdiff_t t, int m, int n) {
  check_window(volumes.size(), t + m, t + n, "volume");
  double total = 0.0;
  for (std::ptrdiff_t i = t + m; i <= t + n; ++i) total += volumes[static_cast<std::size_t>(i)];
  return std::log1p(total);
}

std::optional<double> log_abn_messages(std::span<const double> counts, std::ptrdiff_t t) {
  constexpr std::ptrdiff_t kLookback = 10;
  if (t < kLookback || t >= static_cast<std::ptrdiff_t>(counts.size())) return std::nullopt;
  std::vector<double> prior(counts.begin() + (t - kLookback), counts.begin() + t);
  if (std::any_of(prior.begin(), prior.end(), is_missing) || is_missing(counts[static_cast<std::size_t>(t)]))
    return std::nullopt;
  return std::log1p(counts[static_cast<std::size_t>(t)]) - std::log1p(median(std::move(prior)));
}

double log_ea(double count) { return std::log1p(count); }

std::vector<double> cum_return_series(std::span<const double> returns, int m, int n) {
  std::vector<double> out(returns.size(), kMissing);
  for (std::size_t t = 0; t < returns.size(); ++t) {
    const auto ti = static_cast<std::ptrdiff_t>(t);
    if (window_ok(returns.size(), ti + m, ti + n)) out[t] = cum_return(returns, ti, m, n);
  }
  return out;
}

std::vector<double> realized_vol_series(std::span<const double> returns, int n) {
  std::vector<double> out(returns.size(), kMissing);
  if (n < 1) return out;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    const auto ti = static_cast<std::ptrdiff_t>(t);
    if (window_ok(returns.size(), ti, ti + n)) out[t] = realized_vol(returns, ti, n);
  }
  return out;
}

std::vector<double> log_total_volume_series(std::span<const double> volumes, int m, int n) {
  std::vector<double> out(volumes.size(), kMissing);
  for (std::size_t t = 0; t < volumes.size(); ++t) {
    const auto ti = static_cast<std::ptrdiff_t>(t);
    if (window_ok(volumes.size(), ti + m, ti + n)) out[t] = log_total_volume(volumes, ti, m, n);
  }
  return out;
}

std::vector<double> log_abn_messages_series(std::span<const double> counts) {
  std::vector<double> out(counts.size(), kMissing);
  for (std::size_t t = 0; t < counts.size(); ++t)
    if (const auto v = log_abn_messages(counts, static_cast<std::ptrdiff_t>(t))) out[t] = *v;
  return out;
}

// ---------------------------------------------------------------------------
// Deseasonalization

Eigen::MatrixXd seasonal_design(std::span<const Date> dates, std::span<const bool> use) {
  std::array<int, 7> dow_count{};
  std::array<int, 13> month_count{};
  Eigen::Index rows = 0;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    if (!use[i]) continue;
    ++dow_count[static_cast<std::size_t>(weekday_index(dates[i]))];
    ++month_count[static_cast<std::size_t>(month_of(dates[i]))];
    ++rows;
  }
  std::vector<int> dows, months;
  for (int d = 0; d < 7; ++d) {
    if (dow_count[static_cast<std::size_t>(d)] == 0) continue;
    if (dow_count[static_cast<std::size_t>(d)] < 2)
      throw Error(ErrorCode::RankDeficient, "weekday " + std::to_string(d) + " has a single observation");
    dows.push_back(d);
  }
  for (int m = 1; m <= 12; ++m) {
    if (month_count[static_cast<std::size_t>(m)] == 0) continue;
    if (month_count[static_cast<std::size_t>(m)] < 2)
      throw Error(ErrorCode::RankDeficient, "month " + std::to_string(m) + " has a single observation");
    months.push_back(m);
  }
  // First present level of each group is the reference.
  const auto cols = static_cast<Eigen::Index>(1 + (dows.empty() ? 0 : dows.size() - 1) +
                                              (months.empty() ? 0 : months.size() - 1));
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    if (!use[i]) continue;
    X(r, 0) = 1.0;
    Eigen::Index c = 1;
    for (std::size_t k = 1; k < dows.size(); ++k, ++c)
      if (weekday_index(dates[i]) == dows[k]) X(r, c) = 1.0;
    for (std::size_t k = 1; k < months.size(); ++k, ++c)
      if (month_of(dates[i]) == months[k]) X(r, c) = 1.0;
    ++r;
  }
  return X;
}

std::vector<double> deseasonalize(std::span<const Date> dates, std::span<const double> values, SeasonalScheme scheme) {
  if (dates.size() != values.size())
    throw Error(ErrorCode::SchemaMismatch, "deseasonalize: dates and values differ in length");
  std::vector<double> out(values.size(), kMissing);

  if (scheme == SeasonalScheme::WeekOfSample) {
    std::map<Date, std::pair<double, int>> weeks;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (is_missing(values[i])) continue;
      auto& w = weeks[week_start(dates[i])];
      w.first += values[i];
      ++w.second;
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (is_missing(values[i])) continue;
      const auto& w = weeks[week_start(dates[i])];
      out[i] = values[i] - w.first / w.second;
    }
    return out;
  }

  std::vector<bool> use_vec(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) use_vec[i] = !is_missing(values[i]);
  std::unique_ptr<bool[]> use(new bool[values.size()]);
  std::copy(use_vec.begin(), use_vec.end(), use.get());
  const auto X = seasonal_design(dates, std::span<const bool>(use.get(), values.size()));
  Eigen::VectorXd y(X.rows());
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (use_vec[i]) y(r++) = values[i];
  if (X.rows() <= X.cols()) throw Error(ErrorCode::RankDeficient, "too few observations for seasonal dummies");
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) throw Error(ErrorCode::RankDeficient, "seasonal design is rank deficient");
  const Eigen::VectorXd resid = y - X * qr.solve(y);
  r = 0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (use_vec[i]) out[i] = resid(r++);
  return out;
}

// ---------------------------------------------------------------------------
// Portfolios

double value_weighted_return(std::span<const double> caps, std::span<const double> returns) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < caps.size(); ++i) {
    num += caps[i] * returns[i];
    den += caps[i];
  }
  return den > 0.0 ? num / den : kMissing;
}

std::array<std::vector<std::size_t>, 5> quintile_members(std::span<const FirmObservation> firms) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < firms.size(); ++i) {
    const auto& f = firms[i];
    if (!is_missing(f.ret_pct) && !is_missing(f.mktcap) && !is_missing(f.characteristic) && f.mktcap > 0.0)
      usable.push_back(i);
  }
  std::stable_sort(usable.begin(), usable.end(), [&](std::size_t a, std::size_t b) {
    if (firms[a].characteristic != firms[b].characteristic) return firms[a].characteristic < firms[b].characteristic;
    return firms[a].firm_id < firms[b].firm_id;
  });
  std::array<std::vector<std::size_t>, 5> out;
  const double last = static_cast<double>(usable.size()) - 1.0;
  std::size_t q = 0;
  for (std::size_t r = 0; r < usable.size(); ++r) {
    while (q < 4 && static_cast<double>(r) > 0.2 * static_cast<double>(q + 1) * last) ++q;
    out[q].push_back(usable[r]);
  }
  return out;
}

std::array<double, 5> quintile_portfolios(std::span<const FirmObservation> firms) {
  const auto members = quintile_members(firms);
  std::size_t total = 0;
  for (const auto& m : members) total += m.size();
  if (total < 5) throw Error(ErrorCode::TooFewFirms, std::to_string(total) + " usable firms, need 5");
  std::array<double, 5> out{};
  for (std::size_t q = 0; q < 5; ++q) {
    std::vector<double> caps, rets;
    for (const auto i : members[q]) {
      caps.push_back(firms[i].mktcap);
      rets.push_back(firms[i].ret_pct);
    }
    out[q] = value_weighted_return(caps, rets);
  }
  return out;
}

double idio_vol(const Eigen::Ref<const Eigen::VectorXd>& firm_returns, const Eigen::Ref<const Eigen::MatrixXd>& factors,
                int lookback, int min_obs) {
  if (factors.rows() != firm_returns.size())
    throw Error(ErrorCode::SchemaMismatch, "idio_vol: factor rows differ from return rows");
  const Eigen::Index n = firm_returns.size();
  const Eigen::Index start = std::max<Eigen::Index>(0, n - lookback);
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = start; i < n; ++i) {
    bool ok = !is_missing(firm_returns(i));
    for (Eigen::Index c = 0; ok && c < factors.cols(); ++c) ok = !is_missing(factors(i, c));
    if (ok) rows.push_back(i);
  }
  if (static_cast<int>(rows.size()) < min_obs)
    throw Error(ErrorCode::InsufficientHistory,
                std::to_string(rows.size()) + " usable observations, need " + std::to_string(min_obs));
  const auto m = static_cast<Eigen::Index>(rows.size());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < factors.cols(); ++c) {
    bool nonzero = false;
    for (const auto i : rows) nonzero = nonzero || factors(i, c) != 0.0;
    if (nonzero) keep.push_back(c);
  }
  Eigen::MatrixXd X(m, static_cast<Eigen::Index>(keep.size()) + 1);
  Eigen::VectorXd y(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    X(r, 0) = 1.0;
    for (std::size_t k = 0; k < keep.size(); ++k) X(r, static_cast<Eigen::Index>(k) + 1) = factors(rows[r], keep[k]);
    y(r) = firm_returns(rows[r]);
  }
  if (m <= X.cols()) throw Error(ErrorCode::InsufficientHistory, "fewer observations than factor coefficients");
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) throw Error(ErrorCode::RankDeficient, "factor design is rank deficient");
  const Eigen::VectorXd resid = y - X * qr.solve(y);
  std::vector<double> e(resid.data(), resid.data() + resid.size());
  return sample_sd(e);
}

std::string_view to_string(Characteristic c) noexcept {
  switch (c) {
    case Characteristic::Size: return "size";
    case Characteristic::IdioVol: return "idio_vol";
    case Characteristic::TotalVol: return "total_vol";
  }
  return "?";
}

FirmPanel FirmPanel::load(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto name = path.string();
  const auto date_col = table.find("date"), firm_col = table.find("firm_id"), ret_col = table.find("ret_pct"),
             cap_col = table.find("mktcap");
  if (!date_col || !firm_col || !ret_col || !cap_col)
    throw Error(ErrorCode::SchemaMismatch, name + ": need date,firm_id,ret_pct,mktcap columns");
  FirmPanel p;
  std::vector<std::size_t> factor_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == *date_col || c == *firm_col || c == *ret_col || c == *cap_col) continue;
    factor_cols.push_back(c);
    p.factor_names.push_back(table.header[c]);
  }
  p.factors.resize(factor_cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = name + " row " + std::to_string(r + 2);
    if (row.size() != table.header.size()) throw Error(ErrorCode::SchemaMismatch, where + ": wrong column count");
    const auto d = parse_date(row[*date_col]);
    if (!d) throw Error(ErrorCode::SchemaMismatch, where + ": bad date");
    auto num = [&](std::size_t c) {
      const auto v = csv::parse_number(row[c]);
      if (!v) throw Error(ErrorCode::SchemaMismatch, where + ": non-numeric " + table.header[c]);
      return *v;
    };
    p.dates.push_back(*d);
    p.firm_ids.push_back(row[*firm_col]);
    p.ret_pct.push_back(num(*ret_col));
    p.mktcap.push_back(num(*cap_col));
    for (std::size_t k = 0; k < factor_cols.size(); ++k) p.factors[k].push_back(num(factor_cols[k]));
  }
  return p;
}

namespace {

int month_key(Date d) {
  const std::chrono::year_month_day ymd{d};
  return static_cast<int>(ymd.year()) * 12 + static_cast<int>(static_cast<unsigned>(ymd.month())) - 1;
}

/// Compounded monthly % returns keyed by month.
using MonthlySeries = std::map<int, double>;

void compound_into(MonthlySeries& s, int month, double ret_pct) {
  if (is_missing(ret_pct)) return;
  auto [it, inserted] = s.try_emplace(month, 1.0);
  it->second *= 1.0 + ret_pct / 100.0;
}

void finish(MonthlySeries& s) {
  for (auto& [m, g] : s) g = (g - 1.0) * 100.0;
}

}  // namespace

std::vector<std::array<double, 5>> characteristic_portfolios(const FirmPanel& panel, const TradingCalendar& cal,
                                                             const SortOptions& options) {
  const auto dates = cal.dates();
  std::vector<std::array<double, 5>> out(dates.size());
  for (auto& a : out) a.fill(kMissing);

  std::map<Date, std::vector<std::size_t>> rows_by_date;
  for (std::size_t r = 0; r < panel.rows(); ++r) rows_by_date[panel.dates[r]].push_back(r);

  // Monthly compounded firm and factor returns, for the volatility sorts.
  std::map<std::string, MonthlySeries> firm_monthly;
  std::vector<std::size_t> factor_idx;
  std::optional<std::size_t> rf_idx;
  std::vector<MonthlySeries> factor_monthly;
  if (options.characteristic != Characteristic::Size) {
    for (const auto& f : options.factor_set) {
      const auto it = std::find(panel.factor_names.begin(), panel.factor_names.end(), f);
      if (it == panel.factor_names.end()) {
        if (options.characteristic == Characteristic::IdioVol)
          throw Error(ErrorCode::SchemaMismatch, "firm panel lacks factor column '" + f + "'");
        continue;
      }
      factor_idx.push_back(static_cast<std::size_t>(it - panel.factor_names.begin()));
    }
    if (const auto it = std::find(panel.factor_names.begin(), panel.factor_names.end(), "rf");
        it != panel.factor_names.end())
      rf_idx = static_cast<std::size_t>(it - panel.factor_names.begin());
    factor_monthly.resize(factor_idx.size());
    MonthlySeries rf_monthly;
    std::map<int, bool> factor_month_seen;
    for (const auto& [date, rows] : rows_by_date) {
      const int mk = month_key(date);
      for (const auto r : rows) compound_into(firm_monthly[panel.firm_ids[r]], mk, panel.ret_pct[r]);
      // Factors repeat on every firm row of a date; take the first.
      const auto r0 = rows.front();
      for (std::size_t k = 0; k < factor_idx.size(); ++k)
        compound_into(factor_monthly[k], mk, panel.factors[factor_idx[k]][r0]);
      if (rf_idx) compound_into(rf_monthly, mk, panel.factors[*rf_idx][r0]);
    }
    for (auto& [id, s] : firm_monthly) finish(s);
    for (auto& s : factor_monthly) finish(s);
    finish(rf_monthly);
    if (rf_idx)
      for (auto& [id, s] : firm_monthly)
        for (auto& [m, v] : s) {
          const auto it = rf_monthly.find(m);
          v = it == rf_monthly.end() ? kMissing : v - it->second;
        }
  }

  std::map<std::pair<std::string, int>, double> char_cache;
  auto vol_characteristic = [&](const std::string& firm, int month) -> double {
    const auto key = std::make_pair(firm, month);
    if (const auto it = char_cache.find(key); it != char_cache.end()) return it->second;
    double value = kMissing;
    const auto& fm = firm_monthly[firm];
    const auto L = options.lookback_months;
    Eigen::VectorXd y = Eigen::VectorXd::Constant(L, kMissing);
    Eigen::MatrixXd F = Eigen::MatrixXd::Constant(L, static_cast<Eigen::Index>(factor_monthly.size()), kMissing);
    for (int k = 0; k < L; ++k) {
      const int m = month - L + k;
      if (const auto it = fm.find(m); it != fm.end()) y(k) = it->second;
      for (std::size_t f = 0; f < factor_monthly.size(); ++f)
        if (const auto it = factor_monthly[f].find(m); it != factor_monthly[f].end())
          F(k, static_cast<Eigen::Index>(f)) = it->second;
    }
    try {
      if (options.characteristic == Characteristic::IdioVol) {
        value = idio_vol(y, F, L, options.min_months);
      } else {
        std::vector<double> present;
        for (Eigen::Index k = 0; k < y.size(); ++k)
          if (!is_missing(y(k))) present.push_back(y(k));
        if (static_cast<int>(present.size()) >= options.min_months) value = sample_sd(present);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientHistory && e.code() != ErrorCode::RankDeficient) throw;
    }
    char_cache.emplace(key, value);
    return value;
  };

  for (std::size_t t = 0; t < dates.size(); ++t) {
    const auto it = rows_by_date.find(dates[t]);
    if (it == rows_by_date.end()) continue;
    std::vector<FirmObservation> firms;
    for (const auto r : it->second) {
      FirmObservation f{panel.firm_ids[r], panel.ret_pct[r], panel.mktcap[r], kMissing};
      f.characteristic = options.characteristic == Characteristic::Size ? panel.mktcap[r]
                                                                        : vol_characteristic(f.firm_id, month_key(dates[t]));
      firms.push_back(std::move(f));
    }
    try {
      out[t] = quintile_portfolios(firms);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooFewFirms) throw;
    }
  }
  return out;
}

void write_quintiles_csv(std::ostream& out, std::span<const Date> dates, std::span<const std::array<double, 5>> returns) {
  out << "date,quintile,ret_pct\n";
  for (std::size_t t = 0; t < dates.size(); ++t)
    for (std::size_t q = 0; q < 5; ++q)
      if (!is_missing(returns[t][q]))
        out << format_date(dates[t]) << ',' << q + 1 << ',' << csv::format_number(returns[t][q]) << '\n';
}

}  // namespace giffluence

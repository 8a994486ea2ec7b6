#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "giffluence/error.hpp"
#include "giffluence/metrics.hpp"
#include "support.hpp"

using namespace giffluence;
using namespace testsupport;

namespace {

std::vector<Date> weekdays_from(const char* first, int n) {
  std::vector<Date> out;
  for (Date d = date(first); static_cast<int>(out.size()) < n; d += std::chrono::days{1})
    if (weekday_index(d) < 5) out.push_back(d);
  return out;
}

/// Residuals through the normal equations with a plain weekday/month dummy set.
std::vector<double> normal_equation_residuals(const std::vector<Date>& dates, const std::vector<double>& y) {
  std::vector<int> dows, months;
  for (const auto d : dates) {
    if (std::find(dows.begin(), dows.end(), weekday_index(d)) == dows.end()) dows.push_back(weekday_index(d));
    if (std::find(months.begin(), months.end(), month_of(d)) == months.end()) months.push_back(month_of(d));
  }
  const auto k = static_cast<Eigen::Index>(dows.size() + months.size() - 1);
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(y.size()), k);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    // Full weekday set, months minus the last one seen.
    for (std::size_t j = 0; j < dows.size(); ++j) X(r, static_cast<Eigen::Index>(j)) = weekday_index(dates[i]) == dows[j];
    for (std::size_t j = 0; j + 1 < months.size(); ++j)
      X(r, static_cast<Eigen::Index>(dows.size() + j)) = month_of(dates[i]) == months[j];
  }
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::VectorXd b = (X.transpose() * X).ldlt().solve(X.transpose() * yv);
  const Eigen::VectorXd e = yv - X * b;
  return {e.data(), e.data() + e.size()};
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("cumulative returns") {
  const std::vector<double> r{1.0, -1.0, 0.0, 0.0, 2.5};
  CHECK(cum_return(r, 0, 0, 1) == doctest::Approx(-0.01).epsilon(1e-12));
  CHECK(cum_return(r, 2, 0, 1) == 0.0);
  CHECK(cum_return(r, 4, 0, 0) == 2.5);
  CHECK_THROWS_AS(cum_return(r, 3, 1, 5), Error);
  const auto s = cum_return_series(r, 1, 2);
  CHECK(s[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::isnan(s[3]));
  CHECK(std::isnan(s[4]));

  std::vector<double> gap{1.0, kMissing, 1.0};
  CHECK(std::isnan(cum_return(gap, 0, 0, 2)));
}

TEST_CASE("cumulative returns telescope") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0.0, 2.0);
  std::vector<double> r(300);
  for (auto& x : r) x = nd(rng);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = static_cast<std::ptrdiff_t>(rng() % 200);
    const int b = static_cast<int>(rng() % 40), c = b + 1 + static_cast<int>(rng() % 40);
    const double left = cum_return(r, a, 0, b), right = cum_return(r, a, b + 1, c);
    const double joint = ((1 + left / 100) * (1 + right / 100) - 1) * 100;
    CHECK(std::abs(joint - cum_return(r, a, 0, c)) < 1e-12 * std::max(1.0, std::abs(joint)) * 100);
  }
}

TEST_CASE("realized volatility") {
  const std::vector<double> alt{1, -1, 1, -1, 1, -1};
  CHECK(realized_vol(alt, 0, 5) == doctest::Approx(1.0954451150103321).epsilon(1e-12));
  CHECK(realized_vol(std::vector<double>(5, 0.3), 0, 4) == doctest::Approx(0.0));
  CHECK_THROWS_AS(realized_vol(alt, 0, 0), Error);
  CHECK_THROWS_AS(realized_vol(alt, 3, 5), Error);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  std::vector<double> r(40);
  for (auto& x : r) x = nd(rng);
  const double base = realized_vol(r, 3, 20);
  auto shifted = r, scaled = r;
  for (auto& x : shifted) x += 7.5;
  for (auto& x : scaled) x *= -3.0;
  CHECK(realized_vol(shifted, 3, 20) == doctest::Approx(base).epsilon(1e-12));
  CHECK(realized_vol(scaled, 3, 20) == doctest::Approx(3.0 * base).epsilon(1e-12));
}

TEST_CASE("volume and count transforms") {
  CHECK(log_total_volume(std::vector<double>{0, 0, 0}, 0, 0, 2) == 0.0);
  CHECK(log_total_volume(std::vector<double>{std::exp(1.0) - 1.0}, 0, 0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(log_total_volume(std::vector<double>{10, 20}, 0, 0, 1) == doctest::Approx(std::log(31.0)).epsilon(1e-15));
  CHECK_THROWS_AS(log_total_volume(std::vector<double>{10, 20}, 1, 0, 1), Error);

  CHECK(log_ea(0) == 0.0);
  CHECK(log_ea(std::exp(1.0) - 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(log_ea(7) == doctest::Approx(std::log(8.0)).epsilon(1e-15));

  std::vector<double> counts(11, 100.0);
  CHECK(*log_abn_messages(counts, 10) == 0.0);
  counts[10] = 200.0;
  CHECK(*log_abn_messages(counts, 10) == doctest::Approx(std::log(201.0) - std::log(101.0)).epsilon(1e-12));
  CHECK(*log_abn_messages(counts, 10) == doctest::Approx(0.6882).epsilon(1e-4));
  CHECK_FALSE(log_abn_messages(counts, 9).has_value());

  const auto flat = log_abn_messages_series(std::vector<double>(30, 42.0));
  for (std::size_t t = 0; t < 30; ++t) {
    if (t < 10) CHECK(std::isnan(flat[t]));
    else CHECK(flat[t] == 0.0);
  }
}

TEST_CASE("deseasonalize by weekday and month") {
  const auto dates = weekdays_from("2021-01-04", 300);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;

  std::vector<double> pattern(dates.size());
  for (std::size_t i = 0; i < dates.size(); ++i) pattern[i] = 1.5 * weekday_index(dates[i]) - 0.3 * month_of(dates[i]);
  for (const double e : deseasonalize(dates, pattern, SeasonalScheme::DayOfWeekAndMonth)) CHECK(std::abs(e) < 1e-10);

  std::vector<double> mixed(dates.size());
  for (std::size_t i = 0; i < dates.size(); ++i) mixed[i] = pattern[i] + nd(rng) + 0.01 * static_cast<double>(i);
  const auto got = deseasonalize(dates, mixed, SeasonalScheme::DayOfWeekAndMonth);
  const auto want = normal_equation_residuals(dates, mixed);
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) < 1e-10);

  // Orthogonal to every dummy column.
  std::unique_ptr<bool[]> flags(new bool[dates.size()]);
  std::fill(flags.get(), flags.get() + dates.size(), true);
  const auto X = seasonal_design(dates, std::span<const bool>(flags.get(), dates.size()));
  const Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(got.data(), static_cast<Eigen::Index>(got.size()));
  CHECK((X.transpose() * e).cwiseAbs().maxCoeff() < 1e-8 * static_cast<double>(got.size()));

  // A series already orthogonal to the dummies passes through.
  std::vector<double> again(e.data(), e.data() + e.size());
  const auto twice = deseasonalize(dates, again, SeasonalScheme::DayOfWeekAndMonth);
  for (std::size_t i = 0; i < twice.size(); ++i) CHECK(std::abs(twice[i] - again[i]) < 1e-10);

  auto holes = mixed;
  holes[7] = kMissing;
  CHECK(std::isnan(deseasonalize(dates, holes, SeasonalScheme::DayOfWeekAndMonth)[7]));

  const std::vector<Date> lone{date("2021-01-04"), date("2021-01-05"), date("2021-01-11"), date("2021-02-01")};
  CHECK_THROWS_AS(deseasonalize(lone, std::vector<double>{1, 2, 3, 4}, SeasonalScheme::DayOfWeekAndMonth), Error);
}

TEST_CASE("deseasonalize by week of sample") {
  const auto dates = weekdays_from("2021-01-04", 10);
  std::vector<double> v{1, 2, 3, 4, 5, 10, 10, 10, kMissing, 14};
  const auto out = deseasonalize(dates, v, SeasonalScheme::WeekOfSample);
  CHECK(out[0] == -2.0);
  CHECK(out[4] == 2.0);
  CHECK(out[5] == -1.0);
  CHECK(std::isnan(out[8]));
  CHECK(out[9] == 3.0);
}

TEST_CASE("quintile portfolios") {
  std::vector<FirmObservation> firms;
  for (int i = 0; i < 10; ++i)
    firms.push_back({"F" + std::to_string(9 - i), static_cast<double>(i), 1.0 + i, static_cast<double>(i)});
  const auto members = quintile_members(firms);
  for (std::size_t q = 0; q < 5; ++q) {
    CHECK(members[q].size() == 2);
    CHECK(firms[members[q][0]].characteristic == 2.0 * static_cast<double>(q));
  }

  std::vector<FirmObservation> equal;
  for (int i = 0; i < 12; ++i) equal.push_back({"E" + std::to_string(i), 0.7, 5.0, static_cast<double>(i % 4)});
  for (const double r : quintile_portfolios(equal)) CHECK(r == doctest::Approx(0.7).epsilon(1e-15));

  CHECK(value_weighted_return(std::vector<double>{1, 1, 2}, std::vector<double>{1, 2, 3}) == 2.25);

  firms.resize(4);
  try {
    quintile_portfolios(firms);
    FAIL("expected too few firms");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewFirms);
  }
}

TEST_CASE("quintiles cover every ranked firm once") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + rng() % 60;
    std::vector<FirmObservation> firms;
    for (std::size_t i = 0; i < n; ++i)
      firms.push_back({"F" + std::to_string(i), static_cast<double>(rng() % 100) / 10.0,
                       i % 11 == 3 ? kMissing : 1.0 + static_cast<double>(rng() % 1000),
                       static_cast<double>(rng() % 7)});
    const auto members = quintile_members(firms);
    std::vector<std::size_t> seen;
    for (const auto& m : members) seen.insert(seen.end(), m.begin(), m.end());
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    std::size_t usable = 0;
    for (const auto& f : firms) usable += !std::isnan(f.mktcap);
    CHECK(seen.size() == usable);
    // Weights inside a quintile sum to one.
    for (const auto& m : members) {
      double total = 0.0;
      for (const auto i : m) total += firms[i].mktcap;
      double w = 0.0;
      for (const auto i : m) w += firms[i].mktcap / total;
      if (!m.empty()) CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("idiosyncratic volatility") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd F(36, 3);
  for (Eigen::Index i = 0; i < F.size(); ++i) F.data()[i] = nd(rng);
  const Eigen::VectorXd spanned = 0.5 + F.col(0).array() * 1.2 - F.col(2).array() * 0.4;
  CHECK(idio_vol(spanned, F) < 1e-10);

  Eigen::VectorXd r(36);
  for (auto& x : r) x = nd(rng);
  const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(36, 3);
  std::vector<double> rv(r.data(), r.data() + r.size());
  CHECK(idio_vol(r, zeros) == doctest::Approx(sample_sd(rv)).epsilon(1e-12));

  try {
    idio_vol(r.head(20), F.topRows(20));
    FAIL("expected insufficient history");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientHistory);
  }
  Eigen::MatrixXd dup = F;
  dup.col(1) = dup.col(0) * 2.0;
  try {
    idio_vol(r, dup);
    FAIL("expected rank deficiency");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficient);
  }
}

TEST_CASE("idiosyncratic volatility Monte Carlo") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd;
  double total = 0.0;
  const int reps = 1000;
  for (int k = 0; k < reps; ++k) {
    Eigen::MatrixXd F(36, 5);
    Eigen::VectorXd r(36);
    for (Eigen::Index i = 0; i < F.size(); ++i) F.data()[i] = 0.05 * nd(rng);
    for (Eigen::Index i = 0; i < 36; ++i) r(i) = 0.01 + F.row(i).sum() * 0.8 + 0.02 * nd(rng);
    total += idio_vol(r, F);
  }
  // The residual sd uses n - 1, so it sits a little under 0.02 with six coefficients.
  CHECK(std::abs(total / reps - 0.02) < 0.1 * 0.02);
}

TEST_CASE("characteristic portfolios from a firm panel") {
  const auto dir = scratch("firms");
  const auto dates = weekdays_from("2021-03-01", 5);
  std::ostringstream csv;
  csv << "date,firm_id,ret_pct,mktcap,mkt_rf,rf\n";
  for (const auto d : dates)
    for (int f = 0; f < 10; ++f) csv << format_date(d) << ",F" << f << ',' << f * 0.1 << ',' << (f + 1) * 100 << ",0.2,0.01\n";
  write_file(dir / "firms.csv", csv.str());
  const auto panel = FirmPanel::load(dir / "firms.csv");
  CHECK(panel.rows() == 50);
  const TradingCalendar cal(dates);
  const auto q = characteristic_portfolios(panel, cal, SortOptions{});
  REQUIRE(q.size() == 5);
  // Size quintile 0 holds F0 and F1: (100*0 + 200*0.1) / 300.
  CHECK(q[0][0] == doctest::Approx(20.0 / 300.0).epsilon(1e-12));
  SortOptions vol;
  vol.characteristic = Characteristic::IdioVol;
  vol.factor_set = {"mkt_rf"};
  for (const auto& row : characteristic_portfolios(panel, cal, vol)) CHECK(std::isnan(row[0]));
  std::ostringstream out;
  write_quintiles_csv(out, dates, q);
  CHECK(out.str().rfind("date,quintile,ret_pct\n", 0) == 0);
  fs::remove_all(dir);
}

}  // TEST_SUITE

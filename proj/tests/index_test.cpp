#include <doctest.h>

#include <random>
#include <sstream>

#include "giffluence/error.hpp"
#include "giffluence/index.hpp"
#include "support.hpp"

using namespace giffluence;
using namespace testsupport;

namespace {

using D = Declaration;

TradingCalendar week() { return TradingCalendar::weekdays(date("2021-03-01"), date("2021-03-05")); }

bool same_bits(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

/// Ledger with fixed counters, built through a single day of posts.
ValenceLedger ledger_with(const std::vector<std::tuple<std::string, int, int, int>>& gifs) {
  const auto cal = week();
  std::vector<PostRecord> day;
  int k = 0;
  for (const auto& [g, bull, bear, app] : gifs) {
    for (int i = 0; i < app; ++i) {
      const auto d = i < bull ? D::Bullish : (i < bull + bear ? D::Bearish : D::None);
      day.push_back(post("x" + std::to_string(k++), local(cal, "2021-03-01", 10, 0), {g}, d));
    }
  }
  return advance_ledger(ValenceLedger{}, day, cal);
}

std::vector<PostRecord> day_of(const TradingCalendar& cal, const std::vector<std::vector<std::string>>& gif_lists) {
  std::vector<PostRecord> out;
  for (const auto& g : gif_lists) out.push_back(post("d" + std::to_string(out.size()), local(cal, "2021-03-02", 10, 0), g));
  return out;
}

}  // namespace

TEST_SUITE("index") {

TEST_CASE("ledger counts per post and gif") {
  const auto cal = week();
  auto l = advance_ledger(ValenceLedger{}, std::vector{post("a", local(cal, "2021-03-01", 10, 0), {"g"}, D::Bullish)}, cal);
  CHECK(l.counters("g") == GifCounters{1, 0, 1});
  l = advance_ledger(l, std::vector{post("b", local(cal, "2021-03-02", 10, 0), {"g", "h"})}, cal);
  CHECK(l.counters("g") == GifCounters{1, 0, 2});
  CHECK(l.counters("h") == GifCounters{0, 0, 1});
  CHECK(l.as_of() == date("2021-03-02"));
  try {
    advance_ledger(l, std::vector{post("c", local(cal, "2021-03-01", 11, 0), {"g"})}, cal);
    FAIL("expected out of order");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfOrder);
  }
  CHECK_THROWS_AS(advance_ledger(l, std::vector{post("c", local(cal, "2021-03-04", 11, 0), {"g"})}, cal), Error);
  CHECK_THROWS_AS(l.counters("nope"), Error);
}

TEST_CASE("valence and eligibility") {
  const auto l = ledger_with({{"a", 7, 3, 10}, {"b", 5, 0, 5}, {"c", 2, 2, 20}});
  CHECK(*l.valence("a") == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(*l.valence("b") == 1.0);
  CHECK_FALSE(l.valence("c").has_value());
  // Four declarations: eligible only once the threshold drops to four.
  const auto four = ledger_with({{"a", 3, 1, 5}});
  CHECK_FALSE(four.valence("a").has_value());
  CHECK(*four.valence("a", 4) == doctest::Approx(0.4).epsilon(1e-15));
  try {
    l.valence("zzz");
    FAIL("expected unknown gif");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownGif);
  }
}

TEST_CASE("aggregate weights by daily appearances") {
  const auto cal = week();
  // A: valence 0.5, B: valence -0.5.
  const auto l = ledger_with({{"A", 5, 0, 10}, {"B", 0, 5, 10}});
  std::vector<std::vector<std::string>> lists(6, {"A"});
  lists.insert(lists.end(), 2, {"B"});
  CHECK(*aggregate_gif_sentiment(l, day_of(cal, lists)) == 0.25);

  const auto sym = ledger_with({{"up", 5, 0, 5}, {"down", 0, 5, 5}});
  CHECK(*aggregate_gif_sentiment(sym, day_of(cal, {{"up"}, {"down"}})) == 0.0);

  const auto one = ledger_with({{"g", 5, 1, 10}});
  CHECK(*aggregate_gif_sentiment(one, day_of(cal, std::vector<std::vector<std::string>>(10, {"g"}))) ==
        doctest::Approx(0.4).epsilon(1e-15));
  CHECK_FALSE(aggregate_gif_sentiment(one, day_of(cal, {{"unknown"}})).has_value());
}

TEST_CASE("literal denominator counts gif posts") {
  const auto cal = week();
  const auto l = ledger_with({{"A", 5, 0, 10}, {"B", 0, 1, 1}});
  // Two GIFs on one post, one ineligible.
  const auto posts = day_of(cal, {{"A", "B"}, {"A"}});
  CHECK(*aggregate_gif_sentiment(l, posts, 5, Denominator::EligibleAppearances) == 0.5);
  CHECK(*aggregate_gif_sentiment(l, posts, 5, Denominator::GifPosts) == 0.5);
  const auto l2 = ledger_with({{"A", 5, 0, 10}, {"C", 5, 0, 5}});
  CHECK(*aggregate_gif_sentiment(l2, day_of(cal, {{"A", "C"}}), 5, Denominator::GifPosts) == 1.5);
}

TEST_CASE("signed split and decomposition") {
  const auto cal = week();
  const auto l = ledger_with({{"p", 8, 0, 10}, {"n", 1, 5, 10}, {"z", 3, 3, 6}});
  const auto s = split_signed(l, day_of(cal, {{"p"}, {"n"}}));
  CHECK(*s.pos == 0.8);
  CHECK(*s.neg == -0.4);
  const auto zero_only = split_signed(l, day_of(cal, {{"z"}}));
  CHECK_FALSE(zero_only.pos.has_value());
  CHECK_FALSE(zero_only.neg.has_value());
  const auto pos_only = split_signed(l, day_of(cal, {{"p"}, {"p"}}));
  CHECK(*pos_only.pos == *aggregate_gif_sentiment(l, day_of(cal, {{"p"}, {"p"}})));
  CHECK_FALSE(pos_only.neg.has_value());

  // aggregate = (A_pos * POS + A_neg * NEG) / A_total, zero-valence GIFs only in the denominator.
  const auto posts = day_of(cal, {{"p"}, {"p", "n"}, {"z"}, {"n"}, {"z", "p"}});
  const auto agg = *aggregate_gif_sentiment(l, posts);
  const auto sp = split_signed(l, posts);
  CHECK(agg == doctest::Approx((3.0 * *sp.pos + 2.0 * *sp.neg) / 7.0).epsilon(1e-15));
}

TEST_CASE("selfdec and text averages") {
  const auto cal = week();
  std::vector<PostRecord> posts;
  for (int i = 0; i < 10; ++i)
    posts.push_back(post("s" + std::to_string(i), local(cal, "2021-03-01", 10, 0), {},
                         i < 6 ? D::Bullish : (i < 8 ? D::Bearish : D::None)));
  posts.push_back(post("g", local(cal, "2021-03-01", 10, 0), {"x"}, D::Bearish));
  CHECK(*selfdec(posts) == doctest::Approx(0.4).epsilon(1e-15));
  for (auto& p : posts) p.declaration = D::None;
  CHECK(*selfdec(posts) == 0.0);
  CHECK_FALSE(selfdec(std::vector<PostRecord>{posts.back()}).has_value());

  posts[0].text_score = 0.2;
  posts[1].text_score = -0.2;
  CHECK(*text_daily_average(posts) == 0.0);
  posts[1].text_score.reset();
  posts[0].text_score = 0.37;
  CHECK(*text_daily_average(posts) == 0.37);
  posts[0].text_score.reset();
  CHECK_FALSE(text_daily_average(posts).has_value());
}

TEST_CASE("disagreement is the sample sd of post valences") {
  const auto cal = week();
  const auto l = ledger_with({{"a", 2, 0, 5}, {"b", 0, 1, 5}, {"c", 1, 0, 5}, {"d", 5, 0, 5}});
  // a 0.4, b -0.2; mean-of-post for {b, c} is (-0.2 + 0.2)/2 = 0; not used below.
  const auto d = disagreement(l, day_of(cal, {{"a"}, {"a"}, {"b"}}), 1);
  CHECK(*d == doctest::Approx(0.3464101615137754).epsilon(1e-12));
  CHECK(*disagreement(l, day_of(cal, {{"d"}, {"d"}, {"d"}}), 1) == 0.0);
  CHECK_FALSE(disagreement(l, day_of(cal, {{"a"}}), 1).has_value());
}

TEST_CASE("standardize") {
  SentimentSeries s;
  s.keys = {{date("2021-03-01")}, {date("2021-03-02")}, {date("2021-03-03")}, {date("2021-03-04")}};
  s.values = {1.0, kMissing, 2.0, 3.0};
  const auto z = standardize(s);
  CHECK(z.values[0] == -1.0);
  CHECK(std::isnan(z.values[1]));
  CHECK(z.values[2] == 0.0);
  CHECK(z.values[3] == 1.0);
  const auto zz = standardize(z);
  for (std::size_t i = 0; i < 4; i += 2) CHECK(zz.values[i] == doctest::Approx(z.values[i]).epsilon(1e-12));
  const auto back = destandardize(z);
  CHECK(back.values[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(back.values[3] == doctest::Approx(3.0).epsilon(1e-15));

  s.values = {2.0, 2.0, 2.0, kMissing};
  CHECK_THROWS_AS(standardize(s), Error);
  s.values = {2.0, kMissing, kMissing, kMissing};
  try {
    standardize(s);
    FAIL("expected too few points");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewPoints);
  }

  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(3.0, 7.0);
  s.keys.clear();
  s.values.clear();
  for (int i = 0; i < 500; ++i) {
    s.keys.push_back({date("2020-01-01") + std::chrono::days{i}});
    s.values.push_back(i % 13 == 0 ? kMissing : nd(rng));
  }
  const auto w = standardize(s);
  std::vector<double> present;
  for (const double v : w.values)
    if (!std::isnan(v)) present.push_back(v);
  CHECK(std::abs(mean(present)) < 1e-9);
  CHECK(std::abs(sample_variance(present) - 1.0) < 1e-6);
}

TEST_CASE("appearance percentile filter") {
  std::vector<std::tuple<std::string, int, int, int>> gifs;
  std::vector<double> apps;
  for (int i = 1; i <= 100; ++i) {
    char name[8];
    std::snprintf(name, sizeof name, "g%03d", i);
    gifs.emplace_back(name, 0, 0, i);
    apps.push_back(i);
  }
  const auto l = ledger_with(gifs);
  for (const int pct : {50, 75}) {
    // Brute force: linear interpolation between the order statistics.
    const double pos = pct / 100.0 * 99.0;
    const auto lo = static_cast<std::size_t>(pos);
    const double threshold = apps[lo] + (pos - static_cast<double>(lo)) * (apps[lo + 1] - apps[lo]);
    std::size_t expected = 0;
    for (const double a : apps) expected += a > threshold;
    CHECK(appearance_percentile_threshold(l, pct) == doctest::Approx(threshold).epsilon(1e-15));
    CHECK(appearance_percentile_filter(l, pct).size() == expected);
  }
  CHECK(appearance_percentile_filter(ledger_with({{"a", 0, 0, 3}, {"b", 0, 0, 3}}), 50).empty());
  CHECK_THROWS_AS(appearance_percentile_filter(l, 60), Error);
  try {
    appearance_percentile_filter(ValenceLedger{}, 50);
    FAIL("expected empty ledger");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyLedger);
  }
}

TEST_CASE("autocorrelation report") {
  std::vector<GifDayCount> days;
  // Constant valence: excluded. Alternating: -1.
  for (std::uint32_t d = 0; d < 10; ++d) {
    days.push_back({0, d, 3, 1, 10});
    days.push_back({1, d, d % 2 ? 10 : 0, d % 2 ? 0 : 10, 10});
  }
  const auto s = gif_autocorrelation_report(days, 5);
  CHECK(s.n == 1);
  CHECK(s.mean == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("autocorrelation report recovers AR(1) persistence") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> nd(0.0, 0.1 * std::sqrt(1.0 - 0.49));
  std::vector<GifDayCount> days;
  for (GifId g = 0; g < 1000; ++g) {
    double x = nd(rng) / std::sqrt(1.0 - 0.49);
    for (std::uint32_t d = 0; d < 200; ++d) {
      x = 0.7 * x + nd(rng);
      const auto bull = static_cast<std::int64_t>(std::llround(5000.0 * (1.0 + x)));
      days.push_back({g, d, bull, 10000 - bull, 10000});
    }
  }
  const auto s = gif_autocorrelation_report(days, 25);
  CHECK(s.n == 1000);
  CHECK(std::abs(s.mean - 0.7) < 0.1);
}

TEST_CASE("hand corpus series") {
  const auto cal = TradingCalendar::weekdays(date("2021-03-01"), date("2021-03-03"));
  IndexOptions opt;
  opt.min_decl = 2;
  const auto r = build_index(hand_corpus(cal), cal, opt);
  CHECK(r.gif.values == std::vector<double>{1.0, -0.25, -0.25});
  CHECK(r.pos.values[0] == 1.0);
  CHECK(r.pos.values[1] == 0.5);
  CHECK(std::isnan(r.pos.values[2]));
  CHECK(std::isnan(r.neg.values[0]));
  CHECK(r.neg.values[1] == -1.0);
  CHECK(r.neg.values[2] == -0.25);
  CHECK(r.selfdec.values[0] == 0.5);
  CHECK(std::isnan(r.selfdec.values[1]));
  CHECK(r.selfdec.values[2] == -1.0);
  CHECK(r.text.values[0] == 0.125);
  CHECK(r.text.values[1] == 0.75);
  CHECK(std::isnan(r.text.values[2]));
  CHECK(r.message_count == std::vector<double>{4, 4, 4});
  CHECK(r.gif_post_count == std::vector<double>{2, 4, 3});

  opt.denominator = Denominator::GifPosts;
  const auto lit = build_index(hand_corpus(cal), cal, opt);
  CHECK(lit.gif.values[2] == 2.0 * -0.25 / 3.0);

  opt.denominator = Denominator::EligibleAppearances;
  opt.window = Window::ThroughPreviousDay;
  const auto prev = build_index(hand_corpus(cal), cal, opt);
  CHECK(std::isnan(prev.gif.values[0]));
  CHECK(prev.gif.values[1] == 1.0);   // only g1 eligible after day 1
  CHECK(prev.gif.values[2] == -1.0);  // g2 at -1 after day 2
}

TEST_CASE("cashtag filter is configurable") {
  const auto cal = TradingCalendar::weekdays(date("2021-03-01"), date("2021-03-03"));
  auto posts = hand_corpus(cal);
  posts[0].cashtags.clear();
  IndexOptions opt;
  opt.min_decl = 2;
  const auto dropped = build_index(posts, cal, opt);
  CHECK(dropped.posts_flagged == 1);
  CHECK(dropped.posts_used == 11);
  opt.require_cashtag = false;
  CHECK(build_index(posts, cal, opt).posts_used == 12);
}

TEST_CASE("ledger invariants and look-ahead freedom") {
  const auto cal = TradingCalendar::weekdays(date("2021-03-01"), date("2021-04-30"));
  std::mt19937_64 rng(9);
  auto random_posts = [&](std::size_t first_day, std::size_t n, const std::string& tag) {
    std::vector<PostRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
      const auto d = first_day + rng() % (cal.size() - first_day);
      const auto ts = cal.to_instant(cal.dates()[d], std::chrono::minutes{static_cast<int>(rng() % 900)});
      std::vector<std::string> gifs;
      for (int k = 0, m = static_cast<int>(rng() % 3); k < m; ++k) gifs.push_back("g" + std::to_string(rng() % 30));
      std::sort(gifs.begin(), gifs.end());
      gifs.erase(std::unique(gifs.begin(), gifs.end()), gifs.end());
      auto p = post(tag + std::to_string(i), ts, gifs, static_cast<D>(rng() % 3));
      if (rng() % 2) p.text_score = static_cast<double>(rng() % 200) / 100.0 - 1.0;
      out.push_back(std::move(p));
    }
    return out;
  };
  auto base = random_posts(0, 3000, "b");
  sort_posts(base);

  std::vector<GifCounters> prev_counts;
  std::vector<std::string> names;
  const auto full = build_index(base, cal, IndexOptions{}, [&](std::size_t, const ValenceLedger& l) {
    for (const auto& [name, c] : l.snapshot()) {
      CHECK(c.declarations() <= c.appearance);
      const auto it = std::find(names.begin(), names.end(), name);
      if (it != names.end()) {
        const auto& p = prev_counts[static_cast<std::size_t>(it - names.begin())];
        CHECK(c.bullish >= p.bullish);
        CHECK(c.bearish >= p.bearish);
        CHECK(c.appearance >= p.appearance);
        prev_counts[static_cast<std::size_t>(it - names.begin())] = c;
      } else {
        names.push_back(name);
        prev_counts.push_back(c);
      }
    }
  });
  for (const double v : full.gif.values)
    if (!std::isnan(v)) CHECK(std::abs(v) <= 1.0);

  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t cut = 5 + rng() % (cal.size() - 10);
    std::vector<PostRecord> mutated;
    for (const auto& p : base)
      if (cal.assign_day_index(p.timestamp) <= cut) mutated.push_back(p);
    auto extra = random_posts(cut + 1, 500, "m" + std::to_string(trial) + "_");
    mutated.insert(mutated.end(), extra.begin(), extra.end());
    sort_posts(mutated);
    const auto r = build_index(mutated, cal, IndexOptions{});
    for (std::size_t d = 0; d <= cut; ++d) {
      CHECK(same_bits(r.gif.values[d], full.gif.values[d]));
      CHECK(same_bits(r.pos.values[d], full.pos.values[d]));
      CHECK(same_bits(r.neg.values[d], full.neg.values[d]));
      CHECK(same_bits(r.selfdec.values[d], full.selfdec.values[d]));
      for (int s = 0; s < Bucket::kSlots; ++s) {
        const auto k = d * Bucket::kSlots + static_cast<std::size_t>(s);
        CHECK(same_bits(r.intraday_gif.values[k], full.intraday_gif.values[k]));
        CHECK(same_bits(r.dispersion.values[k], full.dispersion.values[k]));
      }
    }
  }
}

TEST_CASE("worker count does not change the index") {
  const auto cal = TradingCalendar::weekdays(date("2021-03-01"), date("2021-03-03"));
  const auto a = build_index(hand_corpus(cal), cal, IndexOptions{}, {}, 1);
  const auto b = build_index(hand_corpus(cal), cal, IndexOptions{}, {}, 3);
  for (std::size_t i = 0; i < a.gif.size(); ++i) CHECK(same_bits(a.gif.values[i], b.gif.values[i]));
}

TEST_CASE("snapshot format") {
  const auto l = ledger_with({{"b", 1, 0, 2}, {"a", 0, 1, 1}});
  std::ostringstream out;
  l.write_snapshot(out);
  CHECK(out.str() == "a,0,1,1\nb,1,0,2\n");
}

}  // TEST_SUITE

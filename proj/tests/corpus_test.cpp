#include <doctest.h>

#include <random>

#include "giffluence/corpus.hpp"
#include "giffluence/error.hpp"
#include "support.hpp"

using namespace giffluence;
using namespace testsupport;

namespace {

TradingCalendar march_2021() { return TradingCalendar::weekdays(date("2021-03-01"), date("2021-03-31")); }

std::string line(const std::string& body, const std::string& ts = "2021-03-02T10:00:00-05:00",
                 const std::string& decl = "Bullish") {
  return R"({"id":"p1","created_at":")" + ts + R"(","user":"u1","body":")" + body + R"(","sentiment":")" + decl +
         R"("})";
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("cashtags and gif ids come out of the body") {
  const auto p = parse_post(line("$AAPL to the moon https://media2.giphy.com/media/abc123/giphy.gif"), PostSchema{});
  CHECK(p.cashtags == std::vector<std::string>{"AAPL"});
  CHECK(p.gif_ids == std::vector<std::string>{"abc123"});
  CHECK(p.declaration == Declaration::Bullish);
  CHECK(p.body == "$AAPL to the moon https://media2.giphy.com/media/abc123/giphy.gif");
  CHECK(p.market_relevant());
}

TEST_CASE("post without tickers is kept but flagged") {
  const auto p = parse_post(line("no tickers here"), PostSchema{});
  CHECK(p.cashtags.empty());
  CHECK_FALSE(p.market_relevant());
}

TEST_CASE("repeated gif url counts once") {
  const std::string url = "https://media2.giphy.com/media/xyz/giphy.gif";
  const auto p = parse_post(line("$SPY " + url + " " + url), PostSchema{});
  CHECK(p.gif_ids == std::vector<std::string>{"xyz"});
}

TEST_CASE("cashtag extraction edge cases") {
  CHECK(extract_cashtags("$spy and $SPY, $tsla.") == std::vector<std::string>{"SPY", "TSLA"});
  CHECK(extract_cashtags("costs $100 or a$b").empty());
  CHECK(extract_cashtags("$BRK.B up") == std::vector<std::string>{"BRK.B"});
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_post("{not json", PostSchema{}), Error);
  try {
    parse_post(R"({"id":"a","body":"$SPY"})", PostSchema{});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingTimestamp);
  }
  auto strict = PostSchema{};
  strict.strict_declaration = true;
  try {
    parse_post(line("$SPY", "2021-03-02T10:00:00Z", "sideways"), strict);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidDeclaration);
  }
  CHECK(parse_post(line("$SPY", "2021-03-02T10:00:00Z", "sideways"), PostSchema{}).declaration == Declaration::None);
}

TEST_CASE("serialize round trip") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    PostRecord p;
    p.post_id = "id" + std::to_string(i);
    p.timestamp = Instant{std::chrono::milliseconds{1600000000000LL + static_cast<long long>(rng() % 100000000000ULL)}};
    p.user_id = "user\"" + std::to_string(rng() % 50);
    p.body = "$SPY line\nbreak \\ https://media2.giphy.com/media/g" + std::to_string(i % 7) + "/giphy.gif";
    p.cashtags = {"SPY"};
    p.gif_ids = {"g" + std::to_string(i % 7)};
    p.declaration = static_cast<Declaration>(rng() % 3);
    if (i % 2) p.text_score = std::round((static_cast<double>(rng() % 2001) / 1000.0 - 1.0) * 1e4) / 1e4;
    CHECK(parse_post(serialize_post(p), PostSchema::canonical()) == p);
  }
}

TEST_CASE("trading day assignment around the cutoff") {
  const auto cal = march_2021();
  CHECK(cal.assign_trading_day(local(cal, "2021-03-02", 15, 59)) == date("2021-03-02"));
  CHECK(cal.assign_trading_day(local(cal, "2021-03-02", 16, 1)) == date("2021-03-03"));
  CHECK(cal.assign_trading_day(local(cal, "2021-03-02", 16, 0)) == date("2021-03-02"));
  CHECK(cal.assign_trading_day(local(cal, "2021-03-05", 18, 0)) == date("2021-03-08"));
  CHECK(cal.assign_trading_day(local(cal, "2021-03-06", 12, 0)) == date("2021-03-08"));
  CHECK_THROWS_AS(cal.assign_trading_day(local(cal, "2021-03-31", 16, 30)), Error);
  CHECK_THROWS_AS(cal.assign_trading_day(local(cal, "2021-02-25", 12, 0)), Error);
}

TEST_CASE("bucket slots are half-open") {
  const auto cal = march_2021();
  // The window of 2021-03-03 opens at 16:00 on 03-02; 09:30 is 35 slots later.
  const auto at_open = cal.assign_bucket(local(cal, "2021-03-03", 9, 30));
  CHECK(at_open.trading_day == date("2021-03-03"));
  CHECK(at_open.slot == 35);
  CHECK(cal.assign_bucket(local(cal, "2021-03-03", 9, 47)).slot == 35);
  CHECK(cal.assign_bucket(local(cal, "2021-03-03", 9, 29)).slot == 34);
  const auto night = cal.assign_bucket(local(cal, "2021-03-03", 3, 10));
  CHECK(night.trading_day == date("2021-03-03"));
  CHECK(night.slot == 22);
  CHECK(format_bucket(at_open) == "2021-03-03Tslot35");
  CHECK(parse_bucket("2021-03-03Tslot35") == at_open);
}

TEST_CASE("partition and monotonicity over the calendar span") {
  const auto cal = TradingCalendar::weekdays(date("2021-03-01"), date("2021-03-19"));
  // Covers the DST switch on 2021-03-14.
  const auto first = local(cal, "2021-02-28", 16, 0) + std::chrono::minutes{1};
  const auto last = local(cal, "2021-03-19", 16, 0);
  Date prev_day{};
  Bucket prev_bucket{};
  bool prev_final = false;
  for (auto t = first; t <= last; t += std::chrono::minutes{7}) {
    const auto d = cal.assign_trading_day(t);
    const auto b = cal.assign_bucket(t);
    CHECK(b.trading_day == d);
    CHECK(b.slot >= 0);
    CHECK(b.slot < 48);
    CHECK(d >= prev_day);
    // Weekend windows wrap the clock; slots rise over the last 24 hours.
    const bool final = local(cal, format_date(d).c_str(), 16, 0) - t < std::chrono::hours{24};
    if (final && prev_final) CHECK(b >= prev_bucket);
    prev_day = d;
    prev_bucket = b;
    prev_final = final;
  }
}

TEST_CASE("calendar validation and file form") {
  CHECK_THROWS_AS(TradingCalendar({date("2021-03-02"), date("2021-03-01")}), Error);
  CHECK_THROWS_AS(TradingCalendar({date("2021-03-01")}, std::chrono::minutes{25 * 60}), Error);
  CHECK_THROWS_AS(TradingCalendar({date("2021-03-01")}, std::chrono::hours{16}, "Mars/Olympus"), Error);
  const auto dir = scratch("cal");
  write_file(dir / "cal.txt", "# demo\ncutoff=15:30\nzone=Europe/London\n2021-03-01\n2021-03-02\n");
  const auto cal = TradingCalendar::load(dir / "cal.txt");
  CHECK(cal.size() == 2);
  CHECK(cal.cutoff() == std::chrono::minutes{15 * 60 + 30});
  CHECK(cal.zone() == "Europe/London");
  write_file(dir / "again.txt", cal.serialize());
  const auto again = TradingCalendar::load(dir / "again.txt");
  CHECK(again.serialize() == cal.serialize());
  fs::remove_all(dir);
}

TEST_CASE("monthly controls carry into the next month") {
  const auto dir = scratch("ctl");
  const auto cal = TradingCalendar::weekdays(date("2021-08-30"), date("2021-09-03"));
  write_file(dir / "monthly.csv", "month,bw\n2021-07,1.5\n2021-08,2.5\n");
  write_file(dir / "daily.csv",
             "date,epu,flows\n2021-08-30,1,\n2021-08-31,2,\n2021-09-01,3,\n2021-09-02,4,\n2021-09-03,5,\n");
  const auto t = load_exogenous({dir / "daily.csv", dir / "monthly.csv"}, cal);
  CHECK(t.column("bw") == std::vector<double>{1.5, 1.5, 2.5, 2.5, 2.5});
  CHECK(t.column("epu") == std::vector<double>{1, 2, 3, 4, 5});
  CHECK_FALSE(t.has("flows"));
  CHECK_THROWS_AS(load_exogenous({dir / "daily.csv"}, cal, {"flows"}), Error);

  write_file(dir / "gap.csv", "date,epu\n2021-08-30,1\n2021-08-31,2\n2021-09-02,4\n2021-09-03,5\n");
  try {
    load_exogenous({dir / "gap.csv"}, cal);
    FAIL("expected a gap");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Gap);
    CHECK(std::string(e.what()).find("2021-09-01") != std::string::npos);
  }
  write_file(dir / "bad.csv", "when,epu\n2021-08-30,1\n");
  try {
    load_exogenous({dir / "bad.csv"}, cal);
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaMismatch);
  }
  fs::remove_all(dir);
}

TEST_CASE("ingest is independent of the worker count") {
  std::string text;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 3000; ++i) {
    const int minute = static_cast<int>(rng() % 50000);
    char ts[64];
    std::snprintf(ts, sizeof ts, "2021-03-%02dT%02d:%02d:00Z", 1 + minute / 1440 % 28, minute / 60 % 24, minute % 60);
    text += i % 97 == 0 ? "garbage line\n"
                        : line("$SPY https://media2.giphy.com/media/g" + std::to_string(rng() % 40) + "/giphy.gif", ts,
                               i % 3 ? "Bullish" : "Bearish") +
                              "\n";
  }
  const auto one = ingest_text(text, PostSchema{}, 1);
  const auto four = ingest_text(text, PostSchema{}, 4);
  CHECK(one.posts.size() + one.rejected.size() == 3000);
  CHECK(one.rejected.size() == 31);
  CHECK(one.posts == four.posts);
  CHECK(one.rejected.size() == four.rejected.size());
  CHECK(std::is_sorted(one.posts.begin(), one.posts.end(), [](const PostRecord& a, const PostRecord& b) {
    return std::tie(a.timestamp, a.post_id) < std::tie(b.timestamp, b.post_id);
  }));
}

}  // TEST_SUITE

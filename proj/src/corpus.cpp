#include "giffluence/corpus.hpp"

#include <glob.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <absl/time/civil_time.h>
#include <absl/time/time.h>
#include <rapidjson/document.h>
#include <rapidjson/stringbuffer.h>
#include <rapidjson/writer.h>

#include "giffluence/csv.hpp"
#include "giffluence/error.hpp"
#include "giffluence/parallel.hpp"
#include "giffluence/stats.hpp"

namespace giffluence {

std::string_view to_string(Declaration d) noexcept {
  switch (d) {
    case Declaration::Bullish: return "bullish";
    case Declaration::Bearish: return "bearish";
    case Declaration::None: break;
  }
  return "none";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

void push_unique(std::vector<std::string>& v, std::string s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(std::move(s));
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::vector<std::string> extract_cashtags(std::string_view text) {
  constexpr std::size_t kMaxTicker = 12;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '$') continue;
    if (i > 0 && (is_alnum(text[i - 1]) || text[i - 1] == '$')) continue;
    if (i + 1 >= text.size() || !is_alpha(text[i + 1])) continue;
    std::size_t j = i + 1;
    while (j < text.size() && (is_alnum(text[j]) || text[j] == '.')) ++j;
    auto token = text.substr(i + 1, j - i - 1);
    while (!token.empty() && token.back() == '.') token.remove_suffix(1);
    if (!token.empty() && token.size() <= kMaxTicker) push_unique(out, upper(token));
    i = j - 1;
  }
  return out;
}

std::vector<std::string> extract_gif_ids(std::string_view text) {
  static constexpr std::string_view kMarker = "giphy.com/media/";
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find(kMarker, pos)) != std::string_view::npos) {
    std::size_t id_begin = pos + kMarker.size();
    std::size_t j = id_begin;
    while (j < text.size() && (is_alnum(text[j]) || text[j] == '_' || text[j] == '-')) ++j;
    pos = j;
    if (j == id_begin || j >= text.size() || text[j] != '/') continue;
    // File name must end in .gif before the URL ends.
    std::size_t k = j + 1;
    while (k < text.size() && (is_alnum(text[k]) || text[k] == '_' || text[k] == '-' || text[k] == '.')) ++k;
    const auto file = text.substr(j + 1, k - j - 1);
    if (file.size() < 5 || file.substr(file.size() - 4) != ".gif") continue;
    push_unique(out, std::string(text.substr(id_begin, j - id_begin)));
  }
  return out;
}

PostSchema PostSchema::canonical() {
  PostSchema s;
  s.post_id = "id";
  s.timestamp = "ts";
  s.user_id = "user";
  s.body = "body";
  s.declaration = "decl";
  s.text_score = "text_score";
  s.cashtags = "cashtags";
  s.gif_ids = "gifs";
  s.gif_urls.clear();
  s.strict_declaration = true;
  return s;
}

PostSchema PostSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open schema " + path.string());
  PostSchema s;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::Config, path.string() + ":" + std::to_string(lineno) + ": expected field=key");
    const auto key = trim(l.substr(0, eq));
    const std::string value(trim(l.substr(eq + 1)));
    if (key == "post_id") s.post_id = value;
    else if (key == "timestamp") s.timestamp = value;
    else if (key == "user_id") s.user_id = value;
    else if (key == "body") s.body = value;
    else if (key == "declaration") s.declaration = value;
    else if (key == "text_score") s.text_score = value;
    else if (key == "cashtags") s.cashtags = value;
    else if (key == "gif_ids") s.gif_ids = value;
    else if (key == "gif_urls") s.gif_urls = value;
    else if (key == "strict_declaration") s.strict_declaration = value == "true" || value == "1";
    else throw Error(ErrorCode::Config, path.string() + ": unknown schema field '" + std::string(key) + "'");
  }
  if (s.timestamp.empty() || s.post_id.empty())
    throw Error(ErrorCode::Config, path.string() + ": post_id and timestamp keys are required");
  return s;
}

namespace {

using JsonValue = rapidjson::Value;

const JsonValue* member(const JsonValue& obj, const std::string& key) {
  if (key.empty()) return nullptr;
  const auto it = obj.FindMember(rapidjson::StringRef(key.data(), key.size()));
  if (it == obj.MemberEnd() || it->value.IsNull()) return nullptr;
  return &it->value;
}

std::string scalar_string(const JsonValue& v, std::string_view what) {
  if (v.IsString()) return std::string(v.GetString(), v.GetStringLength());
  if (v.IsInt64()) return std::to_string(v.GetInt64());
  if (v.IsUint64()) return std::to_string(v.GetUint64());
  throw Error(ErrorCode::MalformedRecord, std::string(what) + " must be a string");
}

std::vector<std::string_view> string_items(const JsonValue& v, std::string_view what) {
  std::vector<std::string_view> out;
  if (v.IsString()) {
    out.emplace_back(v.GetString(), v.GetStringLength());
    return out;
  }
  if (!v.IsArray()) throw Error(ErrorCode::MalformedRecord, std::string(what) + " must be a string array");
  for (const auto& item : v.GetArray()) {
    if (!item.IsString()) throw Error(ErrorCode::MalformedRecord, std::string(what) + " must be a string array");
    out.emplace_back(item.GetString(), item.GetStringLength());
  }
  return out;
}

Declaration parse_declaration(const JsonValue* v, bool strict) {
  if (v == nullptr) return Declaration::None;
  if (!v->IsString()) throw Error(ErrorCode::InvalidDeclaration, "declaration must be a string");
  const std::string_view s(v->GetString(), v->GetStringLength());
  if (iequals(s, "bullish")) return Declaration::Bullish;
  if (iequals(s, "bearish")) return Declaration::Bearish;
  if (s.empty() || iequals(s, "none")) return Declaration::None;
  if (strict) throw Error(ErrorCode::InvalidDeclaration, "unrecognized declaration '" + std::string(s) + "'");
  return Declaration::None;
}

}  // namespace

PostRecord parse_post(std::string_view raw_line, const PostSchema& schema) {
  rapidjson::Document doc;
  doc.Parse<rapidjson::kParseFullPrecisionFlag>(raw_line.data(), raw_line.size());
  if (doc.HasParseError() || !doc.IsObject()) throw Error(ErrorCode::MalformedRecord, "not a JSON object");

  PostRecord p;
  const auto* id = member(doc, schema.post_id);
  if (id == nullptr) throw Error(ErrorCode::MalformedRecord, "missing post id '" + schema.post_id + "'");
  p.post_id = scalar_string(*id, "post id");

  const auto* ts = member(doc, schema.timestamp);
  if (ts == nullptr || (ts->IsString() && ts->GetStringLength() == 0))
    throw Error(ErrorCode::MissingTimestamp, "missing '" + schema.timestamp + "'");
  if (!ts->IsString()) throw Error(ErrorCode::MalformedRecord, "timestamp must be a string");
  const std::string_view ts_text(ts->GetString(), ts->GetStringLength());
  const auto instant = parse_instant(ts_text);
  if (!instant) throw Error(ErrorCode::MalformedRecord, "unparseable timestamp '" + std::string(ts_text) + "'");
  p.timestamp = *instant;

  if (const auto* user = member(doc, schema.user_id)) p.user_id = scalar_string(*user, "user id");
  if (const auto* body = member(doc, schema.body)) {
    if (!body->IsString()) throw Error(ErrorCode::MalformedRecord, "body must be a string");
    p.body.assign(body->GetString(), body->GetStringLength());
  }

  p.declaration = parse_declaration(member(doc, schema.declaration), schema.strict_declaration);

  if (const auto* score = member(doc, schema.text_score)) {
    if (!score->IsNumber()) throw Error(ErrorCode::MalformedRecord, "text score must be a number");
    const double v = score->GetDouble();
    if (!std::isfinite(v) || v < -1.0 || v > 1.0)
      throw Error(ErrorCode::MalformedRecord, "text score outside [-1, 1]");
    p.text_score = v;
  }

  if (const auto* tags = member(doc, schema.cashtags))
    for (auto t : string_items(*tags, "cashtags"))
      if (!t.empty()) push_unique(p.cashtags, upper(t.front() == '$' ? t.substr(1) : t));
  for (auto& t : extract_cashtags(p.body)) push_unique(p.cashtags, std::move(t));

  if (const auto* gifs = member(doc, schema.gif_ids))
    for (auto g : string_items(*gifs, "gif ids"))
      if (!g.empty()) push_unique(p.gif_ids, std::string(g));
  if (const auto* urls = member(doc, schema.gif_urls))
    for (auto u : string_items(*urls, "gif urls"))
      for (auto& g : extract_gif_ids(u)) push_unique(p.gif_ids, std::move(g));
  for (auto& g : extract_gif_ids(p.body)) push_unique(p.gif_ids, std::move(g));
  return p;
}

std::string serialize_post(const PostRecord& post) {
  rapidjson::StringBuffer buf;
  rapidjson::Writer<rapidjson::StringBuffer> w(buf);
  auto str = [&w](std::string_view s) { w.String(s.data(), static_cast<rapidjson::SizeType>(s.size())); };
  w.StartObject();
  str("id");
  str(post.post_id);
  str("ts");
  str(format_instant(post.timestamp));
  str("user");
  str(post.user_id);
  str("body");
  str(post.body);
  str("cashtags");
  w.StartArray();
  for (const auto& t : post.cashtags) str(t);
  w.EndArray();
  str("gifs");
  w.StartArray();
  for (const auto& g : post.gif_ids) str(g);
  w.EndArray();
  str("decl");
  str(to_string(post.declaration));
  str("text_score");
  if (post.text_score) w.Double(*post.text_score);
  else w.Null();
  w.EndObject();
  return std::string(buf.GetString(), buf.GetSize());
}

void sort_posts(std::vector<PostRecord>& posts) {
  std::stable_sort(posts.begin(), posts.end(), [](const PostRecord& a, const PostRecord& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.post_id < b.post_id;
  });
}

std::string format_bucket(const Bucket& b) {
  char slot[8];
  std::snprintf(slot, sizeof slot, "%02d", b.slot);
  return format_date(b.trading_day) + "Tslot" + slot;
}

std::optional<Bucket> parse_bucket(std::string_view text) {
  if (text.size() != 17 || text.substr(10, 5) != "Tslot") return std::nullopt;
  const auto day = parse_date(text.substr(0, 10));
  int slot = 0;
  const auto s = text.substr(15);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), slot);
  if (!day || ec != std::errc{} || ptr != s.data() + s.size() || slot < 0 || slot >= Bucket::kSlots)
    return std::nullopt;
  return Bucket{*day, slot};
}

// ---------------------------------------------------------------------------
// TradingCalendar

struct TradingCalendar::Zone {
  absl::TimeZone tz;
};

TradingCalendar::TradingCalendar(std::vector<Date> dates, std::chrono::minutes cutoff, std::string zone)
    : dates_(std::move(dates)), cutoff_(cutoff), zone_name_(std::move(zone)) {
  if (dates_.empty()) throw Error(ErrorCode::Config, "trading calendar is empty");
  for (std::size_t i = 1; i < dates_.size(); ++i)
    if (!(dates_[i - 1] < dates_[i]))
      throw Error(ErrorCode::Config, "calendar dates not strictly increasing at " + format_date(dates_[i]));
  if (cutoff_ < std::chrono::minutes{0} || cutoff_ > std::chrono::hours{24})
    throw Error(ErrorCode::Config, "session cutoff outside 00:00-24:00");
  auto z = std::make_shared<Zone>();
  if (!absl::LoadTimeZone(zone_name_, &z->tz)) throw Error(ErrorCode::Config, "unknown time zone '" + zone_name_ + "'");
  zone_ = std::move(z);
}

TradingCalendar TradingCalendar::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open calendar " + path.string());
  std::vector<Date> dates;
  std::chrono::minutes cutoff = std::chrono::hours{16};
  std::string zone = "America/New_York";
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto l = trim(line);
    if (const auto hash = l.find('#'); hash != std::string_view::npos) l = trim(l.substr(0, hash));
    if (l.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(lineno);
    if (l.starts_with("cutoff=")) {
      const auto v = l.substr(7);
      int h = 0, m = 0;
      if (v.size() != 5 || v[2] != ':' || std::from_chars(v.data(), v.data() + 2, h).ec != std::errc{} ||
          std::from_chars(v.data() + 3, v.data() + 5, m).ec != std::errc{} || m > 59)
        throw Error(ErrorCode::Config, where + ": cutoff must be HH:MM");
      cutoff = std::chrono::minutes{h * 60 + m};
    } else if (l.starts_with("zone=")) {
      zone = std::string(l.substr(5));
    } else if (auto d = parse_date(l)) {
      dates.push_back(*d);
    } else {
      throw Error(ErrorCode::Config, where + ": expected a YYYY-MM-DD date");
    }
  }
  return TradingCalendar(std::move(dates), cutoff, std::move(zone));
}

TradingCalendar TradingCalendar::weekdays(Date first, Date last, std::chrono::minutes cutoff, std::string zone) {
  std::vector<Date> dates;
  for (Date d = first; d <= last; d += std::chrono::days{1})
    if (weekday_index(d) < 5) dates.push_back(d);
  return TradingCalendar(std::move(dates), cutoff, std::move(zone));
}

std::optional<std::size_t> TradingCalendar::index_of(Date d) const {
  const auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end() || *it != d) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

std::pair<std::size_t, int> TradingCalendar::assign(Instant ts) const {
  using namespace std::chrono;
  constexpr std::int64_t kDayMs = 86'400'000;
  constexpr std::int64_t kSlotMs = 1'800'000;
  const std::int64_t ms = ts.time_since_epoch().count();
  const std::int64_t sub = ((ms % 1000) + 1000) % 1000;
  const auto cs = absl::ToCivilSecond(absl::FromUnixMillis(ms), zone_->tz);
  const Date local_date{year{static_cast<int>(cs.year())} / cs.month() / cs.day()};
  const std::int64_t tod = (cs.hour() * 3600 + cs.minute() * 60 + cs.second()) * 1000 + sub;
  const std::int64_t cut = duration_cast<milliseconds>(cutoff_).count();

  const Date candidate = tod <= cut ? local_date : local_date + days{1};
  const auto it = std::lower_bound(dates_.begin(), dates_.end(), candidate);
  if (candidate < dates_.front() || it == dates_.end())
    throw Error(ErrorCode::OutOfCalendar, format_instant(ts) + " outside calendar " + format_date(dates_.front()) +
                                              ".." + format_date(dates_.back()));
  const std::int64_t rel = ((tod - cut) % kDayMs + kDayMs) % kDayMs;
  // The cutoff instant itself closes the window and belongs to its last slot.
  const int slot = rel == 0 ? Bucket::kSlots - 1 : static_cast<int>(rel / kSlotMs);
  return {static_cast<std::size_t>(it - dates_.begin()), slot};
}

Date TradingCalendar::assign_trading_day(Instant ts) const { return dates_[assign(ts).first]; }

std::size_t TradingCalendar::assign_day_index(Instant ts) const { return assign(ts).first; }

Bucket TradingCalendar::assign_bucket(Instant ts) const {
  const auto [day, slot] = assign(ts);
  return Bucket{dates_[day], slot};
}

Instant TradingCalendar::to_instant(Date local_date, std::chrono::milliseconds time_of_day) const {
  using namespace std::chrono;
  const year_month_day ymd{local_date};
  const auto secs = duration_cast<seconds>(time_of_day).count();
  const absl::CivilSecond cs(static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                             static_cast<unsigned>(ymd.day()), 0, 0, secs);
  const auto t = absl::FromCivil(cs, zone_->tz);
  return Instant{milliseconds{absl::ToUnixMillis(t) + time_of_day.count() % 1000}};
}

std::string TradingCalendar::serialize() const {
  char cut[8];
  std::snprintf(cut, sizeof cut, "%02d:%02d", static_cast<int>(cutoff_.count() / 60),
                static_cast<int>(cutoff_.count() % 60));
  std::string out = "zone=" + zone_name_ + "\ncutoff=" + cut + "\n";
  for (const auto d : dates_) out += format_date(d) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Exogenous controls

const std::vector<double>& ControlTable::column(std::string_view name) const {
  const auto it = columns.find(std::string(name));
  if (it == columns.end()) throw Error(ErrorCode::UnknownSeries, "control column '" + std::string(name) + "' absent");
  return it->second;
}

ControlTable load_exogenous(const std::vector<std::filesystem::path>& paths, const TradingCalendar& cal,
                            const std::vector<std::string>& required_columns) {
  using namespace std::chrono;
  ControlTable table;
  table.dates.assign(cal.dates().begin(), cal.dates().end());
  const std::size_t n = table.dates.size();

  for (const auto& path : paths) {
    const auto csv = csv::read(path);
    const auto name = path.string();
    if (csv.header.empty() || (csv.header[0] != "date" && csv.header[0] != "month"))
      throw Error(ErrorCode::SchemaMismatch, name + ": first column must be 'date' or 'month'");
    const bool monthly = csv.header[0] == "month";

    // key -> row values
    std::map<Date, std::vector<double>> rows;
    std::vector<bool> any_value(csv.header.size(), false);
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
      const auto& row = csv.rows[r];
      const auto where = name + " row " + std::to_string(r + 2);
      if (row.size() != csv.header.size()) throw Error(ErrorCode::SchemaMismatch, where + ": wrong column count");
      std::optional<Date> key;
      if (monthly) {
        key = parse_month(row[0]);
        if (!key) key = parse_date(row[0]);
        if (key) key = first_of_month(*key);
      } else {
        key = parse_date(row[0]);
      }
      if (!key) throw Error(ErrorCode::SchemaMismatch, where + ": bad key '" + row[0] + "'");
      std::vector<double> values(csv.header.size(), kMissing);
      for (std::size_t c = 1; c < row.size(); ++c) {
        const auto v = csv::parse_number(row[c]);
        if (!v) throw Error(ErrorCode::SchemaMismatch, where + ": non-numeric '" + row[c] + "' in " + csv.header[c]);
        values[c] = *v;
        if (!is_missing(*v)) any_value[c] = true;
      }
      if (!rows.emplace(*key, std::move(values)).second)
        throw Error(ErrorCode::SchemaMismatch, where + ": duplicate key '" + row[0] + "'");
    }

    if (!monthly && !rows.empty()) {
      const Date lo = rows.begin()->first, hi = rows.rbegin()->first;
      for (const auto d : table.dates)
        if (d >= lo && d <= hi && !rows.contains(d))
          throw Error(ErrorCode::Gap, name + ": missing trading day " + format_date(d));
    }

    for (std::size_t c = 1; c < csv.header.size(); ++c) {
      const auto& col = csv.header[c];
      if (table.columns.contains(col)) throw Error(ErrorCode::SchemaMismatch, name + ": duplicate column '" + col + "'");
      if (!any_value[c]) continue;
      std::vector<double> aligned(n, kMissing);
      for (std::size_t i = 0; i < n; ++i) {
        Date key = table.dates[i];
        if (monthly) {
          const year_month_day ymd{key};
          key = Date{(ymd.year() / ymd.month() / 1)} - days{1};
          key = first_of_month(key);
        }
        if (const auto it = rows.find(key); it != rows.end()) aligned[i] = it->second[c];
      }
      table.columns.emplace(col, std::move(aligned));
    }
  }
  for (const auto& req : required_columns)
    if (!table.has(req)) throw Error(ErrorCode::SchemaMismatch, "required control column '" + req + "' not found");
  return table;
}

// ---------------------------------------------------------------------------
// Ingestion

std::vector<std::filesystem::path> expand_glob(const std::string& pattern) {
  std::vector<std::filesystem::path> out;
  glob_t g{};
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  ::globfree(&g);
  if (out.empty() && std::filesystem::exists(pattern)) out.emplace_back(pattern);
  std::sort(out.begin(), out.end());
  return out;
}

IngestResult ingest_text(std::string_view text, const PostSchema& schema, int workers, std::string_view file_label) {
  struct Line {
    std::string_view text;
    std::size_t number;
  };
  std::vector<Line> lines;
  std::size_t pos = 0, number = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    const auto l = trim(text.substr(pos, end - pos));
    if (!l.empty()) lines.push_back({l, number});
    pos = end + 1;
  }

  struct Partial {
    std::vector<PostRecord> posts;
    std::vector<RejectedLine> rejected;
  };
  std::vector<Partial> parts(static_cast<std::size_t>(std::max(1, workers)));
  parallel_chunks(lines.size(), workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    auto& part = parts[chunk];
    part.posts.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      try {
        part.posts.push_back(parse_post(lines[i].text, schema));
      } catch (const Error& e) {
        part.rejected.push_back({std::string(file_label), lines[i].number, e.what()});
      }
    }
  });

  IngestResult result;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.posts.size();
  result.posts.reserve(total);
  for (auto& p : parts) {
    std::move(p.posts.begin(), p.posts.end(), std::back_inserter(result.posts));
    std::move(p.rejected.begin(), p.rejected.end(), std::back_inserter(result.rejected));
  }
  sort_posts(result.posts);
  for (const auto& p : result.posts)
    if (!p.market_relevant()) ++result.non_market;
  return result;
}

IngestResult ingest_files(const std::vector<std::filesystem::path>& files, const PostSchema& schema,
                          const TradingCalendar* cal, int workers) {
  IngestResult all;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + f.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    auto part = ingest_text(ss.str(), schema, workers, f.filename().string());
    if (all.posts.empty()) {
      all.posts = std::move(part.posts);
    } else {
      all.posts.reserve(all.posts.size() + part.posts.size());
      std::move(part.posts.begin(), part.posts.end(), std::back_inserter(all.posts));
    }
    std::move(part.rejected.begin(), part.rejected.end(), std::back_inserter(all.rejected));
  }
  if (files.size() > 1) sort_posts(all.posts);
  if (cal != nullptr) {
    std::vector<char> keep(all.posts.size(), 1);
    parallel_chunks(all.posts.size(), workers, [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        try {
          (void)cal->assign(all.posts[i].timestamp);
        } catch (const Error&) {
          keep[i] = 0;
        }
      }
    });
    std::size_t w = 0;
    for (std::size_t i = 0; i < all.posts.size(); ++i) {
      if (keep[i]) {
        if (w != i) all.posts[w] = std::move(all.posts[i]);
        ++w;
      } else {
        ++all.out_of_calendar;
      }
    }
    all.posts.resize(w);
  }
  all.non_market = 0;
  for (const auto& p : all.posts)
    if (!p.market_relevant()) ++all.non_market;
  return all;
}

void write_posts(const std::filesystem::path& path, std::span<const PostRecord> posts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& p : posts) out << serialize_post(p) << '\n';
}

}  // namespace giffluence

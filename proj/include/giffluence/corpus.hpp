#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "giffluence/dates.hpp"

namespace giffluence {

enum class Declaration : std::uint8_t { None, Bullish, Bearish };

std::string_view to_string(Declaration d) noexcept;

/// One parsed social-media post.
struct PostRecord {
  std::string post_id;
  Instant timestamp{};
  std::string user_id;
  std::string body;
  std::vector<std::string> cashtags;  // uppercase, first-seen order, unique
  std::vector<std::string> gif_ids;   // first-seen order, unique
  Declaration declaration = Declaration::None;
  std::optional<double> text_score;   // externally supplied, in [-1, 1]

  /// Posts without a cashtag are kept but flagged as not market relevant.
  bool market_relevant() const noexcept { return !cashtags.empty(); }
  bool has_gif() const noexcept { return !gif_ids.empty(); }

  friend bool operator==(const PostRecord&, const PostRecord&) = default;
};

/// Maps PostRecord fields onto the keys of the input JSON objects.
///
/// Loaded from a flat `field=json_key` file. Fields left empty are not read.
/// `cashtags` and `gif_ids` name optional array fields whose contents are merged
/// with whatever is extracted from the body; `gif_urls` names a string or array
/// field holding GIPHY URLs.
struct PostSchema {
  std::string post_id = "id";
  std::string timestamp = "created_at";
  std::string user_id = "user";
  std::string body = "body";
  std::string declaration = "sentiment";
  std::string text_score = "text_score";
  std::string cashtags;
  std::string gif_ids;
  std::string gif_urls;
  /// Reject unrecognized declaration strings instead of mapping them to None.
  bool strict_declaration = false;

  static PostSchema load(const std::filesystem::path& path);
  /// The schema of lines written by serialize_post.
  static PostSchema canonical();
};

/// Uppercased `$TICKER` tokens in first-seen order, deduplicated.
std::vector<std::string> extract_cashtags(std::string_view text);
/// IDs from `https://media*.giphy.com/media/{id}/<file>.gif` links, deduplicated.
std::vector<std::string> extract_gif_ids(std::string_view text);

/// Throws Error{MalformedRecord | MissingTimestamp | InvalidDeclaration}.
PostRecord parse_post(std::string_view raw_line, const PostSchema& schema);
/// Canonical single-line JSON; parse_post(serialize_post(p), PostSchema::canonical()) == p.
std::string serialize_post(const PostRecord& post);

/// (timestamp, post_id) ordering used for deterministic merges.
void sort_posts(std::vector<PostRecord>& posts);

/// Trading-day window (prev cutoff, cutoff] split into 48 half-hour slots.
/// Slot 0 starts at the previous session's cutoff.
struct Bucket {
  Date trading_day{};
  int slot = 0;

  static constexpr int kSlots = 48;
  friend auto operator<=>(const Bucket&, const Bucket&) = default;
};

/// `YYYY-MM-DDTslotNN`.
std::string format_bucket(const Bucket& b);
std::optional<Bucket> parse_bucket(std::string_view text);

class TradingCalendar {
 public:
  /// Throws Error{Config} when dates are not strictly increasing, the cutoff is
  /// outside [0, 24h] or the zone is unknown to the zone database.
  explicit TradingCalendar(std::vector<Date> dates, std::chrono::minutes cutoff = std::chrono::hours{16},
                           std::string zone = "America/New_York");

  /// Text file: one `YYYY-MM-DD` per line, plus optional `cutoff=HH:MM` and
  /// `zone=<IANA name>` lines. `#` starts a comment.
  static TradingCalendar load(const std::filesystem::path& path);
  /// Every Monday-Friday between first and last, inclusive.
  static TradingCalendar weekdays(Date first, Date last, std::chrono::minutes cutoff = std::chrono::hours{16},
                                  std::string zone = "America/New_York");

  std::span<const Date> dates() const noexcept { return dates_; }
  std::size_t size() const noexcept { return dates_.size(); }
  std::chrono::minutes cutoff() const noexcept { return cutoff_; }
  const std::string& zone() const noexcept { return zone_name_; }
  std::optional<std::size_t> index_of(Date d) const;

  /// Throws Error{OutOfCalendar}.
  Date assign_trading_day(Instant ts) const;
  std::size_t assign_day_index(Instant ts) const;
  Bucket assign_bucket(Instant ts) const;
  /// Day index and slot in one zone conversion.
  std::pair<std::size_t, int> assign(Instant ts) const;

  /// Exchange-local date and time to UTC. Ambiguous or skipped local times resolve
  /// to the pre-transition offset.
  Instant to_instant(Date local_date, std::chrono::milliseconds time_of_day) const;

  /// Text form accepted by load().
  std::string serialize() const;

 private:
  struct Zone;
  std::vector<Date> dates_;
  std::chrono::minutes cutoff_;
  std::string zone_name_;
  std::shared_ptr<const Zone> zone_;
};

/// Daily-aligned exogenous controls: one column per series, NaN = missing.
struct ControlTable {
  std::vector<Date> dates;
  std::map<std::string, std::vector<double>> columns;

  bool has(std::string_view name) const { return columns.find(std::string(name)) != columns.end(); }
  const std::vector<double>& column(std::string_view name) const;
};

/// Reads CSV control files. A first column named `date` marks a daily file and
/// `month` a monthly one; monthly values are carried onto every trading day of
/// the following month. Columns with no values at all are dropped.
/// Throws Error{SchemaMismatch | Gap}.
ControlTable load_exogenous(const std::vector<std::filesystem::path>& paths, const TradingCalendar& cal,
                            const std::vector<std::string>& required_columns = {});

struct RejectedLine {
  std::string file;
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct IngestResult {
  std::vector<PostRecord> posts;  // sorted by (timestamp, post_id)
  std::vector<RejectedLine> rejected;
  std::size_t non_market = 0;
  std::size_t out_of_calendar = 0;
};

/// Expands a shell glob; a pattern without matches that names an existing file returns it.
std::vector<std::filesystem::path> expand_glob(const std::string& pattern);

/// Parses posts from JSONL text on `workers` threads. The result does not depend on `workers`.
IngestResult ingest_text(std::string_view text, const PostSchema& schema, int workers = 1,
                         std::string_view file_label = {});
/// Parses every file, merges and sorts. Posts outside `cal` are counted and dropped when a calendar is given.
IngestResult ingest_files(const std::vector<std::filesystem::path>& files, const PostSchema& schema,
                          const TradingCalendar* cal = nullptr, int workers = 1);

void write_posts(const std::filesystem::path& path, std::span<const PostRecord> posts);

}  // namespace giffluence

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "giffluence/corpus.hpp"
#include "giffluence/stats.hpp"

namespace giffluence {

using GifId = std::uint32_t;

struct GifCounters {
  std::int64_t bullish = 0;
  std::int64_t bearish = 0;
  std::int64_t appearance = 0;

  std::int64_t declarations() const noexcept { return bullish + bearish; }
  friend bool operator==(const GifCounters&, const GifCounters&) = default;
};

/// A post as the index sees it: interned GIFs plus the fields the sentiment
/// measures read. `gif_count` ids start at `gif_offset` in a shared pool.
struct CompactPost {
  std::uint32_t gif_offset = 0;
  std::uint32_t gif_count = 0;
  Declaration declaration = Declaration::None;
  std::uint8_t slot = 0;
  double text_score = kMissing;
};

/// A run of posts plus the pool their GIF ids live in.
struct PostBatch {
  std::span<const CompactPost> posts;
  std::span<const GifId> pool;

  std::span<const GifId> gifs(const CompactPost& p) const { return pool.subspan(p.gif_offset, p.gif_count); }
};

/// Per-GIF cumulative bullish / bearish / appearance counts over every post with
/// trading day <= as_of. GIF ids are interned in first-appearance order.
class ValenceLedger {
 public:
  std::optional<Date> as_of() const noexcept { return as_of_; }

  /// Interns a GIF name. Interning alone does not make a GIF visible: lookups,
  /// snapshots and size() only see GIFs with at least one appearance.
  GifId intern(std::string_view gif_id);
  std::optional<GifId> find(std::string_view gif_id) const;
  const std::string& name(GifId id) const { return names_[id]; }
  /// Number of GIFs with at least one appearance.
  std::size_t size() const noexcept { return visible_; }
  std::size_t interned() const noexcept { return names_.size(); }

  const GifCounters& counters(GifId id) const { return counters_[id]; }
  /// Throws Error{UnknownGif} for GIFs that have not appeared.
  const GifCounters& counters(std::string_view gif_id) const;

  /// Folds in one trading day. Throws Error{OutOfOrder} unless `day` is later than as_of.
  void advance(Date day, const PostBatch& batch);

  /// (B - b) / A when B + b >= min_decl, else nullopt (ineligible).
  std::optional<double> valence(GifId id, int min_decl = 5) const;
  /// Throws Error{UnknownGif}.
  std::optional<double> valence(std::string_view gif_id, int min_decl = 5) const;

  /// (gif_id, counters) sorted by gif_id, visible GIFs only.
  std::vector<std::pair<std::string, GifCounters>> snapshot() const;
  /// `gif_id,cum_bullish,cum_bearish,cum_appearance` per line, sorted by gif_id.
  void write_snapshot(std::ostream& out) const;

 private:
  std::optional<Date> as_of_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, GifId> ids_;
  std::vector<GifCounters> counters_;
  std::size_t visible_ = 0;
};

/// Owns compact posts converted from PostRecords against a ledger's id space.
struct CompactPosts {
  std::vector<CompactPost> posts;
  std::vector<GifId> pool;

  PostBatch batch() const { return {posts, pool}; }
  PostBatch batch(std::size_t begin, std::size_t end) const {
    return {std::span<const CompactPost>(posts).subspan(begin, end - begin), pool};
  }
};

/// Interns every GIF into `ledger` (for posts about to be advanced).
CompactPosts compact_posts(std::span<const PostRecord> posts, ValenceLedger& ledger);
/// Read-only conversion; GIFs the ledger has never seen map to an id it treats as ineligible.
CompactPosts compact_posts(std::span<const PostRecord> posts, const ValenceLedger& ledger);

/// Folds one trading day of posts into a copy of `ledger`. Every post must fall
/// on the calendar's next trading day after ledger.as_of() (any day for a fresh
/// ledger); otherwise throws Error{OutOfOrder}. An empty batch moves as_of forward.
ValenceLedger advance_ledger(ValenceLedger ledger, std::span<const PostRecord> day_posts, const TradingCalendar& cal);

enum class Denominator {
  EligibleAppearances,  // weights sum to one over eligible GIFs
  GifPosts,             // literal count of GIF-carrying posts
};

enum class Window {
  ThroughDay,          // day-t valences use counts through day t
  ThroughPreviousDay,  // day-t valences use counts through day t-1
};

/// Which GIFs may contribute on a given day.
struct Eligibility {
  int min_decl = 5;
  /// Cumulative appearance must exceed this (strict). -inf disables the filter.
  double min_appearance_exclusive = -std::numeric_limits<double>::infinity();

  bool admits(const GifCounters& c) const noexcept {
    return c.appearance > 0 && c.declarations() >= min_decl &&
           static_cast<double>(c.appearance) > min_appearance_exclusive;
  }
};

/// Appearance-weighted mean valence of eligible GIFs; nullopt when none appeared.
std::optional<double> aggregate_gif_sentiment(const ValenceLedger& ledger, const PostBatch& posts,
                                              const Eligibility& rule,
                                              Denominator denominator = Denominator::EligibleAppearances);
std::optional<double> aggregate_gif_sentiment(const ValenceLedger& ledger, std::span<const PostRecord> posts,
                                              int min_decl = 5,
                                              Denominator denominator = Denominator::EligibleAppearances);

struct SignedSplit {
  std::optional<double> pos;
  std::optional<double> neg;
};

/// The aggregate restricted to strictly positive / strictly negative valence GIFs.
SignedSplit split_signed(const ValenceLedger& ledger, const PostBatch& posts, const Eligibility& rule);
SignedSplit split_signed(const ValenceLedger& ledger, std::span<const PostRecord> posts, int min_decl = 5);

/// Net bullish share among posts without GIFs; nullopt when every post has one.
std::optional<double> selfdec(const PostBatch& posts);
std::optional<double> selfdec(std::span<const PostRecord> posts);

std::optional<double> text_daily_average(const PostBatch& posts);
std::optional<double> text_daily_average(std::span<const PostRecord> posts);

/// Sample sd across GIF posts of each post's mean eligible-GIF valence; nullopt under two contributors.
std::optional<double> disagreement(const ValenceLedger& ledger, const PostBatch& posts, const Eligibility& rule);
std::optional<double> disagreement(const ValenceLedger& ledger, std::span<const PostRecord> posts, int min_decl = 5);

/// GIFs whose cumulative appearance strictly exceeds the pct-th percentile
/// (linear interpolation) across all GIFs in the ledger. pct must be 50 or 75.
/// Throws Error{Config} for other pct, Error{EmptyLedger} when no GIF has appeared.
std::vector<std::string> appearance_percentile_filter(const ValenceLedger& ledger, int pct);
/// The threshold itself, for building an Eligibility.
double appearance_percentile_threshold(const ValenceLedger& ledger, int pct);

// ---------------------------------------------------------------------------
// Series

enum class Flavor { Gif, Pos, Neg, SelfDec, Text, Disagreement };
enum class Frequency { Daily, Bucket };

std::string_view to_string(Flavor f) noexcept;

struct SeriesKey {
  Date day{};
  int slot = -1;  // -1 for daily keys

  std::string str() const;
  friend auto operator<=>(const SeriesKey&, const SeriesKey&) = default;
};

struct SentimentSeries {
  Flavor flavor = Flavor::Gif;
  Frequency frequency = Frequency::Daily;
  std::vector<SeriesKey> keys;  // strictly increasing
  std::vector<double> values;   // NaN = missing
  bool standardized = false;
  double mean = kMissing;  // of the raw series, when standardized
  double sd = kMissing;

  std::size_t size() const noexcept { return values.size(); }
  std::size_t present() const;
};

/// (x - mean) / sd with the sample sd. Throws Error{TooFewPoints | ZeroVariance}.
SentimentSeries standardize(const SentimentSeries& series);
/// Inverts standardize using the stored mean and sd.
SentimentSeries destandardize(const SentimentSeries& series);

/// Long-format CSV `key,flavor,raw,standardized`. Series must share keys with their standardized twins.
void write_series_csv(std::ostream& out, std::span<const SentimentSeries* const> raw,
                      std::span<const SentimentSeries* const> standardized);

// ---------------------------------------------------------------------------
// Index construction over a whole corpus

struct IndexOptions {
  int min_decl = 5;
  Denominator denominator = Denominator::EligibleAppearances;
  Window window = Window::ThroughDay;
  int appearance_pct = 0;  // 0 (off), 50 or 75
  bool require_cashtag = true;
  bool intraday = true;
};

/// Day-level counts for one GIF on one trading day (not cumulative).
struct GifDayCount {
  GifId gif = 0;
  std::uint32_t day = 0;
  std::int64_t bullish = 0;
  std::int64_t bearish = 0;
  std::int64_t appearance = 0;
};

struct IndexResult {
  SentimentSeries gif, pos, neg, selfdec, text;                        // daily
  SentimentSeries intraday_gif, intraday_selfdec, intraday_text, dispersion;  // 48 slots per day
  std::vector<double> message_count;   // all considered posts per day
  std::vector<double> gif_post_count;  // GIF-carrying posts per day
  std::vector<GifDayCount> gif_days;   // sorted by (gif, day)
  ValenceLedger ledger;                // final state
  std::size_t posts_used = 0;
  std::size_t posts_flagged = 0;  // dropped for lacking a cashtag
};

/// Called after each day is folded into the ledger.
using LedgerObserver = std::function<void(std::size_t day_index, const ValenceLedger&)>;

/// Builds every sentiment series from posts sorted by time. Posts outside the
/// calendar are rejected with Error{OutOfCalendar}.
IndexResult build_index(std::span<const PostRecord> posts, const TradingCalendar& cal, const IndexOptions& options,
                        const LedgerObserver& observer = {}, int workers = 1);

/// Lag-1 autocorrelation distribution of day-only GIF valences, over days with
/// daily appearance >= min_appearance and GIFs with >= 3 such days.
Summary gif_autocorrelation_report(std::span<const GifDayCount> gif_days, int min_appearance);

struct GifDayDistribution {
  Summary bullish, bearish, appearance;
};
GifDayDistribution gif_day_distribution(std::span<const GifDayCount> gif_days);

}  // namespace giffluence

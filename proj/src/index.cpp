#include "giffluence/index.hpp"

#include <algorithm>
#include <ostream>
#include <tuple>

#include "giffluence/csv.hpp"
#include "giffluence/error.hpp"
#include "giffluence/parallel.hpp"

namespace giffluence {

namespace {

constexpr GifId kUnseenGif = std::numeric_limits<GifId>::max();

/// Per-GIF tallies over one batch, in first-touch order.
class BatchTally {
 public:
  struct Entry {
    GifId gif;
    std::int64_t bullish = 0, bearish = 0, appearance = 0;
  };

  void reset(std::size_t id_space) {
    if (slot_.size() < id_space) slot_.resize(id_space, kNone);
    for (const auto& e : entries_) slot_[e.gif] = kNone;
    entries_.clear();
  }

  void add(GifId gif, Declaration d) {
    if (gif >= slot_.size()) return;
    auto& s = slot_[gif];
    if (s == kNone) {
      s = static_cast<std::uint32_t>(entries_.size());
      entries_.push_back({gif});
    }
    auto& e = entries_[s];
    ++e.appearance;
    if (d == Declaration::Bullish) ++e.bullish;
    else if (d == Declaration::Bearish) ++e.bearish;
  }

  void add_batch(const PostBatch& batch, std::size_t id_space) {
    reset(id_space);
    for (const auto& p : batch.posts)
      for (const auto g : batch.gifs(p)) add(g, p.declaration);
  }

  const std::vector<Entry>& entries() const { return entries_; }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> slot_;
  std::vector<Entry> entries_;
};

double valence_of(const GifCounters& c) {
  return static_cast<double>(c.bullish - c.bearish) / static_cast<double>(c.appearance);
}

std::optional<double> eligible_valence(const ValenceLedger& ledger, GifId g, const Eligibility& rule) {
  if (g >= ledger.interned()) return std::nullopt;
  const auto& c = ledger.counters(g);
  if (!rule.admits(c)) return std::nullopt;
  return valence_of(c);
}

struct WeightedSums {
  double weighted = 0.0;       // sum of appearance * valence
  std::int64_t weight = 0;     // sum of eligible appearances
  double pos_weighted = 0.0;
  std::int64_t pos_weight = 0;
  double neg_weighted = 0.0;
  std::int64_t neg_weight = 0;
  std::int64_t gif_posts = 0;
};

WeightedSums weighted_sums(const ValenceLedger& ledger, const PostBatch& batch, const Eligibility& rule,
                           BatchTally& tally) {
  tally.add_batch(batch, ledger.interned());
  WeightedSums s;
  for (const auto& p : batch.posts)
    if (p.gif_count > 0) ++s.gif_posts;
  for (const auto& e : tally.entries()) {
    const auto v = eligible_valence(ledger, e.gif, rule);
    if (!v) continue;
    const double contribution = static_cast<double>(e.appearance) * *v;
    s.weighted += contribution;
    s.weight += e.appearance;
    if (*v > 0.0) {
      s.pos_weighted += contribution;
      s.pos_weight += e.appearance;
    } else if (*v < 0.0) {
      s.neg_weighted += contribution;
      s.neg_weight += e.appearance;
    }
  }
  return s;
}

std::optional<double> aggregate_from(const WeightedSums& s, Denominator denominator) {
  if (s.weight == 0) return std::nullopt;
  const auto denom = denominator == Denominator::EligibleAppearances ? s.weight : s.gif_posts;
  return s.weighted / static_cast<double>(denom);
}

SignedSplit split_from(const WeightedSums& s) {
  SignedSplit out;
  if (s.pos_weight > 0) out.pos = s.pos_weighted / static_cast<double>(s.pos_weight);
  if (s.neg_weight > 0) out.neg = s.neg_weighted / static_cast<double>(s.neg_weight);
  return out;
}

std::optional<double> disagreement_with(const ValenceLedger& ledger, const PostBatch& batch, const Eligibility& rule,
                                        std::vector<double>& scratch) {
  scratch.clear();
  for (const auto& p : batch.posts) {
    double sum = 0.0;
    int count = 0;
    for (const auto g : batch.gifs(p)) {
      if (const auto v = eligible_valence(ledger, g, rule)) {
        sum += *v;
        ++count;
      }
    }
    if (count > 0) scratch.push_back(sum / count);
  }
  if (scratch.size() < 2) return std::nullopt;
  return sample_sd(scratch);
}

Eligibility rule_for(int min_decl) {
  Eligibility r;
  r.min_decl = min_decl;
  return r;
}

template <typename Ledger>
CompactPosts compact_impl(std::span<const PostRecord> posts, Ledger& ledger) {
  CompactPosts out;
  out.posts.reserve(posts.size());
  for (const auto& p : posts) {
    CompactPost c;
    c.gif_offset = static_cast<std::uint32_t>(out.pool.size());
    c.gif_count = static_cast<std::uint32_t>(p.gif_ids.size());
    c.declaration = p.declaration;
    c.text_score = p.text_score.value_or(kMissing);
    for (const auto& g : p.gif_ids) {
      if constexpr (std::is_const_v<Ledger>) {
        const auto id = ledger.find(g);
        out.pool.push_back(id ? *id : kUnseenGif);
      } else {
        out.pool.push_back(ledger.intern(g));
      }
    }
    out.posts.push_back(c);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// ValenceLedger

GifId ValenceLedger::intern(std::string_view gif_id) {
  const auto [it, inserted] = ids_.try_emplace(std::string(gif_id), static_cast<GifId>(names_.size()));
  if (inserted) {
    names_.emplace_back(gif_id);
    counters_.emplace_back();
  }
  return it->second;
}

std::optional<GifId> ValenceLedger::find(std::string_view gif_id) const {
  const auto it = ids_.find(std::string(gif_id));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const GifCounters& ValenceLedger::counters(std::string_view gif_id) const {
  const auto id = find(gif_id);
  if (!id || counters_[*id].appearance == 0)
    throw Error(ErrorCode::UnknownGif, "GIF '" + std::string(gif_id) + "' has not appeared");
  return counters_[*id];
}

void ValenceLedger::advance(Date day, const PostBatch& batch) {
  if (as_of_ && day <= *as_of_)
    throw Error(ErrorCode::OutOfOrder, "posts for " + format_date(day) + " after ledger reached " + format_date(*as_of_));
  for (const auto& p : batch.posts) {
    for (const auto g : batch.gifs(p)) {
      if (g >= counters_.size())
        throw Error(ErrorCode::UnknownGif, "GIF id " + std::to_string(g) + " was never interned");
      auto& c = counters_[g];
      if (c.appearance == 0) ++visible_;
      ++c.appearance;
      if (p.declaration == Declaration::Bullish) ++c.bullish;
      else if (p.declaration == Declaration::Bearish) ++c.bearish;
    }
  }
  as_of_ = day;
}

std::optional<double> ValenceLedger::valence(GifId id, int min_decl) const {
  if (id >= counters_.size()) return std::nullopt;
  const auto& c = counters_[id];
  if (c.appearance == 0 || c.declarations() < min_decl) return std::nullopt;
  return valence_of(c);
}

std::optional<double> ValenceLedger::valence(std::string_view gif_id, int min_decl) const {
  const auto& c = counters(gif_id);
  if (c.declarations() < min_decl) return std::nullopt;
  return valence_of(c);
}

std::vector<std::pair<std::string, GifCounters>> ValenceLedger::snapshot() const {
  std::vector<std::pair<std::string, GifCounters>> out;
  out.reserve(visible_);
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (counters_[i].appearance > 0) out.emplace_back(names_[i], counters_[i]);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

void ValenceLedger::write_snapshot(std::ostream& out) const {
  for (const auto& [name, c] : snapshot())
    out << name << ',' << c.bullish << ',' << c.bearish << ',' << c.appearance << '\n';
}

CompactPosts compact_posts(std::span<const PostRecord> posts, ValenceLedger& ledger) {
  return compact_impl(posts, ledger);
}

CompactPosts compact_posts(std::span<const PostRecord> posts, const ValenceLedger& ledger) {
  return compact_impl(posts, ledger);
}

ValenceLedger advance_ledger(ValenceLedger ledger, std::span<const PostRecord> day_posts, const TradingCalendar& cal) {
  std::optional<std::size_t> expected;
  if (const auto as_of = ledger.as_of()) {
    const auto idx = cal.index_of(*as_of);
    if (!idx) throw Error(ErrorCode::OutOfOrder, "ledger date " + format_date(*as_of) + " is not a trading day");
    expected = *idx + 1;
    if (*expected >= cal.size()) throw Error(ErrorCode::OutOfOrder, "ledger already at the end of the calendar");
  }
  if (day_posts.empty()) {
    if (expected) ledger.advance(cal.dates()[*expected], PostBatch{});
    return ledger;
  }
  const std::size_t day = cal.assign_day_index(day_posts.front().timestamp);
  for (const auto& p : day_posts) {
    const auto d = cal.assign_day_index(p.timestamp);
    if (d != day)
      throw Error(ErrorCode::OutOfOrder, "batch mixes trading days " + format_date(cal.dates()[day]) + " and " +
                                             format_date(cal.dates()[d]));
  }
  if (expected && day != *expected)
    throw Error(ErrorCode::OutOfOrder, "expected posts for " + format_date(cal.dates()[*expected]) + ", got " +
                                           format_date(cal.dates()[day]));
  const auto compact = compact_posts(day_posts, ledger);
  ledger.advance(cal.dates()[day], compact.batch());
  return ledger;
}

// ---------------------------------------------------------------------------
// Daily measures

std::optional<double> aggregate_gif_sentiment(const ValenceLedger& ledger, const PostBatch& posts,
                                              const Eligibility& rule, Denominator denominator) {
  BatchTally tally;
  return aggregate_from(weighted_sums(ledger, posts, rule, tally), denominator);
}

std::optional<double> aggregate_gif_sentiment(const ValenceLedger& ledger, std::span<const PostRecord> posts,
                                              int min_decl, Denominator denominator) {
  const auto compact = compact_posts(posts, ledger);
  return aggregate_gif_sentiment(ledger, compact.batch(), rule_for(min_decl), denominator);
}

SignedSplit split_signed(const ValenceLedger& ledger, const PostBatch& posts, const Eligibility& rule) {
  BatchTally tally;
  return split_from(weighted_sums(ledger, posts, rule, tally));
}

SignedSplit split_signed(const ValenceLedger& ledger, std::span<const PostRecord> posts, int min_decl) {
  const auto compact = compact_posts(posts, ledger);
  return split_signed(ledger, compact.batch(), rule_for(min_decl));
}

std::optional<double> selfdec(const PostBatch& posts) {
  std::int64_t bull = 0, bear = 0, total = 0;
  for (const auto& p : posts.posts) {
    if (p.gif_count > 0) continue;
    ++total;
    if (p.declaration == Declaration::Bullish) ++bull;
    else if (p.declaration == Declaration::Bearish) ++bear;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(bull - bear) / static_cast<double>(total);
}

std::optional<double> selfdec(std::span<const PostRecord> posts) {
  std::int64_t bull = 0, bear = 0, total = 0;
  for (const auto& p : posts) {
    if (p.has_gif()) continue;
    ++total;
    if (p.declaration == Declaration::Bullish) ++bull;
    else if (p.declaration == Declaration::Bearish) ++bear;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(bull - bear) / static_cast<double>(total);
}

std::optional<double> text_daily_average(const PostBatch& posts) {
  double sum = 0.0;
  std::int64_t n = 0;
  for (const auto& p : posts.posts) {
    if (is_missing(p.text_score)) continue;
    sum += p.text_score;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> text_daily_average(std::span<const PostRecord> posts) {
  double sum = 0.0;
  std::int64_t n = 0;
  for (const auto& p : posts) {
    if (!p.text_score) continue;
    sum += *p.text_score;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> disagreement(const ValenceLedger& ledger, const PostBatch& posts, const Eligibility& rule) {
  std::vector<double> scratch;
  return disagreement_with(ledger, posts, rule, scratch);
}

std::optional<double> disagreement(const ValenceLedger& ledger, std::span<const PostRecord> posts, int min_decl) {
  const auto compact = compact_posts(posts, ledger);
  return disagreement(ledger, compact.batch(), rule_for(min_decl));
}

double appearance_percentile_threshold(const ValenceLedger& ledger, int pct) {
  if (pct != 50 && pct != 75)
    throw Error(ErrorCode::Config, "appearance percentile must be 50 or 75, got " + std::to_string(pct));
  std::vector<double> apps;
  apps.reserve(ledger.size());
  for (GifId g = 0; g < ledger.interned(); ++g)
    if (const auto a = ledger.counters(g).appearance; a > 0) apps.push_back(static_cast<double>(a));
  if (apps.empty()) throw Error(ErrorCode::EmptyLedger, "no GIF has appeared yet");
  std::sort(apps.begin(), apps.end());
  return percentile_linear(apps, pct);
}

std::vector<std::string> appearance_percentile_filter(const ValenceLedger& ledger, int pct) {
  const double threshold = appearance_percentile_threshold(ledger, pct);
  std::vector<std::string> out;
  for (GifId g = 0; g < ledger.interned(); ++g)
    if (static_cast<double>(ledger.counters(g).appearance) > threshold) out.push_back(ledger.name(g));
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Series

std::string_view to_string(Flavor f) noexcept {
  switch (f) {
    case Flavor::Gif: return "GIF";
    case Flavor::Pos: return "POS";
    case Flavor::Neg: return "NEG";
    case Flavor::SelfDec: return "SELFDEC";
    case Flavor::Text: return "TEXT";
    case Flavor::Disagreement: return "DISAGREEMENT";
  }
  return "?";
}

std::string SeriesKey::str() const {
  if (slot < 0) return format_date(day);
  return format_bucket(Bucket{day, slot});
}

std::size_t SentimentSeries::present() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](double v) { return !is_missing(v); }));
}

SentimentSeries standardize(const SentimentSeries& series) {
  std::vector<double> present;
  present.reserve(series.values.size());
  for (double v : series.values)
    if (!is_missing(v)) present.push_back(v);
  if (present.size() < 2)
    throw Error(ErrorCode::TooFewPoints, std::string(to_string(series.flavor)) + " has fewer than 2 values");
  const double m = mean(present);
  const double sd = sample_sd(present);
  if (!(sd > 1e-12 * std::max(1.0, std::abs(m))))
    throw Error(ErrorCode::ZeroVariance, std::string(to_string(series.flavor)) + " is constant");
  SentimentSeries out = series;
  for (auto& v : out.values)
    if (!is_missing(v)) v = (v - m) / sd;
  out.standardized = true;
  out.mean = m;
  out.sd = sd;
  return out;
}

SentimentSeries destandardize(const SentimentSeries& series) {
  if (!series.standardized) return series;
  SentimentSeries out = series;
  for (auto& v : out.values)
    if (!is_missing(v)) v = v * series.sd + series.mean;
  out.standardized = false;
  out.mean = kMissing;
  out.sd = kMissing;
  return out;
}

void write_series_csv(std::ostream& out, std::span<const SentimentSeries* const> raw,
                      std::span<const SentimentSeries* const> standardized) {
  out << "key,flavor,raw,standardized\n";
  for (std::size_t s = 0; s < raw.size(); ++s) {
    const auto& r = *raw[s];
    const SentimentSeries* z = s < standardized.size() ? standardized[s] : nullptr;
    const auto flavor = to_string(r.flavor);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (is_missing(r.values[i])) continue;
      out << r.keys[i].str() << ',' << flavor << ',' << csv::format_number(r.values[i]) << ','
          << (z != nullptr ? csv::format_number(z->values[i]) : std::string{}) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Whole-corpus construction

namespace {

SentimentSeries daily_series(Flavor f, std::span<const Date> dates) {
  SentimentSeries s;
  s.flavor = f;
  s.frequency = Frequency::Daily;
  s.keys.reserve(dates.size());
  for (const auto d : dates) s.keys.push_back({d, -1});
  s.values.assign(dates.size(), kMissing);
  return s;
}

SentimentSeries bucket_series(Flavor f, std::span<const Date> dates) {
  SentimentSeries s;
  s.flavor = f;
  s.frequency = Frequency::Bucket;
  s.keys.reserve(dates.size() * Bucket::kSlots);
  for (const auto d : dates)
    for (int slot = 0; slot < Bucket::kSlots; ++slot) s.keys.push_back({d, slot});
  s.values.assign(dates.size() * Bucket::kSlots, kMissing);
  return s;
}

double or_missing(const std::optional<double>& v) { return v ? *v : kMissing; }

Eligibility eligibility_for(const ValenceLedger& ledger, const IndexOptions& options) {
  Eligibility rule;
  rule.min_decl = options.min_decl;
  if (options.appearance_pct != 0) {
    if (ledger.size() == 0) {
      rule.min_appearance_exclusive = std::numeric_limits<double>::infinity();
    } else {
      rule.min_appearance_exclusive = appearance_percentile_threshold(ledger, options.appearance_pct);
    }
  }
  return rule;
}

}  // namespace

IndexResult build_index(std::span<const PostRecord> posts, const TradingCalendar& cal, const IndexOptions& options,
                        const LedgerObserver& observer, int workers) {
  if (options.appearance_pct != 0 && options.appearance_pct != 50 && options.appearance_pct != 75)
    throw Error(ErrorCode::Config, "appearance percentile must be 0, 50 or 75");
  if (options.min_decl < 0) throw Error(ErrorCode::Config, "min_decl must be non-negative");

  const auto dates = cal.dates();
  const std::size_t n_days = dates.size();

  // Trading day and slot per post.
  std::vector<std::pair<std::uint32_t, std::uint8_t>> where(posts.size());
  parallel_chunks(posts.size(), workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto [d, s] = cal.assign(posts[i].timestamp);
      where[i] = {static_cast<std::uint32_t>(d), static_cast<std::uint8_t>(s)};
    }
  });

  IndexResult out;
  std::vector<std::size_t> order;
  order.reserve(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (options.require_cashtag && !posts[i].market_relevant()) {
      ++out.posts_flagged;
      continue;
    }
    order.push_back(i);
  }
  // Group by day, then slot, keeping input order inside each group.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return where[a] < where[b]; });
  out.posts_used = order.size();

  CompactPosts compact;
  compact.posts.reserve(order.size());
  std::vector<std::size_t> day_begin(n_days + 1, 0);
  for (const auto i : order) {
    const auto& p = posts[i];
    CompactPost c;
    c.gif_offset = static_cast<std::uint32_t>(compact.pool.size());
    c.gif_count = static_cast<std::uint32_t>(p.gif_ids.size());
    c.declaration = p.declaration;
    c.slot = where[i].second;
    c.text_score = p.text_score.value_or(kMissing);
    for (const auto& g : p.gif_ids) compact.pool.push_back(out.ledger.intern(g));
    compact.posts.push_back(c);
    ++day_begin[where[i].first + 1];
  }
  for (std::size_t d = 0; d < n_days; ++d) day_begin[d + 1] += day_begin[d];

  out.gif = daily_series(Flavor::Gif, dates);
  out.pos = daily_series(Flavor::Pos, dates);
  out.neg = daily_series(Flavor::Neg, dates);
  out.selfdec = daily_series(Flavor::SelfDec, dates);
  out.text = daily_series(Flavor::Text, dates);
  if (options.intraday) {
    out.intraday_gif = bucket_series(Flavor::Gif, dates);
    out.intraday_selfdec = bucket_series(Flavor::SelfDec, dates);
    out.intraday_text = bucket_series(Flavor::Text, dates);
    out.dispersion = bucket_series(Flavor::Disagreement, dates);
  }
  out.message_count.assign(n_days, 0.0);
  out.gif_post_count.assign(n_days, 0.0);

  auto& ledger = out.ledger;
  BatchTally tally;
  std::vector<double> scratch;

  auto daily_gif = [&](std::size_t d, const PostBatch& batch) {
    const auto rule = eligibility_for(ledger, options);
    const auto sums = weighted_sums(ledger, batch, rule, tally);
    out.gif.values[d] = or_missing(aggregate_from(sums, options.denominator));
    const auto split = split_from(sums);
    out.pos.values[d] = or_missing(split.pos);
    out.neg.values[d] = or_missing(split.neg);
  };

  for (std::size_t d = 0; d < n_days; ++d) {
    const auto batch = compact.batch(day_begin[d], day_begin[d + 1]);

    if (options.intraday && !batch.posts.empty()) {
      // Intraday values only see declarations through the previous close.
      const auto rule = eligibility_for(ledger, options);
      std::size_t b = 0;
      while (b < batch.posts.size()) {
        std::size_t e = b;
        const auto slot = batch.posts[b].slot;
        while (e < batch.posts.size() && batch.posts[e].slot == slot) ++e;
        const PostBatch bucket{batch.posts.subspan(b, e - b), batch.pool};
        const std::size_t k = d * Bucket::kSlots + slot;
        out.intraday_gif.values[k] = or_missing(aggregate_from(weighted_sums(ledger, bucket, rule, tally), options.denominator));
        out.intraday_selfdec.values[k] = or_missing(selfdec(bucket));
        out.intraday_text.values[k] = or_missing(text_daily_average(bucket));
        out.dispersion.values[k] = or_missing(disagreement_with(ledger, bucket, rule, scratch));
        b = e;
      }
    }

    if (options.window == Window::ThroughPreviousDay) daily_gif(d, batch);

    ledger.advance(dates[d], batch);
    tally.add_batch(batch, ledger.interned());
    for (const auto& e : tally.entries())
      out.gif_days.push_back({e.gif, static_cast<std::uint32_t>(d), e.bullish, e.bearish, e.appearance});

    if (options.window == Window::ThroughDay) daily_gif(d, batch);

    out.selfdec.values[d] = or_missing(selfdec(batch));
    out.text.values[d] = or_missing(text_daily_average(batch));
    out.message_count[d] = static_cast<double>(batch.posts.size());
    out.gif_post_count[d] = static_cast<double>(
        std::count_if(batch.posts.begin(), batch.posts.end(), [](const CompactPost& p) { return p.gif_count > 0; }));

    if (observer) observer(d, ledger);
  }

  std::sort(out.gif_days.begin(), out.gif_days.end(), [](const GifDayCount& a, const GifDayCount& b) {
    return a.gif != b.gif ? a.gif < b.gif : a.day < b.day;
  });
  return out;
}

Summary gif_autocorrelation_report(std::span<const GifDayCount> input, int min_appearance) {
  std::vector<GifDayCount> gif_days(input.begin(), input.end());
  std::stable_sort(gif_days.begin(), gif_days.end(),
                   [](const GifDayCount& a, const GifDayCount& b) { return std::tie(a.gif, a.day) < std::tie(b.gif, b.day); });
  std::vector<double> correlations;
  std::vector<double> path;
  std::size_t i = 0;
  while (i < gif_days.size()) {
    std::size_t j = i;
    path.clear();
    while (j < gif_days.size() && gif_days[j].gif == gif_days[i].gif) {
      const auto& g = gif_days[j];
      if (g.appearance >= min_appearance && g.appearance > 0)
        path.push_back(static_cast<double>(g.bullish - g.bearish) / static_cast<double>(g.appearance));
      ++j;
    }
    if (path.size() >= 3)
      if (const auto r = lag1_autocorrelation(path)) correlations.push_back(*r);
    i = j;
  }
  return summarize(std::move(correlations));
}

GifDayDistribution gif_day_distribution(std::span<const GifDayCount> gif_days) {
  std::vector<double> b, s, a;
  b.reserve(gif_days.size());
  s.reserve(gif_days.size());
  a.reserve(gif_days.size());
  for (const auto& g : gif_days) {
    b.push_back(static_cast<double>(g.bullish));
    s.push_back(static_cast<double>(g.bearish));
    a.push_back(static_cast<double>(g.appearance));
  }
  return {summarize(std::move(b)), summarize(std::move(s)), summarize(std::move(a))};
}

}  // namespace giffluence

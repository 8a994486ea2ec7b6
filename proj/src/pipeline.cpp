#include "giffluence/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "giffluence/csv.hpp"
#include "giffluence/econ.hpp"
#include "giffluence/error.hpp"
#include "giffluence/metrics.hpp"
#include "giffluence/plot.hpp"
#include "giffluence/rng.hpp"

namespace giffluence {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ','))
    if (auto t = trim(item); !t.empty()) out.push_back(std::move(t));
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

long long parse_int(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size())
    throw Error(ErrorCode::Config, "'" + key + "' needs an integer, got '" + value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(ErrorCode::Config, "'" + key + "' needs true or false, got '" + value + "'");
}

const std::set<std::string>& known_tables() {
  static const std::set<std::string> names = {"returns", "split",        "intraday",  "sorts", "volatility",
                                              "volume",  "flows",        "correlations", "robustness"};
  return names;
}

/// Runs fn, prefixing any error with the stage name.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    std::string what = e.what();
    const auto code = std::string(to_string(e.code())) + ": ";
    if (what.starts_with(code)) what.erase(0, code.size());
    throw Error(e.code(), name + ": " + what);
  }
}

std::uint64_t name_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

SentimentSeries try_standardize(const SentimentSeries& s) {
  try {
    return standardize(s);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TooFewPoints && e.code() != ErrorCode::ZeroVariance) throw;
    SentimentSeries out = s;
    std::fill(out.values.begin(), out.values.end(), kMissing);
    return out;
  }
}

bool any_present(const std::vector<double>& v) { return std::any_of(v.begin(), v.end(), [](double x) { return !is_missing(x); }); }

class Bundle {
 public:
  explicit Bundle(std::filesystem::path root) : root_(std::move(root)) { std::filesystem::create_directories(root_); }

  std::ofstream open(const std::string& rel) {
    const auto path = root_ / rel;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    files.push_back(rel);
    return out;
  }

  std::vector<std::string> files;

 private:
  std::filesystem::path root_;
};

}  // namespace

void PipelineConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const auto key = trim(raw_key);
  const auto value = trim(raw_value);
  if (key == "posts") posts = value;
  else if (key == "schema") schema = value;
  else if (key == "calendar") calendar = value;
  else if (key == "market") market = value;
  else if (key == "intraday") intraday = value;
  else if (key == "controls") controls = split_list(value);
  else if (key == "firms") firms = value;
  else if (key == "out") out = value;
  else if (key == "min_decl") {
    index.min_decl = static_cast<int>(parse_int(key, value));
    if (index.min_decl < 1) throw Error(ErrorCode::Config, "min_decl must be at least 1");
  } else if (key == "denominator") {
    if (value == "eligible") index.denominator = Denominator::EligibleAppearances;
    else if (value == "gif_posts") index.denominator = Denominator::GifPosts;
    else throw Error(ErrorCode::Config, "denominator must be eligible or gif_posts");
  } else if (key == "window") {
    if (value == "through_day") index.window = Window::ThroughDay;
    else if (value == "through_previous_day") index.window = Window::ThroughPreviousDay;
    else throw Error(ErrorCode::Config, "window must be through_day or through_previous_day");
  } else if (key == "appearance_pct") {
    index.appearance_pct = static_cast<int>(parse_int(key, value));
    if (index.appearance_pct != 0 && index.appearance_pct != 50 && index.appearance_pct != 75)
      throw Error(ErrorCode::Config, "appearance_pct must be 0, 50 or 75");
  } else if (key == "require_cashtag") index.require_cashtag = parse_bool(key, value);
  else if (key == "intraday_index") index.intraday = parse_bool(key, value);
  else if (key == "tables") {
    tables = split_list(value);
    for (const auto& t : tables)
      if (!known_tables().contains(t)) throw Error(ErrorCode::Config, "unknown table '" + t + "'");
  } else if (key == "inference") {
    if (value == "classical") inference = Method::Classical;
    else if (value == "block_bootstrap") inference = Method::BlockBootstrap;
    else if (value == "nelson_kim") inference = Method::NelsonKim;
    else throw Error(ErrorCode::Config, "inference must be classical, block_bootstrap or nelson_kim");
  } else if (key == "reps") {
    reps = static_cast<int>(parse_int(key, value));
    if (reps < 100) throw Error(ErrorCode::Config, "reps must be at least 100");
  } else if (key == "nk_reps") {
    nk_reps = static_cast<int>(parse_int(key, value));
    if (nk_reps < 99) throw Error(ErrorCode::Config, "nk_reps must be at least 99");
  } else if (key == "nelson_kim") nelson_kim = parse_bool(key, value);
  else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "workers") {
    workers = static_cast<int>(parse_int(key, value));
    if (workers < 1) throw Error(ErrorCode::Config, "workers must be at least 1");
  } else if (key == "ledger_snapshots") ledger_snapshots = parse_bool(key, value);
  else if (key == "plots") plots = parse_bool(key, value);
  else throw Error(ErrorCode::Config, "unknown configuration key '" + key + "'");
}

void PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot read config " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Config, path.string() + ":" + std::to_string(number) + ": expected key=value");
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

std::map<std::string, std::string> PipelineConfig::effective() const {
  std::map<std::string, std::string> m;
  m["posts"] = posts;
  m["schema"] = schema;
  m["calendar"] = calendar;
  m["market"] = market;
  m["intraday"] = intraday;
  m["controls"] = join(controls);
  m["firms"] = firms;
  m["min_decl"] = std::to_string(index.min_decl);
  m["denominator"] = index.denominator == Denominator::EligibleAppearances ? "eligible" : "gif_posts";
  m["window"] = index.window == Window::ThroughDay ? "through_day" : "through_previous_day";
  m["appearance_pct"] = std::to_string(index.appearance_pct);
  m["require_cashtag"] = index.require_cashtag ? "true" : "false";
  m["intraday_index"] = index.intraday ? "true" : "false";
  m["tables"] = join(tables);
  m["inference"] = std::string(to_string(inference));
  m["reps"] = std::to_string(reps);
  m["nk_reps"] = std::to_string(nk_reps);
  m["nelson_kim"] = nelson_kim ? "true" : "false";
  m["seed"] = std::to_string(seed);
  m["ledger_snapshots"] = ledger_snapshots ? "true" : "false";
  m["plots"] = plots ? "true" : "false";
  return m;
}

IndexBundle build_index_bundle(std::span<const PostRecord> posts, const TradingCalendar& cal,
                               const IndexOptions& options, int workers, const LedgerObserver& observer) {
  IndexBundle b;
  b.result = build_index(posts, cal, options, observer, workers);
  b.gif_z = try_standardize(b.result.gif);
  b.pos_z = try_standardize(b.result.pos);
  b.neg_z = try_standardize(b.result.neg);
  b.selfdec_z = try_standardize(b.result.selfdec);
  b.text_z = try_standardize(b.result.text);
  if (options.intraday) {
    b.intraday_gif_z = try_standardize(b.result.intraday_gif);
    b.dispersion_z = try_standardize(b.result.dispersion);
  }
  return b;
}

std::vector<std::string> write_index_outputs(const IndexBundle& b, const std::filesystem::path& dir) {
  Bundle out(dir);
  {
    auto f = out.open("series.csv");
    const SentimentSeries* raw[] = {&b.result.gif, &b.result.pos, &b.result.neg, &b.result.selfdec, &b.result.text};
    const SentimentSeries* z[] = {&b.gif_z, &b.pos_z, &b.neg_z, &b.selfdec_z, &b.text_z};
    write_series_csv(f, raw, z);
  }
  if (!b.result.intraday_gif.values.empty()) {
    auto f = out.open("intraday.csv");
    const SentimentSeries* raw[] = {&b.result.intraday_gif, &b.result.intraday_selfdec, &b.result.intraday_text,
                                    &b.result.dispersion};
    const SentimentSeries none;
    const SentimentSeries* z[] = {&b.intraday_gif_z, &none, &none, &b.dispersion_z};
    // Raw-only flavors get an empty standardized cell.
    SentimentSeries blank_selfdec = b.result.intraday_selfdec, blank_text = b.result.intraday_text;
    std::fill(blank_selfdec.values.begin(), blank_selfdec.values.end(), kMissing);
    std::fill(blank_text.values.begin(), blank_text.values.end(), kMissing);
    z[1] = &blank_selfdec;
    z[2] = &blank_text;
    write_series_csv(f, raw, z);
  }
  {
    auto f = out.open("ledger.csv");
    b.result.ledger.write_snapshot(f);
  }
  {
    auto f = out.open("gif_summary.csv");
    f << "statistic,threshold,n,mean,sd,p10,p25,p50,p75,p90\n";
    auto row = [&](const std::string& name, const std::string& threshold, const Summary& s) {
      f << name << ',' << threshold << ',' << s.n << ',' << csv::format_number(s.mean) << ','
        << csv::format_number(s.sd) << ',' << csv::format_number(s.p10) << ',' << csv::format_number(s.p25) << ','
        << csv::format_number(s.p50) << ',' << csv::format_number(s.p75) << ',' << csv::format_number(s.p90) << '\n';
    };
    const auto dist = gif_day_distribution(b.result.gif_days);
    row("declared_bullish", "", dist.bullish);
    row("declared_bearish", "", dist.bearish);
    row("appearance", "", dist.appearance);
    for (const int threshold : {5, 10, 25})
      row("valence_autocorrelation", std::to_string(threshold), gif_autocorrelation_report(b.result.gif_days, threshold));
  }
  return out.files;
}

void load_market(SeriesStore& store, const TradingCalendar& cal, const std::string& daily_path,
                 const std::string& intraday_path) {
  const auto n = cal.size();
  if (!daily_path.empty()) {
    const auto table = load_exogenous({daily_path}, cal, {"ret_pct"});
    store.add_daily("ret", table.column("ret_pct"));
    if (table.has("volume")) store.add_daily("volume", table.column("volume"));
  }
  if (!intraday_path.empty()) {
    const auto table = csv::read(intraday_path);
    const auto key_col = table.find("key"), ret_col = table.find("ret_pct"), vol_col = table.find("volume");
    if (!key_col || !ret_col)
      throw Error(ErrorCode::SchemaMismatch, intraday_path + ": need key and ret_pct columns");
    std::vector<double> ret(n * SeriesStore::kSlots, kMissing), vol(n * SeriesStore::kSlots, kMissing);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      const auto where = intraday_path + " row " + std::to_string(r + 2);
      if (row.size() != table.header.size()) throw Error(ErrorCode::SchemaMismatch, where + ": wrong column count");
      const auto bucket = parse_bucket(row[*key_col]);
      if (!bucket) throw Error(ErrorCode::SchemaMismatch, where + ": bad bucket key '" + row[*key_col] + "'");
      const auto day = cal.index_of(bucket->trading_day);
      if (!day) continue;
      const auto i = *day * SeriesStore::kSlots + static_cast<std::size_t>(bucket->slot);
      const auto rv = csv::parse_number(row[*ret_col]);
      if (!rv) throw Error(ErrorCode::SchemaMismatch, where + ": non-numeric ret_pct");
      ret[i] = *rv;
      if (vol_col) {
        const auto vv = csv::parse_number(row[*vol_col]);
        if (!vv) throw Error(ErrorCode::SchemaMismatch, where + ": non-numeric volume");
        vol[i] = *vv;
      }
    }
    store.add_bucket("ret_i", std::move(ret));
    if (vol_col) store.add_bucket("volume_i", std::move(vol));
  }
}

PipelineInputs load_inputs(const PipelineConfig& cfg) {
  if (cfg.posts.empty()) throw Error(ErrorCode::Config, "posts input is required");
  if (cfg.calendar.empty()) throw Error(ErrorCode::Config, "calendar input is required");
  for (const auto* p : {&cfg.calendar, &cfg.market, &cfg.intraday, &cfg.firms, &cfg.schema})
    if (!p->empty() && !std::filesystem::exists(*p)) throw Error(ErrorCode::Config, "input not found: " + *p);
  for (const auto& p : cfg.controls)
    if (!std::filesystem::exists(p)) throw Error(ErrorCode::Config, "input not found: " + p);

  const auto cal = stage("calendar", [&] { return TradingCalendar::load(cfg.calendar); });
  const auto schema = cfg.schema.empty() ? PostSchema::canonical() : PostSchema::load(cfg.schema);
  const auto files = expand_glob(cfg.posts);
  if (files.empty()) throw Error(ErrorCode::Config, "no post files match '" + cfg.posts + "'");
  auto ingest = stage("ingest", [&] { return ingest_files(files, schema, &cal, cfg.workers); });
  SeriesStore market(std::vector<Date>(cal.dates().begin(), cal.dates().end()));
  stage("market", [&] { load_market(market, cal, cfg.market, cfg.intraday); });
  std::optional<ControlTable> controls;
  if (!cfg.controls.empty())
    controls = stage("controls", [&] { return load_exogenous(
        std::vector<std::filesystem::path>(cfg.controls.begin(), cfg.controls.end()), cal); });
  std::optional<FirmPanel> firms;
  if (!cfg.firms.empty() && std::find(cfg.tables.begin(), cfg.tables.end(), "sorts") != cfg.tables.end())
    firms = stage("firms", [&] { return FirmPanel::load(cfg.firms); });
  return {cal, std::move(ingest), std::move(market), std::move(controls), std::move(firms)};
}

PipelineReport run_pipeline(const PipelineConfig& cfg) { return run_pipeline(cfg, load_inputs(cfg)); }

PipelineReport run_pipeline(const PipelineConfig& cfg, const PipelineInputs& in) {
  PipelineReport report;
  auto notice = [&](const std::string& s) { report.notices.push_back(s); };
  auto wants = [&](const std::string& t) { return std::find(cfg.tables.begin(), cfg.tables.end(), t) != cfg.tables.end(); };
  const auto& cal = in.calendar;
  const auto& ingest = in.ingest;

  Bundle out(cfg.out);
  {
    auto f = out.open("rejected.csv");
    f << "file,line,reason\n";
    for (const auto& r : ingest.rejected)
      f << csv::escape(r.file) << ',' << r.line << ',' << csv::escape(r.reason) << '\n';
  }

  LedgerObserver observer;
  if (cfg.ledger_snapshots)
    observer = [&](std::size_t day, const ValenceLedger& ledger) {
      auto f = out.open("ledger/" + format_date(cal.dates()[day]) + ".csv");
      ledger.write_snapshot(f);
    };
  const auto bundle =
      stage("index", [&] { return build_index_bundle(ingest.posts, cal, cfg.index, cfg.workers, observer); });
  for (const auto& f : write_index_outputs(bundle, cfg.out)) out.files.push_back(f);

  const auto& idx = bundle.result;
  SeriesStore store(std::vector<Date>(cal.dates().begin(), cal.dates().end()));
  store.add_daily("gif_raw", idx.gif.values);
  store.add_daily("gif", bundle.gif_z.values);
  store.add_daily("pos", bundle.pos_z.values);
  store.add_daily("neg", bundle.neg_z.values);
  store.add_daily("selfdec", bundle.selfdec_z.values);
  store.add_daily("text", bundle.text_z.values);
  store.add_daily("selfdec_raw", idx.selfdec.values);
  store.add_daily("text_raw", idx.text.values);
  store.add_daily("messages", idx.message_count);
  store.add_daily("gif_posts", idx.gif_post_count);
  store.add_daily("log_abn_messages", log_abn_messages_series(idx.message_count));
  if (cfg.index.intraday) {
    store.add_bucket("gif_i", bundle.intraday_gif_z.values);
    store.add_bucket("disagreement", bundle.dispersion_z.values);
  }

  for (const char* s : {"ret", "volume"})
    if (in.market.has_daily(s)) store.add_daily(s, in.market.daily(s));
  for (const char* s : {"ret_i", "volume_i"})
    if (in.market.has_bucket(s)) store.add_bucket(s, in.market.bucket(s));
  if (in.controls) {
    for (const auto& [name, values] : in.controls->columns) {
      if (!any_present(values)) continue;
      store.add_daily(name, values);
    }
    if (store.has_daily("ea_count")) {
      std::vector<double> v = store.daily("ea_count");
      for (auto& x : v)
        if (!is_missing(x)) x = log_ea(x);
      store.add_daily("log_ea", std::move(v));
      if (store.has_daily("meets_or_beats")) {
        const auto& ea = store.daily("ea_count");
        const auto& mb = store.daily("meets_or_beats");
        std::vector<double> share(ea.size(), kMissing);
        for (std::size_t t = 0; t < ea.size(); ++t)
          if (!is_missing(ea[t]) && !is_missing(mb[t]) && ea[t] > 0.0) share[t] = 100.0 * mb[t] / ea[t];
        store.add_daily("positive_ea_news", std::move(share));
      }
    }
    for (const char* flow : {"eff", "bff"}) {
      if (!store.has_daily(flow)) continue;
      try {
        store.add_daily(std::string(flow) + "_ds",
                        deseasonalize(store.dates(), store.daily(flow), SeasonalScheme::DayOfWeekAndMonth));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::RankDeficient) throw;
        notice(std::string("flows: ") + flow + " not deseasonalized (" + e.what() + ")");
      }
    }
    if (store.has_daily("cloud"))
      store.add_daily("cloud_ds", deseasonalize(store.dates(), store.daily("cloud"), SeasonalScheme::WeekOfSample));
  }
  const bool have_ret = store.has_daily("ret");
  if (have_ret) store.add_daily("rv5", realized_vol_series(store.daily("ret"), 4));

  std::vector<Regressor> controls;
  if (have_ret) controls.push_back({"ret", false, 1});
  for (const char* c : {"epu", "ads", "log_ea", "log_abn_messages"})
    if (store.has_daily(c)) controls.push_back({c, false, 0});

  const std::vector<std::pair<int, int>> horizons = {{0, 0}, {1, 5}, {1, 20}};
  std::vector<std::string> markdown;

  auto make_spec = [&](const std::string& table, std::size_t column, const std::string& label, Dependent dep,
                       std::vector<Regressor> regs, std::vector<Regressor> ctrls, bool intraday) {
    RegressionSpec s;
    s.label = label;
    s.intraday = intraday;
    s.dependent = std::move(dep);
    s.regressors = std::move(regs);
    s.controls = std::move(ctrls);
    s.inference.method = cfg.inference;
    s.inference.reps = cfg.inference == Method::NelsonKim ? cfg.nk_reps : cfg.reps;
    s.inference.seed = derive_seed(cfg.seed, name_hash(table), column);
    return s;
  };
  auto emit_table = [&](const std::string& id, const std::string& title, const std::vector<RegressionSpec>& specs) {
    const auto table = stage("table " + id, [&] { return run_table(title, specs, store, cfg.workers); });
    {
      auto f = out.open("tables/" + id + ".csv");
      write_table_csv(f, table);
    }
    std::ostringstream md;
    write_table_markdown(md, table);
    out.open("tables/" + id + ".md") << md.str();
    markdown.push_back(md.str());
    auto f = out.open("tables/" + id + ".json");
    write_table_metadata(f, table);
    report.tables.emplace(id, table);
  };
  auto return_specs = [&](const std::string& table, const std::string& dep_series, const std::vector<Regressor>& regs,
                          const std::vector<Regressor>& ctrls, const SampleFilters& filters = {}) {
    std::vector<RegressionSpec> specs;
    for (const auto& [m, n] : horizons) {
      auto s = make_spec(table, specs.size(), dep_series, {dep_series, Transform::CumReturn, m, n}, regs, ctrls, false);
      s.filters = filters;
      specs.push_back(std::move(s));
    }
    return specs;
  };
  const bool have_gif = any_present(store.daily("gif"));

  if (wants("returns")) {
    if (!have_ret || !have_gif) {
      notice("returns: disabled (needs market returns and a GIF sentiment series)");
    } else {
      auto specs = return_specs("returns", "ret", {{"gif"}}, controls);
      if (any_present(store.daily("selfdec")) && any_present(store.daily("text"))) {
        auto wider = controls;
        wider.push_back({"selfdec"});
        wider.push_back({"text"});
        for (auto& s : return_specs("returns", "ret", {{"gif"}}, wider)) {
          s.inference.seed = derive_seed(cfg.seed, name_hash("returns"), specs.size());
          specs.push_back(std::move(s));
        }
      }
      if (cfg.nelson_kim && cfg.inference != Method::NelsonKim)
        for (auto& s : return_specs("returns", "ret", {{"gif"}}, controls)) {
          s.inference.method = Method::NelsonKim;
          s.inference.reps = cfg.nk_reps;
          s.inference.seed = derive_seed(cfg.seed, name_hash("returns"), specs.size());
          s.label += " (randomized p)";
          specs.push_back(std::move(s));
        }
      emit_table("returns", "Index returns on GIF sentiment", specs);

      // Multicollinearity of the day-0 design.
      std::vector<std::string> names{"gif"};
      std::vector<std::vector<double>> cols{store.daily("gif")};
      for (const auto& c : controls) {
        names.push_back(c.label());
        std::vector<double> v(store.dates().size(), kMissing);
        const auto& src = store.daily(c.series);
        for (std::size_t t = 0; t < v.size(); ++t)
          if (static_cast<int>(t) >= c.lag) v[t] = src[t - static_cast<std::size_t>(c.lag)];
        cols.push_back(std::move(v));
      }
      if (cols.size() >= 2) {
        MatrixXd X(static_cast<Index>(store.dates().size()), static_cast<Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c)
          for (std::size_t t = 0; t < cols[c].size(); ++t) X(static_cast<Index>(t), static_cast<Index>(c)) = cols[c][t];
        const auto clean = drop_missing(VectorXd::Zero(X.rows()), X);
        const auto v = stage("vif", [&] { return vif(clean.X); });
        auto f = out.open("tables/vif.csv");
        f << "term,vif\n";
        for (std::size_t c = 0; c < names.size(); ++c)
          f << csv::escape(names[c]) << ',' << csv::format_number(v(static_cast<Index>(c))) << '\n';
      }
    }
  }

  if (wants("split")) {
    if (!have_ret || !any_present(store.daily("pos")) || !any_present(store.daily("neg")))
      notice("split: disabled (needs market returns and both signed GIF series)");
    else
      emit_table("split", "Index returns on positive and negative GIF sentiment",
                 return_specs("split", "ret", {{"pos"}, {"neg"}}, controls));
  }

  const bool have_intraday = cfg.index.intraday && store.has_bucket("ret_i") && any_present(store.bucket("gif_i"));
  if (wants("intraday")) {
    if (!have_intraday) {
      notice("intraday: disabled (needs intraday market data and intraday GIF sentiment)");
    } else {
      std::vector<RegressionSpec> specs;
      for (const auto& [m, n] : std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}})
        specs.push_back(make_spec("intraday", specs.size(), "ret_i", {"ret_i", Transform::CumReturn, m, n}, {{"gif_i"}},
                                  {{"ret_i", false, 1}}, true));
      emit_table("intraday", "Intraday returns on 30-minute GIF sentiment", specs);
    }
  }

  if (wants("sorts")) {
    if (!in.firms || !have_gif) {
      notice("sorts: disabled (needs a firm panel)");
    } else {
      const auto& panel = *in.firms;
      for (const auto c : {Characteristic::Size, Characteristic::IdioVol, Characteristic::TotalVol}) {
        SortOptions opts;
        opts.characteristic = c;
        const auto q = stage("sorts", [&] { return characteristic_portfolios(panel, cal, opts); });
        const std::string name(to_string(c));
        {
          auto f = out.open("quintiles_" + name + ".csv");
          write_quintiles_csv(f, store.dates(), q);
        }
        std::vector<double> low(q.size()), high(q.size());
        for (std::size_t t = 0; t < q.size(); ++t) {
          low[t] = q[t][0];
          high[t] = q[t][4];
        }
        store.add_daily(name + "_q1", low);
        store.add_daily(name + "_q5", high);
        if (!any_present(low)) {
          notice("sorts " + name + ": no day with five qualifying firms");
          continue;
        }
        const std::string id = "sorts_" + name;
        auto specs = return_specs(id, name + "_q1", {{"gif"}}, controls);
        for (auto& s : return_specs(id, name + "_q5", {{"gif"}}, controls)) {
          s.inference.seed = derive_seed(cfg.seed, name_hash(id), specs.size());
          specs.push_back(std::move(s));
        }
        emit_table(id, "Bottom and top " + name + " quintile returns on GIF sentiment", specs);
      }
    }
  }

  if (wants("volatility")) {
    if (!have_ret || !have_gif) {
      notice("volatility: disabled (needs market returns)");
    } else {
      auto ctrls = controls;
      ctrls.push_back({"rv5", false, 5});
      std::vector<RegressionSpec> specs;
      for (const auto& [m, n] : std::vector<std::pair<int, int>>{{0, 5}, {0, 20}})
        specs.push_back(make_spec("volatility", specs.size(), "ret", {"ret", Transform::RealizedVol, m, n},
                                  {{"gif", true, 0}}, ctrls, false));
      emit_table("volatility", "Realized volatility on absolute GIF sentiment", specs);
    }
  }

  if (wants("volume")) {
    if (!have_intraday || !store.has_bucket("volume_i")) {
      notice("volume: disabled (needs intraday volume)");
    } else {
      const std::vector<std::pair<int, int>> windows = {{0, 0}, {1, 1}, {2, 2}};
      std::vector<RegressionSpec> a, b;
      for (const auto& [m, n] : windows) {
        a.push_back(make_spec("volume", a.size(), "volume_i", {"volume_i", Transform::LogVolume, m, n},
                              {{"gif_i", true, 0}}, {{"ret_i", true, 1}}, true));
        b.push_back(make_spec("disagreement", b.size(), "volume_i", {"volume_i", Transform::LogVolume, m, n},
                              {{"disagreement"}}, {{"ret_i", true, 1}}, true));
      }
      emit_table("volume", "Log trading volume on absolute intraday GIF sentiment", a);
      if (any_present(store.bucket("disagreement")))
        emit_table("disagreement", "Log trading volume on GIF disagreement", b);
      else
        notice("disagreement: disabled (no bucket with two contributing GIF posts)");
    }
  }

  if (wants("flows")) {
    if (!have_gif || (!store.has_daily("eff_ds") && !store.has_daily("bff_ds"))) {
      notice("flows: disabled (needs eff or bff fund-flow columns)");
    } else {
      for (const char* flow : {"eff_ds", "bff_ds"}) {
        if (!store.has_daily(flow)) continue;
        const std::string id = std::string("flows_") + flow;
        std::vector<RegressionSpec> specs;
        for (const auto& [m, n] : horizons)
          specs.push_back(make_spec(id, specs.size(), flow, {flow, Transform::Sum, m, n}, {{"gif"}}, controls, false));
        emit_table(id, std::string("Deseasonalized fund flows (") + flow + ") on GIF sentiment", specs);
      }
    }
  }

  if (wants("correlations")) {
    std::vector<std::string> names;
    for (const char* n : {"gif_raw", "selfdec_raw", "text_raw", "bw", "ics", "media_sentiment", "ret", "cloud_ds",
                          "covid_index", "positive_ea_news"})
      if (store.has_daily(n) && any_present(store.daily(n))) names.push_back(n);
    if (names.size() < 2) {
      notice("correlations: disabled (fewer than two series)");
    } else {
      const auto cells = stage("correlations", [&] { return correlation_table(names, store); });
      {
        auto f = out.open("tables/correlations.csv");
        write_correlation_csv(f, cells);
      }
      std::ostringstream md;
      write_correlation_markdown(md, names, cells);
      out.open("tables/correlations.md") << md.str();
      markdown.push_back(md.str());
    }
  }

  if (wants("robustness")) {
    if (!have_ret || !have_gif) {
      notice("robustness: disabled (needs market returns)");
    } else {
      std::vector<RegressionSpec> w;
      for (const double pct : {1.0, 5.0, 10.0}) {
        SampleFilters f;
        f.winsorize_pct = pct;
        for (auto& s : return_specs("winsorize", "ret", {{"gif"}}, controls, f)) {
          s.inference.seed = derive_seed(cfg.seed, name_hash("winsorize"), w.size());
          s.label = "ret winsorized " + csv::format_number(pct) + "%";
          w.push_back(std::move(s));
        }
      }
      emit_table("robust_winsorize", "Winsorized index returns on GIF sentiment", w);

      SampleFilters dfb;
      dfb.dfbeta = true;
      emit_table("robust_dfbeta", "Index returns on GIF sentiment excluding influential days",
                 return_specs("dfbeta", "ret", {{"gif"}}, controls, dfb));

      std::vector<RegressionSpec> a;
      for (const int pct : {50, 75}) {
        auto opts = cfg.index;
        opts.appearance_pct = pct;
        opts.intraday = false;
        const auto filtered = stage("index (appearance filter)", [&] { return build_index(ingest.posts, cal, opts, {}, cfg.workers); });
        const auto z = try_standardize(filtered.gif);
        const std::string name = "gif_a" + std::to_string(pct);
        store.add_daily(name, z.values);
        if (!any_present(z.values)) {
          notice("robust_appearance: no eligible GIFs above the " + std::to_string(pct) + "th percentile");
          continue;
        }
        for (auto& s : return_specs("appearance", "ret", {{name}}, controls)) {
          s.inference.seed = derive_seed(cfg.seed, name_hash("appearance"), a.size());
          a.push_back(std::move(s));
        }
      }
      if (!a.empty()) emit_table("robust_appearance", "Index returns on appearance-filtered GIF sentiment", a);
    }
  }

  if (cfg.plots) {
    std::vector<std::string> keys;
    for (const auto d : cal.dates()) keys.push_back(format_date(d));
    if (any_present(idx.gif_post_count)) {
      out.open("plots/gif_posts.svg")
          << emit_plot(keys, {{"GIF posts", idx.gif_post_count}, {"all posts", idx.message_count}},
                       {"Daily post counts", "posts"});
    }
    if (any_present(idx.gif.values))
      out.open("plots/gif_sentiment.svg") << emit_plot(keys, {{"GIF sentiment", idx.gif.values}}, {"Daily GIF sentiment", "valence"});
  }

  {
    std::string all;
    for (const auto& m : markdown) all += m + "\n";
    out.open("report.md") << "# Sentiment report\n\n" << all;
  }

  report.files = out.files;
  {
    nlohmann::ordered_json manifest;
    manifest["seed"] = cfg.seed;
    auto config = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cfg.effective()) config[k] = v;
    manifest["config"] = std::move(config);
    manifest["posts_ingested"] = ingest.posts.size();
    manifest["posts_used"] = idx.posts_used;
    manifest["posts_flagged_no_cashtag"] = idx.posts_flagged;
    manifest["lines_rejected"] = ingest.rejected.size();
    manifest["posts_out_of_calendar"] = ingest.out_of_calendar;
    manifest["trading_days"] = cal.size();
    manifest["files"] = report.files;
    manifest["notices"] = report.notices;
    std::ofstream f(std::filesystem::path(cfg.out) / "manifest.json", std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot write manifest.json");
    f << manifest.dump(2) << '\n';
    report.files.push_back("manifest.json");
  }
  return report;
}

}  // namespace giffluence

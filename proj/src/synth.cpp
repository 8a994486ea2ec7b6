#include "giffluence/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "giffluence/csv.hpp"
#include "giffluence/error.hpp"
#include "giffluence/parallel.hpp"
#include "giffluence/rng.hpp"

namespace giffluence {

namespace {

constexpr int kBurnIn = 20;
constexpr int kSlots = 48;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

template <typename T>
void field(std::ostringstream& out, const char* key, const T& value) {
  out << key << '=' << value << '\n';
}

std::string number(double x) { return csv::format_number(x); }

std::string padded(long value, int width) {
  auto s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

TradingCalendar make_calendar(const WorldConfig& cfg) {
  const auto first = parse_date(cfg.start);
  if (!first) throw Error(ErrorCode::Config, "synth start '" + cfg.start + "' is not a date");
  std::vector<Date> dates;
  for (Date d = *first; static_cast<int>(dates.size()) < cfg.days; d += std::chrono::days{1})
    if (weekday_index(d) < 5) dates.push_back(d);
  return TradingCalendar(std::move(dates));
}

struct DayMarket {
  double ret = 0.0;
  double volume = 0.0;
  std::array<double, kSlots> slot_ret{};
  std::array<double, kSlots> slot_volume{};
  double epu = 0.0, ads = 0.0, ea = 0.0, cloud = 0.0, covid = 0.0, media = 0.0, eff = 0.0, bff = 0.0;
};

}  // namespace

void WorldConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::Config, "synth: " + what);
  };
  require(days >= 1, "days must be positive");
  require(std::isfinite(posts_per_day) && posts_per_day >= 1.0, "posts_per_day must be at least 1");
  require(gif_catalog_size >= 1, "gif_catalog_size must be positive");
  require(std::isfinite(rho) && rho >= 0.0 && rho < 1.0, "rho must lie in [0, 1)");
  require(std::isfinite(innovation_sd) && innovation_sd > 0.0, "innovation_sd must be positive");
  require(std::isfinite(declare_slope) && declare_slope > 0.0, "declare_slope must be positive");
  for (const double share : {declare_rate, gif_share, multi_gif_share, no_cashtag_share, text_share})
    require(std::isfinite(share) && share >= 0.0 && share <= 1.0, "shares must lie in [0, 1]");
  require(std::isfinite(gif_tilt), "gif_tilt must be finite");
  require(std::isfinite(beta0) && std::isfinite(beta_rev), "planted effects must be finite");
  require(std::isfinite(noise_sd) && noise_sd >= 0.0, "noise_sd must be non-negative");
  require(firms >= 0, "firms must be non-negative");
  require(parse_date(start).has_value(), "start must be YYYY-MM-DD");
}

std::string WorldConfig::serialize() const {
  std::ostringstream out;
  field(out, "days", days);
  field(out, "posts_per_day", number(posts_per_day));
  field(out, "gif_catalog_size", gif_catalog_size);
  field(out, "rho", number(rho));
  field(out, "innovation_sd", number(innovation_sd));
  field(out, "declare_slope", number(declare_slope));
  field(out, "declare_rate", number(declare_rate));
  field(out, "gif_share", number(gif_share));
  field(out, "multi_gif_share", number(multi_gif_share));
  field(out, "gif_tilt", number(gif_tilt));
  field(out, "no_cashtag_share", number(no_cashtag_share));
  field(out, "text_share", number(text_share));
  field(out, "beta0", number(beta0));
  field(out, "beta_rev", number(beta_rev));
  field(out, "noise_sd", number(noise_sd));
  field(out, "confounded", confounded ? "true" : "false");
  field(out, "firms", firms);
  field(out, "start", start);
  field(out, "seed", seed);
  return out.str();
}

WorldConfig WorldConfig::parse(std::string_view text) {
  WorldConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw Error(ErrorCode::Config, "synth config line without '=': " + line);
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    auto real = [&] {
      const auto v = csv::parse_number(value);
      if (!v || is_missing(*v)) throw Error(ErrorCode::Config, "synth: '" + key + "' needs a number");
      return *v;
    };
    auto integer = [&]() -> long long {
      long long v = 0;
      const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || p != value.data() + value.size())
        throw Error(ErrorCode::Config, "synth: '" + key + "' needs an integer");
      return v;
    };
    if (key == "days") cfg.days = static_cast<int>(integer());
    else if (key == "posts_per_day") cfg.posts_per_day = real();
    else if (key == "gif_catalog_size") cfg.gif_catalog_size = static_cast<int>(integer());
    else if (key == "rho") cfg.rho = real();
    else if (key == "innovation_sd") cfg.innovation_sd = real();
    else if (key == "declare_slope") cfg.declare_slope = real();
    else if (key == "declare_rate") cfg.declare_rate = real();
    else if (key == "gif_share") cfg.gif_share = real();
    else if (key == "multi_gif_share") cfg.multi_gif_share = real();
    else if (key == "gif_tilt") cfg.gif_tilt = real();
    else if (key == "no_cashtag_share") cfg.no_cashtag_share = real();
    else if (key == "text_share") cfg.text_share = real();
    else if (key == "beta0") cfg.beta0 = real();
    else if (key == "beta_rev") cfg.beta_rev = real();
    else if (key == "noise_sd") cfg.noise_sd = real();
    else if (key == "confounded") {
      if (value != "true" && value != "false") throw Error(ErrorCode::Config, "synth: confounded must be true or false");
      cfg.confounded = value == "true";
    } else if (key == "firms") cfg.firms = static_cast<int>(integer());
    else if (key == "start") cfg.start = value;
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(integer());
    else throw Error(ErrorCode::Config, "synth: unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

std::array<int, 3> expected_signs(const WorldConfig& cfg) {
  auto sign = [](double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); };
  std::array<int, 3> out{sign(cfg.beta0), 0, sign(-cfg.beta_rev)};
  if (cfg.beta_rev != 0.0) {
    // Covariance of Ret[t+1, t+5] with z_t, in units of var(z).
    double persist = 0.0, reversal = 0.0;
    for (int h = 1; h <= 5; ++h) {
      persist += std::pow(cfg.rho, h);
      for (int k = 1; k <= 20; ++k) reversal += std::pow(cfg.rho, std::abs(h - k));
    }
    out[1] = sign(cfg.beta0 * persist - cfg.beta_rev / 20.0 * reversal);
  }
  return out;
}

SyntheticWorld generate_world(const WorldConfig& cfg, int workers) {
  cfg.validate();
  SyntheticWorld w{cfg, make_calendar(cfg), {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};
  const auto& cal = w.calendar;
  const auto n = static_cast<std::size_t>(cfg.days);

  // Latent AR(1), started from its stationary law.
  const double sd_s = cfg.innovation_sd / std::sqrt(1.0 - cfg.rho * cfg.rho);
  std::vector<double> s_all(n + kBurnIn);
  {
    auto engine = make_engine(cfg.seed, stream::kSynthLatent, 0);
    std::normal_distribution<double> normal;
    s_all[0] = sd_s * normal(engine);
    for (std::size_t t = 1; t < s_all.size(); ++t) s_all[t] = cfg.rho * s_all[t - 1] + cfg.innovation_sd * normal(engine);
  }
  std::vector<double> z_all(s_all.size());
  for (std::size_t t = 0; t < s_all.size(); ++t) z_all[t] = s_all[t] / sd_s;
  w.latent.assign(s_all.begin() + kBurnIn, s_all.end());
  w.latent_z.assign(z_all.begin() + kBurnIn, z_all.end());

  // GIF catalog valences.
  std::vector<double> valence(static_cast<std::size_t>(cfg.gif_catalog_size));
  {
    auto engine = make_engine(cfg.seed, stream::kSynthLatent, 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (auto& v : valence) v = unit(engine);
  }
  std::vector<std::string> gif_names(valence.size());
  for (std::size_t j = 0; j < valence.size(); ++j) gif_names[j] = "g" + padded(static_cast<long>(j), 5);

  // Posts, one engine per day.
  std::vector<std::vector<PostRecord>> day_posts(n);
  const auto cutoff = std::chrono::duration_cast<std::chrono::milliseconds>(cal.cutoff());
  parallel_chunks(n, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<double> weights(valence.size());
    for (std::size_t t = begin; t < end; ++t) {
      auto engine = make_engine(cfg.seed, stream::kSynthDay, t);
      const double z = w.latent_z[t];
      const Date prev = t == 0 ? cal.dates()[0] - std::chrono::days{1} : cal.dates()[t - 1];
      const Instant open = cal.to_instant(prev, cutoff);
      const Instant close = cal.to_instant(cal.dates()[t], cutoff);
      const auto span_ms = (close - open).count();
      for (std::size_t j = 0; j < valence.size(); ++j) weights[j] = std::exp(cfg.gif_tilt * z * valence[j]);
      std::discrete_distribution<std::size_t> pick_gif(weights.begin(), weights.end());
      std::poisson_distribution<long> count(cfg.posts_per_day);
      std::uniform_int_distribution<long long> offset(1, span_ms);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::uniform_int_distribution<int> user(1, 50000);
      std::normal_distribution<double> normal;
      const long posts = std::max(1L, count(engine));
      auto& out = day_posts[t];
      out.reserve(static_cast<std::size_t>(posts));
      for (long k = 0; k < posts; ++k) {
        PostRecord p;
        p.post_id = "d" + padded(static_cast<long>(t), 5) + "-" + padded(k, 5);
        p.timestamp = open + std::chrono::milliseconds{offset(engine)};
        p.user_id = "u" + std::to_string(user(engine));
        const bool tagged = unit(engine) >= cfg.no_cashtag_share;
        p.body = tagged ? "$SPY" : "market";
        double signal = z;
        if (unit(engine) < cfg.gif_share) {
          const std::size_t first = pick_gif(engine);
          p.gif_ids.push_back(gif_names[first]);
          double v = valence[first];
          if (unit(engine) < cfg.multi_gif_share) {
            const std::size_t second = pick_gif(engine);
            if (second != first) {
              p.gif_ids.push_back(gif_names[second]);
              v = 0.5 * (v + valence[second]);
            }
          }
          signal = v + z;
          for (const auto& g : p.gif_ids) p.body += " https://media2.giphy.com/media/" + g + "/giphy.gif";
        } else {
          p.body += " update";
        }
        if (tagged) p.cashtags.push_back("SPY");
        const double u = unit(engine);
        const double bull = cfg.declare_rate * logistic(cfg.declare_slope * signal);
        const double bear = cfg.declare_rate * logistic(-cfg.declare_slope * signal);
        p.declaration = u < bull ? Declaration::Bullish : (u < bull + bear ? Declaration::Bearish : Declaration::None);
        if (unit(engine) < cfg.text_share) {
          const double score = std::tanh(0.5 * z + 0.8 * normal(engine));
          p.text_score = std::round(score * 1e4) / 1e4;
        }
        out.push_back(std::move(p));
      }
    }
  });
  std::size_t total = 0;
  for (const auto& d : day_posts) total += d.size();
  w.posts.reserve(total);
  for (auto& d : day_posts) {
    sort_posts(d);
    std::move(d.begin(), d.end(), std::back_inserter(w.posts));
  }

  // Market series and daily controls.
  std::vector<DayMarket> market(n);
  for (std::size_t t = 0; t < n; ++t) {
    auto engine = make_engine(cfg.seed, stream::kSynthMarket, t);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::poisson_distribution<int> ea(5.0);
    const std::size_t at = t + kBurnIn;
    const double z = z_all[at];
    double lagged = 0.0;
    for (int k = 1; k <= 20; ++k) lagged += z_all[at - static_cast<std::size_t>(k)];
    auto& m = market[t];
    m.ret = cfg.beta0 * z - cfg.beta_rev / 20.0 * lagged + cfg.noise_sd * normal(engine);
    m.volume = std::round(std::exp(18.0 + 0.2 * std::abs(z) + 0.3 * normal(engine)));
    for (int s = 0; s < kSlots; ++s) {
      const bool session = s >= 35;
      m.slot_ret[static_cast<std::size_t>(s)] =
          (session ? cfg.beta0 / 13.0 * z : 0.0) + (session ? 0.15 : 0.03) * normal(engine);
      m.slot_volume[static_cast<std::size_t>(s)] =
          std::round(std::exp((session ? 15.0 : 9.0) + 0.2 * std::abs(z) + 0.5 * normal(engine)));
    }
    const double confound = cfg.confounded ? z : 0.0;
    m.epu = 100.0 + 10.0 * confound + 20.0 * normal(engine);
    m.ads = 0.5 * confound + normal(engine);
    m.ea = ea(engine);
    m.cloud = 100.0 * unit(engine);
    m.covid = 50.0 + 10.0 * normal(engine);
    m.media = normal(engine);
    const int dow = weekday_index(cal.dates()[t]);
    m.eff = 0.01 * (dow - 2) + 0.05 * normal(engine);
    m.bff = 0.03 * normal(engine);
  }
  w.returns.resize(n);
  w.volume.resize(n);
  w.bucket_returns.resize(n * kSlots);
  w.bucket_volume.resize(n * kSlots);
  w.controls.dates.assign(cal.dates().begin(), cal.dates().end());
  for (const char* c : {"epu", "ads", "ea_count", "cloud", "covid_index", "media_sentiment", "eff", "bff", "bw", "ics"})
    w.controls.columns[c].resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& m = market[t];
    w.returns[t] = m.ret;
    w.volume[t] = m.volume;
    for (std::size_t s = 0; s < kSlots; ++s) {
      w.bucket_returns[t * kSlots + s] = m.slot_ret[s];
      w.bucket_volume[t * kSlots + s] = m.slot_volume[s];
    }
    w.controls.columns["epu"][t] = m.epu;
    w.controls.columns["ads"][t] = m.ads;
    w.controls.columns["ea_count"][t] = m.ea;
    w.controls.columns["cloud"][t] = m.cloud;
    w.controls.columns["covid_index"][t] = m.covid;
    w.controls.columns["media_sentiment"][t] = m.media;
    w.controls.columns["eff"][t] = m.eff;
    w.controls.columns["bff"][t] = m.bff;
  }

  // Monthly series, from the month before the first trading day; each day sees the previous month.
  {
    const Date first = first_of_month(cal.dates().front() - std::chrono::days{1});
    const Date last = first_of_month(cal.dates().back());
    std::uint64_t counter = 0;
    for (Date m = first; m <= last; m = first_of_month(m + std::chrono::days{31}), ++counter) {
      auto engine = make_engine(cfg.seed, stream::kSynthMarket, (std::uint64_t{1} << 40) + counter);
      std::normal_distribution<double> normal;
      w.monthly.push_back({m, {normal(engine), 80.0 + 10.0 * normal(engine)}});
    }
    for (std::size_t t = 0; t < n; ++t) {
      const Date prev_month = first_of_month(first_of_month(cal.dates()[t]) - std::chrono::days{1});
      const auto it = std::find_if(w.monthly.begin(), w.monthly.end(), [&](const auto& e) { return e.first == prev_month; });
      w.controls.columns["bw"][t] = it == w.monthly.end() ? kMissing : it->second[0];
      w.controls.columns["ics"][t] = it == w.monthly.end() ? kMissing : it->second[1];
    }
  }

  // Firm panel with a five-factor structure plus the risk-free rate.
  if (cfg.firms > 0) {
    auto& fp = w.firms;
    fp.factor_names = {"mkt_rf", "smb", "hml", "rmw", "cma", "rf"};
    fp.factors.resize(fp.factor_names.size());
    const auto nf = static_cast<std::size_t>(cfg.firms);
    std::vector<double> beta(nf), load_smb(nf), idio(nf), cap(nf);
    std::vector<std::string> ids(nf);
    {
      auto engine = make_engine(cfg.seed, stream::kSynthFirms, 0);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (std::size_t i = 0; i < nf; ++i) {
        ids[i] = "F" + padded(static_cast<long>(i), 4);
        beta[i] = 0.5 + unit(engine);
        load_smb[i] = unit(engine) - 0.5;
        idio[i] = 0.5 + 2.5 * unit(engine);
        cap[i] = std::exp(20.0 + 2.0 * unit(engine));
      }
    }
    const double rf = 0.01;
    for (std::size_t t = 0; t < n; ++t) {
      auto engine = make_engine(cfg.seed, stream::kSynthFirms, t + 1);
      std::normal_distribution<double> normal;
      const double mkt_rf = w.returns[t] - rf;
      const std::array<double, 6> f{mkt_rf, 0.5 * normal(engine), 0.5 * normal(engine), 0.3 * normal(engine),
                                    0.3 * normal(engine), rf};
      for (std::size_t i = 0; i < nf; ++i) {
        const double r = rf + beta[i] * mkt_rf + load_smb[i] * f[1] + idio[i] * normal(engine);
        fp.dates.push_back(cal.dates()[t]);
        fp.firm_ids.push_back(ids[i]);
        fp.ret_pct.push_back(r);
        fp.mktcap.push_back(cap[i]);
        for (std::size_t k = 0; k < f.size(); ++k) fp.factors[k].push_back(f[k]);
        cap[i] *= std::max(0.01, 1.0 + r / 100.0);
      }
    }
  }
  return w;
}

void write_world(const SyntheticWorld& w, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / name).string());
    return out;
  };
  write_posts(dir / "posts.jsonl", w.posts);
  open("calendar.txt") << w.calendar.serialize();
  const auto dates = w.calendar.dates();
  {
    auto out = open("market.csv");
    out << "date,ret_pct,volume\n";
    for (std::size_t t = 0; t < dates.size(); ++t)
      out << format_date(dates[t]) << ',' << number(w.returns[t]) << ',' << number(w.volume[t]) << '\n';
  }
  {
    auto out = open("intraday.csv");
    out << "key,ret_pct,volume\n";
    for (std::size_t t = 0; t < dates.size(); ++t)
      for (int s = 0; s < kSlots; ++s) {
        const auto i = t * kSlots + static_cast<std::size_t>(s);
        out << format_bucket({dates[t], s}) << ',' << number(w.bucket_returns[i]) << ',' << number(w.bucket_volume[i])
            << '\n';
      }
  }
  {
    auto out = open("controls.csv");
    const std::vector<std::string> cols = {"epu", "ads", "ea_count", "cloud", "covid_index", "media_sentiment", "eff", "bff"};
    out << "date";
    for (const auto& c : cols) out << ',' << c;
    out << '\n';
    for (std::size_t t = 0; t < dates.size(); ++t) {
      out << format_date(dates[t]);
      for (const auto& c : cols) out << ',' << number(w.controls.column(c)[t]);
      out << '\n';
    }
  }
  {
    auto out = open("monthly.csv");
    out << "month,bw,ics\n";
    for (const auto& [m, v] : w.monthly) out << format_date(m).substr(0, 7) << ',' << number(v[0]) << ',' << number(v[1]) << '\n';
  }
  if (w.firms.rows() > 0) {
    auto out = open("firms.csv");
    out << "date,firm_id,ret_pct,mktcap";
    for (const auto& f : w.firms.factor_names) out << ',' << f;
    out << '\n';
    for (std::size_t r = 0; r < w.firms.rows(); ++r) {
      out << format_date(w.firms.dates[r]) << ',' << w.firms.firm_ids[r] << ',' << number(w.firms.ret_pct[r]) << ','
          << number(w.firms.mktcap[r]);
      for (const auto& f : w.firms.factors) out << ',' << number(f[r]);
      out << '\n';
    }
  }
  {
    nlohmann::ordered_json truth;
    truth["config"] = nlohmann::ordered_json::object();
    std::istringstream in(w.config.serialize());
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      truth["config"][line.substr(0, eq)] = line.substr(eq + 1);
    }
    const auto signs = expected_signs(w.config);
    truth["expected_signs"] = {{"day0", signs[0]}, {"week", signs[1]}, {"month", signs[2]}};
    truth["latent_sd"] = w.config.innovation_sd / std::sqrt(1.0 - w.config.rho * w.config.rho);
    auto days = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < dates.size(); ++t)
      days.push_back({{"date", format_date(dates[t])}, {"latent", w.latent[t]}, {"z", w.latent_z[t]}});
    truth["days"] = std::move(days);
    open("truth.json") << truth.dump(2) << '\n';
  }
}

}  // namespace giffluence

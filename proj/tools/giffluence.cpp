#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "giffluence/corpus.hpp"
#include "giffluence/error.hpp"
#include "giffluence/pipeline.hpp"
#include "giffluence/synth.hpp"

namespace gf = giffluence;

namespace {

int exit_code(gf::ErrorCode code) {
  switch (gf::kind_of(code)) {
    case gf::ErrorKind::Configuration: return 2;
    case gf::ErrorKind::Data: return 3;
    case gf::ErrorKind::Estimation: return 4;
  }
  return 3;
}

/// String-valued flags that map one-to-one onto configuration keys.
struct Flags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options[key] = app->add_option(flag, values[key], help);
  }
  void add_switch(CLI::App* app, const std::string& flag, const std::string& key, const std::string& value,
                  const std::string& help) {
    options[key] = app->add_flag_callback(flag, [this, key, value] { values[key] = value; }, help);
  }
  /// Flags given on the command line, in key order.
  std::map<std::string, std::string> given() const {
    std::map<std::string, std::string> out;
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) out[key] = values.at(key);
    return out;
  }
};

void add_index_flags(CLI::App* app, Flags& f) {
  f.add(app, "--posts", "posts", "Post files (glob)");
  f.add(app, "--schema", "schema", "Schema mapping file (default: canonical keys)");
  f.add(app, "--calendar", "calendar", "Trading calendar file");
  f.add(app, "--min-decl", "min_decl", "Declarations a GIF needs before it counts");
  f.add(app, "--denominator", "denominator", "eligible | gif_posts");
  f.add(app, "--window", "window", "through_day | through_previous_day");
  f.add(app, "--appearance-pct", "appearance_pct", "0 | 50 | 75");
  f.add_switch(app, "--keep-no-cashtag", "require_cashtag", "false", "Keep posts without a cashtag");
  f.add_switch(app, "--ledger-snapshots", "ledger_snapshots", "true", "Write one ledger snapshot per trading day");
}

void add_pipeline_flags(CLI::App* app, Flags& f) {
  add_index_flags(app, f);
  f.add(app, "--market", "market", "Daily market CSV (date,ret_pct[,volume])");
  f.add(app, "--intraday", "intraday", "Bucket market CSV (key,ret_pct,volume)");
  f.add(app, "--controls", "controls", "Control CSVs, comma separated");
  f.add(app, "--firms", "firms", "Firm panel CSV");
  f.add(app, "--tables", "tables", "Tables to run, comma separated");
  f.add(app, "--inference", "inference", "classical | block_bootstrap | nelson_kim");
  f.add(app, "--reps", "reps", "Bootstrap replicates");
  f.add(app, "--nk-reps", "nk_reps", "Randomized p-value replicates");
  f.add_switch(app, "--nelson-kim", "nelson_kim", "true", "Add randomized p-value columns");
  f.add_switch(app, "--no-plots", "plots", "false", "Skip SVG plots");
}

gf::PipelineConfig resolve(const std::string& config_path, const Flags& flags,
                           const std::map<std::string, std::string>& globals) {
  gf::PipelineConfig cfg;
  if (!config_path.empty()) cfg.load(config_path);
  for (const auto& [k, v] : flags.given()) cfg.set(k, v);
  for (const auto& [k, v] : globals) cfg.set(k, v);
  return cfg;
}

void print_report(const gf::PipelineReport& r, const std::string& out) {
  std::cout << "wrote " << r.files.size() << " files to " << out << '\n';
  for (const auto& n : r.notices) std::cout << "notice: " << n << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GIF-based investor sentiment index and regression pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string seed, out, config, workers;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  auto* out_opt = app.add_option("--out", out, "Output directory");
  app.add_option("--config", config, "Configuration file (key=value)");
  auto* workers_opt = app.add_option("--workers", workers, "Worker threads");

  auto* ingest = app.add_subcommand("ingest", "Parse posts into canonical JSONL");
  Flags ingest_flags;
  ingest_flags.add(ingest, "--posts", "posts", "Post files (glob)");
  ingest_flags.add(ingest, "--schema", "schema", "Schema mapping file");
  ingest_flags.add(ingest, "--calendar", "calendar", "Trading calendar file");

  auto* index = app.add_subcommand("index", "Build sentiment series and the valence ledger");
  Flags index_flags;
  add_index_flags(index, index_flags);

  auto* regress = app.add_subcommand("regress", "Run the regression tables");
  Flags regress_flags;
  add_pipeline_flags(regress, regress_flags);

  auto* corr = app.add_subcommand("corr", "Correlation table of sentiment and mood proxies");
  Flags corr_flags;
  add_pipeline_flags(corr, corr_flags);

  auto* report = app.add_subcommand("report", "Full bundle: series, tables, plots");
  Flags report_flags;
  add_pipeline_flags(report, report_flags);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic world");
  std::map<std::string, std::string> synth_values;
  std::map<std::string, CLI::Option*> synth_opts;
  for (const auto& [flag, key] : std::vector<std::pair<std::string, std::string>>{
           {"--days", "days"},           {"--posts-per-day", "posts_per_day"}, {"--gifs", "gif_catalog_size"},
           {"--rho", "rho"},             {"--beta0", "beta0"},                 {"--beta-rev", "beta_rev"},
           {"--noise-sd", "noise_sd"},   {"--firms", "firms"},                 {"--start", "start"},
           {"--gif-share", "gif_share"}, {"--declare-rate", "declare_rate"}})
    synth_opts[key] = synth->add_option(flag, synth_values[key], "World parameter " + key);
  synth->add_flag_callback("--confounded", [&] { synth_values["confounded"] = "true"; }, "Controls load on latent sentiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    std::map<std::string, std::string> globals;
    if (seed_opt->count() > 0) globals["seed"] = seed;
    if (out_opt->count() > 0) globals["out"] = out;
    if (workers_opt->count() > 0) globals["workers"] = workers;

    if (*synth) {
      std::string text;
      if (!config.empty()) {
        std::ifstream in(config);
        if (!in) throw gf::Error(gf::ErrorCode::Config, "cannot read config " + config);
        std::stringstream buf;
        buf << in.rdbuf();
        text = buf.str();
      }
      for (const auto& [key, opt] : synth_opts)
        if (opt->count() > 0) text += "\n" + key + "=" + synth_values[key];
      if (synth_values.count("confounded") && synth_values["confounded"] == "true") text += "\nconfounded=true";
      if (seed_opt->count() > 0) text += "\nseed=" + seed;
      const auto cfg = gf::WorldConfig::parse(text);
      const auto world = gf::generate_world(cfg, workers.empty() ? 1 : std::stoi(workers));
      const std::string dir = out.empty() ? "world" : out;
      gf::write_world(world, dir);
      std::cout << "wrote " << world.posts.size() << " posts over " << world.calendar.size() << " trading days to "
                << dir << '\n';
      return 0;
    }

    if (*ingest) {
      gf::PipelineConfig cfg = resolve(config, ingest_flags, globals);
      if (cfg.posts.empty()) throw gf::Error(gf::ErrorCode::Config, "--posts is required");
      const auto schema = cfg.schema.empty() ? gf::PostSchema::canonical() : gf::PostSchema::load(cfg.schema);
      std::optional<gf::TradingCalendar> cal;
      if (!cfg.calendar.empty()) cal = gf::TradingCalendar::load(cfg.calendar);
      const auto files = gf::expand_glob(cfg.posts);
      if (files.empty()) throw gf::Error(gf::ErrorCode::Config, "no post files match '" + cfg.posts + "'");
      const auto result = gf::ingest_files(files, schema, cal ? &*cal : nullptr, cfg.workers);
      std::filesystem::create_directories(cfg.out);
      gf::write_posts(std::filesystem::path(cfg.out) / "posts.jsonl", result.posts);
      std::ofstream rejected(std::filesystem::path(cfg.out) / "rejected.csv", std::ios::binary);
      rejected << "file,line,reason\n";
      for (const auto& r : result.rejected) rejected << r.file << ',' << r.line << ",\"" << r.reason << "\"\n";
      std::cout << result.posts.size() << " posts, " << result.rejected.size() << " rejected lines, "
                << result.non_market << " without cashtags, " << result.out_of_calendar << " outside the calendar\n";
      return 0;
    }

    if (*index) {
      gf::PipelineConfig cfg = resolve(config, index_flags, globals);
      if (cfg.posts.empty() || cfg.calendar.empty())
        throw gf::Error(gf::ErrorCode::Config, "--posts and --calendar are required");
      const auto cal = gf::TradingCalendar::load(cfg.calendar);
      const auto schema = cfg.schema.empty() ? gf::PostSchema::canonical() : gf::PostSchema::load(cfg.schema);
      const auto ingested = gf::ingest_files(gf::expand_glob(cfg.posts), schema, &cal, cfg.workers);
      gf::LedgerObserver observer;
      const std::filesystem::path dir(cfg.out);
      if (cfg.ledger_snapshots)
        observer = [&](std::size_t day, const gf::ValenceLedger& ledger) {
          std::filesystem::create_directories(dir / "ledger");
          std::ofstream f(dir / "ledger" / (gf::format_date(cal.dates()[day]) + ".csv"), std::ios::binary);
          ledger.write_snapshot(f);
        };
      const auto bundle = gf::build_index_bundle(ingested.posts, cal, cfg.index, cfg.workers, observer);
      const auto files = gf::write_index_outputs(bundle, dir);
      std::cout << "indexed " << bundle.result.posts_used << " posts (" << bundle.result.posts_flagged
                << " flagged without cashtags); wrote " << files.size() << " files to " << cfg.out << '\n';
      return 0;
    }

    if (*regress || *corr || *report) {
      const Flags& flags = *regress ? regress_flags : (*corr ? corr_flags : report_flags);
      gf::PipelineConfig cfg;
      if (*corr) {
        cfg.tables = {"correlations"};
        cfg.plots = false;
      } else if (*regress) {
        cfg.tables = {"returns", "split", "intraday", "sorts", "volatility", "volume", "flows", "robustness"};
        cfg.plots = false;
      }
      if (!config.empty()) cfg.load(config);
      for (const auto& [k, v] : flags.given()) cfg.set(k, v);
      for (const auto& [k, v] : globals) cfg.set(k, v);
      print_report(gf::run_pipeline(cfg), cfg.out);
      return 0;
    }
  } catch (const gf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

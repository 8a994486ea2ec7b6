#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "giffluence/corpus.hpp"
#include "giffluence/index.hpp"
#include "giffluence/metrics.hpp"
#include "giffluence/table.hpp"

namespace giffluence {

/// Flat `key=value` configuration. Keys match the CLI long flags.
struct PipelineConfig {
  std::string posts;                     // glob
  std::string schema;                    // empty: canonical post format
  std::string calendar;
  std::string market;                    // date,ret_pct[,volume]
  std::string intraday;                  // key,ret_pct,volume
  std::vector<std::string> controls;     // daily and monthly CSVs
  std::string firms;
  std::string out = "out";

  IndexOptions index;
  /// returns, split, intraday, sorts, volatility, volume, flows, correlations, robustness.
  std::vector<std::string> tables = {"returns",    "split",  "intraday", "sorts",        "volatility",
                                     "volume",     "flows",  "correlations", "robustness"};
  Method inference = Method::BlockBootstrap;
  int reps = 2000;
  int nk_reps = 1999;
  bool nelson_kim = false;  // adds randomized p-value columns to the main return table
  std::uint64_t seed = 20240917;
  int workers = 1;
  bool ledger_snapshots = false;
  bool plots = true;

  /// Throws Error{Config} for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Applies every line of a config file.
  void load(const std::filesystem::path& path);
  /// Every key with its effective value, sorted; paths included, output dir excluded.
  std::map<std::string, std::string> effective() const;
};

struct PipelineReport {
  std::vector<std::string> files;    // relative to out, in write order
  std::vector<std::string> notices;  // disabled tables and similar
  std::map<std::string, RegressionTable> tables;
};

/// Everything the report reads, already parsed and aligned to the calendar.
struct PipelineInputs {
  TradingCalendar calendar;
  IngestResult ingest;
  SeriesStore market;  // daily `ret`, `volume`; bucket `ret_i`, `volume_i`
  std::optional<ControlTable> controls;
  std::optional<FirmPanel> firms;
};

/// Reads the input files named in cfg. Throws Error{Config} for missing inputs.
PipelineInputs load_inputs(const PipelineConfig& cfg);

/// Runs every table whose inputs are present. Output is a pure function of
/// (inputs, cfg); the worker count does not change a byte.
PipelineReport run_pipeline(const PipelineConfig& cfg);
PipelineReport run_pipeline(const PipelineConfig& cfg, const PipelineInputs& inputs);

// Stages, also used by the CLI subcommands.

struct IndexBundle {
  IndexResult result;
  SentimentSeries gif_z, pos_z, neg_z, selfdec_z, text_z;
  SentimentSeries intraday_gif_z, dispersion_z;
};

/// Standardizes whatever can be standardized; missing or degenerate series stay raw-only.
IndexBundle build_index_bundle(std::span<const PostRecord> posts, const TradingCalendar& cal,
                               const IndexOptions& options, int workers,
                               const LedgerObserver& observer = {});

/// Writes series.csv, intraday.csv and ledger.csv under dir.
std::vector<std::string> write_index_outputs(const IndexBundle& bundle, const std::filesystem::path& dir);

/// Market file columns into the store: `ret`, `volume` daily; `ret_i`, `volume_i` bucket.
void load_market(SeriesStore& store, const TradingCalendar& cal, const std::string& daily_path,
                 const std::string& intraday_path);

}  // namespace giffluence

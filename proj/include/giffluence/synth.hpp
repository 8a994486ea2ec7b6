#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "giffluence/corpus.hpp"
#include "giffluence/metrics.hpp"

namespace giffluence {

/// Parameters of the synthetic world. Latent sentiment S follows an AR(1);
/// z = S / sd(S) is the standardized latent, and the planted effects are in % per
/// unit of z.
struct WorldConfig {
  int days = 1000;
  double posts_per_day = 2000.0;
  int gif_catalog_size = 500;
  double rho = 0.5;
  double innovation_sd = 1.0;
  double declare_slope = 2.0;  // a
  double declare_rate = 0.6;   // share of posts carrying a declaration
  double gif_share = 0.3;      // share of posts carrying a GIF
  double multi_gif_share = 0.1;
  double gif_tilt = 1.0;       // GIF choice weights proportional to exp(tilt * z * v_j)
  double no_cashtag_share = 0.02;
  double text_share = 0.7;     // posts with a text score
  double beta0 = 0.3;
  double beta_rev = 1.2;
  double noise_sd = 1.0;
  bool confounded = false;     // EPU and ADS load on z
  int firms = 30;              // 0 disables the firm panel
  std::string start = "2020-09-01";
  std::uint64_t seed = 1;

  /// Throws Error{Config} on invalid values.
  void validate() const;
  /// Flat `key=value` lines, one per field; accepted by parse().
  std::string serialize() const;
  static WorldConfig parse(std::string_view text);
};

struct SyntheticWorld {
  WorldConfig config;
  TradingCalendar calendar;
  std::vector<PostRecord> posts;         // sorted by (timestamp, post_id)
  std::vector<double> latent;            // S per trading day
  std::vector<double> latent_z;          // S / sd(S)
  std::vector<double> returns;           // index return %, per trading day
  std::vector<double> volume;            // daily volume
  std::vector<double> bucket_returns;    // day-major, 48 per day
  std::vector<double> bucket_volume;
  ControlTable controls;                 // daily aligned, monthly columns already carried forward
  std::vector<std::pair<Date, std::array<double, 2>>> monthly;  // (first of month, {bw, ics})
  FirmPanel firms;
};

/// Deterministic in (cfg, seed); days are generated from per-day counter seeds.
SyntheticWorld generate_world(const WorldConfig& cfg, int workers = 1);

/// Sign pattern (+1, 0, -1) of the day-0, week [t+1, t+5] and month [t+1, t+20]
/// return coefficients implied by the planted parameters.
std::array<int, 3> expected_signs(const WorldConfig& cfg);

/// Writes posts.jsonl, calendar.txt, market.csv, intraday.csv, controls.csv,
/// monthly.csv, firms.csv (when firms are on) and truth.json into `dir`.
void write_world(const SyntheticWorld& world, const std::filesystem::path& dir);

}  // namespace giffluence

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <map>
#include <random>
#include <sstream>

#include "giffluence/error.hpp"
#include "giffluence/pipeline.hpp"
#include "giffluence/plot.hpp"
#include "giffluence/synth.hpp"
#include "giffluence/table.hpp"
#include "support.hpp"

using namespace giffluence;
using namespace testsupport;

namespace {

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
  return out;
}

int run_cli(const std::string& args) {
  const auto cmd = std::string(GIFFLUENCE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// One small world on disk, shared by the pipeline tests.
const fs::path& world_dir() {
  static const fs::path dir = [] {
    auto d = scratch("report_world");
    WorldConfig c;
    c.days = 129;
    c.posts_per_day = 150;
    c.gif_catalog_size = 60;
    c.firms = 12;
    c.seed = 21;
    write_world(generate_world(c), d);
    return d;
  }();
  return dir;
}

PipelineConfig world_config(const fs::path& out) {
  const auto& w = world_dir();
  PipelineConfig cfg;
  cfg.set("posts", (w / "posts.jsonl").string());
  cfg.set("calendar", (w / "calendar.txt").string());
  cfg.set("market", (w / "market.csv").string());
  cfg.set("intraday", (w / "intraday.csv").string());
  cfg.set("controls", (w / "controls.csv").string() + "," + (w / "monthly.csv").string());
  cfg.set("firms", (w / "firms.csv").string());
  cfg.set("reps", "200");
  cfg.set("nk_reps", "99");
  cfg.set("nelson_kim", "true");
  cfg.set("out", out.string());
  return cfg;
}

SeriesStore simple_store(std::size_t n, std::uint64_t seed) {
  std::vector<Date> dates;
  for (std::size_t i = 0; i < n; ++i) dates.push_back(date("2020-01-01") + std::chrono::days{static_cast<int>(i)});
  SeriesStore store(dates);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = nd(rng);
    y[i] = 0.4 * x[i] + nd(rng);
  }
  store.add_daily("x", x);
  store.add_daily("y", y);
  return store;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("stars follow the p thresholds") {
  CHECK(stars(0.009) == "***");
  CHECK(stars(0.01) == "**");
  CHECK(stars(0.049) == "**");
  CHECK(stars(0.05) == "*");
  CHECK(stars(0.099) == "*");
  CHECK(stars(0.1) == "");
  CHECK(stars(kMissing) == "");
}

TEST_CASE("classical regression through the store") {
  const auto store = simple_store(200, 1);
  RegressionSpec spec;
  spec.label = "demo";
  spec.dependent = {"y", Transform::Level, 0, 0};
  spec.regressors = {{"x"}};
  spec.inference.method = Method::Classical;
  const auto r = run_regression(spec, store);
  Eigen::MatrixXd X(200, 2);
  Eigen::VectorXd y(200);
  for (Eigen::Index i = 0; i < 200; ++i) {
    X(i, 0) = store.daily("x")[static_cast<std::size_t>(i)];
    X(i, 1) = 1.0;
    y(i) = store.daily("y")[static_cast<std::size_t>(i)];
  }
  const auto fit = ols_fit(X, y);
  REQUIRE(r.terms.size() == 2);
  CHECK(r.terms[0].name == "x");
  CHECK(r.terms[1].name == "const");
  CHECK(r.terms[0].coef == doctest::Approx(fit.beta(0)).epsilon(1e-12));
  CHECK(r.terms[0].se == doctest::Approx(fit.se(0)).epsilon(1e-12));
  CHECK(r.n == 200);
  CHECK(r.adj_r2 <= r.r2);

  const RegressionTable table{"One column", {r}};
  std::ostringstream md;
  write_table_markdown(md, table);
  std::ostringstream pstr;
  pstr.precision(3);
  pstr << std::fixed << r.terms[0].coef << stars(r.terms[0].p);
  CHECK(md.str().find(pstr.str()) != std::string::npos);
}

TEST_CASE("lags, windows and filters") {
  const auto store = simple_store(120, 2);
  RegressionSpec spec;
  spec.dependent = {"y", Transform::CumReturn, 1, 5};
  spec.regressors = {{"x", true, 0}};
  spec.controls = {{"y", false, 1}};
  spec.inference = {Method::BlockBootstrap, 0, 200, 9};
  spec.filters.from = date("2020-01-05");
  const auto r = run_regression(spec, store);
  CHECK(r.block_len == 5);
  CHECK(r.method == Method::BlockBootstrap);
  // 120 days, minus the first 4 by date, minus the last 5 without a full window.
  CHECK(r.n == 111);
  std::size_t by_date = 0, missing = 0;
  for (const auto& e : r.excluded) (e.reason == "date_range" ? by_date : missing)++;
  CHECK(by_date == 4);
  CHECK(missing == 5);
  CHECK(r.terms[0].name == "|x|");
  CHECK(run_regression(spec, store, 3).terms[0].se == r.terms[0].se);
}

TEST_CASE("empty spec list and unknown series") {
  const auto store = simple_store(50, 3);
  const auto t = run_table("Nothing", {}, store);
  CHECK(t.columns.empty());
  std::ostringstream out;
  write_table_csv(out, t);
  CHECK(out.str().find('\n') == out.str().size() - 1);

  RegressionSpec spec;
  spec.dependent = {"y", Transform::Level, 0, 0};
  spec.regressors = {{"nonesuch"}};
  try {
    run_regression(spec, store);
    FAIL("expected unknown series");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownSeries);
    CHECK(std::string(e.what()).find("nonesuch") != std::string::npos);
  }
}

TEST_CASE("plots") {
  const std::vector<std::string> keys{"2021-03-01", "2021-03-02", "2021-03-03", "2021-03-04"};
  const auto flat = emit_plot(keys, {{"flat", {2.0, 2.0, 2.0, 2.0}}}, {"Flat", "v"});
  // One path, every point at the same height.
  const auto d0 = flat.find("<path d=\"");
  const auto path = flat.substr(d0 + 9, flat.find('"', d0 + 9) - d0 - 9);
  std::istringstream in(path);
  std::string x, y, first_y;
  int points = 0;
  while (in >> x >> y) {
    CHECK((x[0] == 'M' || x[0] == 'L'));
    if (first_y.empty()) first_y = y;
    CHECK(y == first_y);
    ++points;
  }
  CHECK(points == 4);
  CHECK(flat.find("2021-03-01") != std::string::npos);
  CHECK(flat.find("2021-03-04") != std::string::npos);

  const auto two = emit_plot(keys, {{"alpha", {1, 2, 3, 4}}, {"beta", {4, 3, 2, 1}}}, {"Two", ""});
  CHECK(two.find(">alpha<") < two.find(">beta<"));
  CHECK(emit_plot(keys, {{"alpha", {1, 2, 3, 4}}, {"beta", {4, 3, 2, 1}}}, {"Two", ""}) == two);

  const auto gap = emit_plot(keys, {{"gappy", {1, kMissing, 3, 4}}}, {"Gap", ""});
  const auto g0 = gap.find("<path d=\"");
  const auto gpath = gap.substr(g0, gap.find("/>", g0) - g0);
  CHECK(std::count(gpath.begin(), gpath.end(), 'M') == 2);

  CHECK_THROWS_AS(emit_plot(keys, {}, {}), Error);
  CHECK_THROWS_AS(emit_plot(keys, {{"none", std::vector<double>(4, kMissing)}}, {}), Error);
  CHECK_THROWS_AS(emit_plot(keys, {{"short", {1.0}}}, {}), Error);
}

TEST_CASE("configuration keys") {
  PipelineConfig cfg;
  cfg.set("reps", "500");
  cfg.set("window", "through_previous_day");
  cfg.set("tables", "returns,flows");
  CHECK(cfg.reps == 500);
  CHECK(cfg.index.window == Window::ThroughPreviousDay);
  CHECK(cfg.tables == std::vector<std::string>{"returns", "flows"});
  CHECK_THROWS_AS(cfg.set("reps", "50"), Error);
  CHECK_THROWS_AS(cfg.set("tables", "returns,bogus"), Error);
  CHECK_THROWS_AS(cfg.set("colour", "red"), Error);
  const auto dir = scratch("cfg");
  write_file(dir / "run.cfg", "# comment\nseed = 99\nmin_decl=3\n");
  cfg.load(dir / "run.cfg");
  CHECK(cfg.seed == 99);
  CHECK(cfg.index.min_decl == 3);
  CHECK(cfg.effective().at("seed") == "99");
  CHECK_FALSE(cfg.effective().contains("out"));
  write_file(dir / "bad.cfg", "seed\n");
  CHECK_THROWS_AS(cfg.load(dir / "bad.cfg"), Error);
  fs::remove_all(dir);
}

TEST_CASE("report bundle is deterministic across runs and workers") {
  const auto root = scratch("bundles");
  auto cfg = world_config(root / "a");
  const auto report = run_pipeline(cfg);
  cfg.out = (root / "b").string();
  run_pipeline(cfg);
  cfg.out = (root / "c").string();
  cfg.workers = 3;
  run_pipeline(cfg);
  const auto a = tree(root / "a");
  CHECK(a.size() == report.files.size());
  CHECK(a.contains("tables/returns.csv"));
  CHECK(a.contains("tables/returns.json"));
  CHECK(a.contains("tables/flows_eff_ds.md"));
  CHECK(a.contains("plots/gif_posts.svg"));
  CHECK(a.contains("series.csv"));
  CHECK(a == tree(root / "b"));
  CHECK(a == tree(root / "c"));
  CHECK(a.at("tables/returns.json").find("\"seed\"") != std::string::npos);
  fs::remove_all(root);
}

TEST_CASE("missing optional inputs disable only their tables") {
  const auto root = scratch("partial");
  auto cfg = world_config(root / "out");
  cfg.controls.clear();
  cfg.firms.clear();
  cfg.nelson_kim = false;
  const auto report = run_pipeline(cfg);
  const auto files = tree(root / "out");
  CHECK_FALSE(files.contains("tables/flows_eff_ds.csv"));
  CHECK_FALSE(files.contains("tables/sorts_size.csv"));
  CHECK(files.contains("tables/returns.csv"));
  auto noticed = [&](const std::string& what) {
    return std::any_of(report.notices.begin(), report.notices.end(),
                       [&](const std::string& n) { return n.rfind(what, 0) == 0; });
  };
  CHECK(noticed("flows"));
  CHECK(noticed("sorts"));
  fs::remove_all(root);
}

TEST_CASE("earnings news share joins the correlation table") {
  const auto root = scratch("ea_news");
  auto cfg = world_config(root / "out");
  const auto cal = TradingCalendar::load(cfg.calendar);
  std::string csv = "date,meets_or_beats\n";
  for (const auto d : cal.dates()) csv += format_date(d) + ",1\n";
  write_file(root / "news.csv", csv);
  cfg.controls.push_back((root / "news.csv").string());
  cfg.tables = {"correlations"};
  cfg.plots = false;
  run_pipeline(cfg);
  CHECK(read_file(root / "out" / "tables" / "correlations.csv").find("positive_ea_news") != std::string::npos);
  fs::remove_all(root);
}

TEST_CASE("command line exit codes and precedence") {
  const auto& w = world_dir();
  const auto root = scratch("cli");
  const std::string inputs = "--posts " + (w / "posts.jsonl").string() + " --calendar " +
                             (w / "calendar.txt").string() + " --market " + (w / "market.csv").string();
  CHECK(run_cli("synth --days 24 --posts-per-day 200 --firms 0 --out " + (root / "tiny").string()) == 0);
  CHECK(run_cli("corr " + inputs + " --out " + (root / "corr").string()) == 0);
  CHECK(fs::exists(root / "corr" / "tables" / "correlations.csv"));

  CHECK(run_cli("report " + inputs + " --reps 5 --out " + (root / "x").string()) == 2);
  CHECK(run_cli("report --no-such-flag") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("report --posts " + (w / "posts.jsonl").string() + " --out " + (root / "x").string()) == 2);

  // A market file with a missing trading day is a data error.
  auto market = read_file(w / "market.csv");
  const auto second = market.find('\n', market.find('\n') + 1);
  market.erase(second + 1, market.find('\n', second + 1) - second);
  write_file(root / "gap.csv", market);
  CHECK(run_cli("report --posts " + (w / "posts.jsonl").string() + " --calendar " + (w / "calendar.txt").string() +
                " --market " + (root / "gap.csv").string() + " --out " + (root / "x").string()) == 3);

  // Too short a sample for the monthly horizon is an estimation error.
  const auto tiny = root / "tiny";
  CHECK(run_cli("report --posts " + (tiny / "posts.jsonl").string() + " --calendar " +
                (tiny / "calendar.txt").string() + " --market " + (tiny / "market.csv").string() +
                " --reps 200 --out " + (root / "x").string()) == 4);

  // Flags override the config file, which overrides defaults.
  write_file(root / "run.cfg", "reps=300\nseed=5\ntables=correlations\nplots=false\n");
  CHECK(run_cli("report " + inputs + " --config " + (root / "run.cfg").string() + " --reps 400 --out " +
                (root / "prec").string()) == 0);
  const auto manifest = read_file(root / "prec" / "manifest.json");
  CHECK(manifest.find("\"reps\": \"400\"") != std::string::npos);
  CHECK(manifest.find("\"seed\": \"5\"") != std::string::npos);
  fs::remove_all(root);
}

}  // TEST_SUITE

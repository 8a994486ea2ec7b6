#include "giffluence/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "giffluence/corpus.hpp"
#include "giffluence/csv.hpp"
#include "giffluence/error.hpp"
#include "giffluence/metrics.hpp"
#include "giffluence/rng.hpp"

namespace giffluence {

void SeriesStore::add_daily(const std::string& name, std::vector<double> values) {
  if (values.size() != dates_.size())
    throw Error(ErrorCode::SchemaMismatch, "daily series '" + name + "' has " + std::to_string(values.size()) +
                                               " values for " + std::to_string(dates_.size()) + " days");
  daily_[name] = std::move(values);
}

void SeriesStore::add_bucket(const std::string& name, std::vector<double> values) {
  if (values.size() != dates_.size() * kSlots)
    throw Error(ErrorCode::SchemaMismatch, "bucket series '" + name + "' has " + std::to_string(values.size()) +
                                               " values for " + std::to_string(dates_.size() * kSlots) + " buckets");
  bucket_[name] = std::move(values);
}

const std::vector<double>& SeriesStore::daily(const std::string& name) const {
  const auto it = daily_.find(name);
  if (it == daily_.end()) throw Error(ErrorCode::UnknownSeries, "no daily series '" + name + "'");
  return it->second;
}

const std::vector<double>& SeriesStore::bucket(const std::string& name) const {
  const auto it = bucket_.find(name);
  if (it == bucket_.end()) throw Error(ErrorCode::UnknownSeries, "no bucket series '" + name + "'");
  return it->second;
}

std::string Dependent::label() const {
  auto window = [&] {
    if (m == n) return "(t" + (m == 0 ? std::string() : (m > 0 ? "+" : "") + std::to_string(m)) + ")";
    auto at = [](int k) { return k == 0 ? std::string("t") : "t" + std::string(k > 0 ? "+" : "") + std::to_string(k); };
    return "[" + at(m) + "," + at(n) + "]";
  };
  switch (transform) {
    case Transform::Level: return series + window();
    case Transform::Sum: return "sum_" + series + window();
    case Transform::CumReturn: return series + window();
    case Transform::RealizedVol: return "vol_" + series + window();
    case Transform::LogVolume: return "logvol_" + series + window();
  }
  return series;
}

std::string Regressor::label() const {
  std::string s = absolute ? "|" + series + "|" : series;
  if (lag != 0) s += "_lag" + std::to_string(lag);
  return s;
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Classical: return "classical";
    case Method::BlockBootstrap: return "block_bootstrap";
    case Method::NelsonKim: return "nelson_kim";
  }
  return "?";
}

std::string stars(double p) {
  if (is_missing(p)) return "";
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

namespace {

std::vector<double> dependent_values(const Dependent& d, const std::vector<double>& v) {
  const auto size = static_cast<std::ptrdiff_t>(v.size());
  std::vector<double> out(v.size(), kMissing);
  if (d.transform == Transform::Level) {
    for (std::ptrdiff_t t = 0; t < size; ++t)
      if (t + d.m >= 0 && t + d.m < size) out[static_cast<std::size_t>(t)] = v[static_cast<std::size_t>(t + d.m)];
    return out;
  }
  if (d.n < d.m) throw Error(ErrorCode::Config, "dependent window [" + std::to_string(d.m) + ", " + std::to_string(d.n) + "] is empty");
  if (d.transform == Transform::RealizedVol && d.n == d.m)
    throw Error(ErrorCode::WindowOutOfRange, "realized volatility needs at least two days");
  std::span<const double> all(v);
  for (std::ptrdiff_t t = 0; t < size; ++t) {
    const auto lo = t + d.m, hi = t + d.n;
    if (lo < 0 || hi >= size) continue;
    const auto window = all.subspan(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo + 1));
    if (std::any_of(window.begin(), window.end(), is_missing)) continue;
    double value = 0.0;
    switch (d.transform) {
      case Transform::Sum:
        for (const double x : window) value += x;
        break;
      case Transform::CumReturn: value = cum_return(all, t, d.m, d.n); break;
      case Transform::RealizedVol: value = realized_vol(all, lo, d.n - d.m); break;
      case Transform::LogVolume: value = log_total_volume(all, t, d.m, d.n); break;
      case Transform::Level: break;
    }
    out[static_cast<std::size_t>(t)] = value;
  }
  return out;
}

std::vector<double> regressor_values(const Regressor& r, const std::vector<double>& v) {
  std::vector<double> out(v.size(), kMissing);
  for (std::size_t t = 0; t < v.size(); ++t) {
    const auto src = static_cast<std::ptrdiff_t>(t) - r.lag;
    if (src < 0 || src >= static_cast<std::ptrdiff_t>(v.size())) continue;
    const double x = v[static_cast<std::size_t>(src)];
    out[t] = r.absolute ? std::abs(x) : x;
  }
  return out;
}

std::string fixed(double x, int digits = 3) {
  if (is_missing(x)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

}  // namespace

RegressionResult run_regression(const RegressionSpec& spec, const SeriesStore& store, int workers) {
  if (spec.regressors.empty()) throw Error(ErrorCode::Config, spec.label + ": no regressors");
  auto fetch = [&](const std::string& id) -> const std::vector<double>& {
    return spec.intraday ? store.bucket(id) : store.daily(id);
  };
  const auto y_all = dependent_values(spec.dependent, fetch(spec.dependent.series));
  const std::size_t rows = y_all.size();

  std::vector<const Regressor*> terms;
  for (const auto& r : spec.regressors) terms.push_back(&r);
  for (const auto& r : spec.controls) terms.push_back(&r);
  const auto k = static_cast<Index>(terms.size());
  MatrixXd X(static_cast<Index>(rows), k + 1);
  for (Index c = 0; c < k; ++c) {
    const auto col = regressor_values(*terms[static_cast<std::size_t>(c)], fetch(terms[static_cast<std::size_t>(c)]->series));
    for (std::size_t t = 0; t < rows; ++t) X(static_cast<Index>(t), c) = col[t];
  }
  X.col(k).setOnes();

  auto key = [&](std::size_t t) {
    if (!spec.intraday) return format_date(store.dates()[t]);
    return format_bucket({store.dates()[t / SeriesStore::kSlots], static_cast<int>(t % SeriesStore::kSlots)});
  };

  RegressionResult out;
  out.label = spec.label;
  out.dependent = spec.dependent.label();
  out.seed = spec.inference.seed;

  std::vector<std::size_t> candidate;
  for (std::size_t t = 0; t < rows; ++t) {
    const Date day = store.dates()[spec.intraday ? t / SeriesStore::kSlots : t];
    if ((spec.filters.from && day < *spec.filters.from) || (spec.filters.to && day > *spec.filters.to)) {
      out.excluded.push_back({key(t), "date_range"});
      continue;
    }
    bool ok = !is_missing(y_all[t]);
    for (Index c = 0; ok && c < k; ++c) ok = !is_missing(X(static_cast<Index>(t), c));
    if (!ok) {
      out.excluded.push_back({key(t), "missing"});
      continue;
    }
    candidate.push_back(t);
  }

  auto gather = [&](const std::vector<std::size_t>& idx, VectorXd& y, MatrixXd& Z) {
    y.resize(static_cast<Index>(idx.size()));
    Z.resize(static_cast<Index>(idx.size()), k + 1);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      y(static_cast<Index>(r)) = y_all[idx[r]];
      Z.row(static_cast<Index>(r)) = X.row(static_cast<Index>(idx[r]));
    }
  };
  VectorXd y;
  MatrixXd Z;
  gather(candidate, y, Z);
  if (spec.filters.winsorize_pct > 0.0) {
    const std::vector<double> raw(y.data(), y.data() + y.size());
    const auto clamped = winsorize(raw, spec.filters.winsorize_pct);
    for (Index r = 0; r < y.size(); ++r) y(r) = clamped[static_cast<std::size_t>(r)];
  }
  if (spec.filters.dfbeta) {
    const auto filter = dfbeta_filter(y, Z, 0, spec.filters.dfbeta_threshold);
    if (!filter.excluded.empty()) {
      std::vector<std::size_t> kept;
      for (const auto r : filter.retained) kept.push_back(candidate[r]);
      for (const auto r : filter.excluded) out.excluded.push_back({key(candidate[r]), "dfbeta"});
      VectorXd y_kept(static_cast<Index>(filter.retained.size()));
      for (std::size_t r = 0; r < filter.retained.size(); ++r) y_kept(static_cast<Index>(r)) = y(static_cast<Index>(filter.retained[r]));
      candidate = std::move(kept);
      MatrixXd Z_kept;
      VectorXd unused;
      gather(candidate, unused, Z_kept);
      y = std::move(y_kept);
      Z = std::move(Z_kept);
    }
  }

  const auto fit = ols_fit(Z, y);
  out.n = static_cast<std::size_t>(fit.n);
  out.r2 = fit.r2;
  out.adj_r2 = fit.adj_r2;
  out.method = spec.inference.method;
  VectorXd se = fit.se, p(k + 1);
  const double df = static_cast<double>(fit.n - fit.p);
  for (Index c = 0; c <= k; ++c) p(c) = se(c) > 0.0 ? t_two_sided_p(fit.beta(c) / se(c), df) : (fit.beta(c) != 0.0 ? 0.0 : 1.0);

  switch (spec.inference.method) {
    case Method::Classical: break;
    case Method::BlockBootstrap: {
      const int L = spec.inference.block_len > 0
                        ? spec.inference.block_len
                        : (spec.dependent.transform == Transform::Level ? 1 : spec.dependent.n - spec.dependent.m + 1);
      const auto boot = block_bootstrap_se(y, Z, L, spec.inference.reps, spec.inference.seed, workers);
      se = boot.se;
      p = boot.p;
      out.block_len = boot.block_len;
      out.reps = boot.reps;
      out.redraws = boot.redraws;
      break;
    }
    case Method::NelsonKim: {
      out.reps = spec.inference.reps;
      for (Index c = 0; c < static_cast<Index>(spec.regressors.size()); ++c) {
        const auto nk = nelson_kim_pvalue(y, Z, c, spec.inference.reps,
                                          derive_seed(spec.inference.seed, stream::kNelsonKim, static_cast<std::uint64_t>(c)), workers);
        p(c) = nk.p;
        out.permutation_fallback = out.permutation_fallback || nk.permutation_fallback;
      }
      break;
    }
  }
  for (Index c = 0; c < k; ++c)
    out.terms.push_back({terms[static_cast<std::size_t>(c)]->label(), fit.beta(c), se(c), p(c)});
  out.terms.push_back({"const", fit.beta(k), se(k), p(k)});
  return out;
}

RegressionTable run_table(const std::string& title, std::span<const RegressionSpec> specs, const SeriesStore& store,
                          int workers) {
  RegressionTable table{title, {}};
  for (const auto& spec : specs) table.columns.push_back(run_regression(spec, store, workers));
  return table;
}

void write_table_csv(std::ostream& out, const RegressionTable& table) {
  out << "column,label,dependent,term,coef,se,p,stars,n,adj_r2\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto& col = table.columns[c];
    for (const auto& t : col.terms)
      out << c + 1 << ',' << csv::escape(col.label) << ',' << csv::escape(col.dependent) << ',' << csv::escape(t.name)
          << ',' << csv::format_number(t.coef) << ',' << csv::format_number(t.se) << ',' << csv::format_number(t.p)
          << ',' << stars(t.p) << ',' << col.n << ',' << csv::format_number(col.adj_r2) << '\n';
  }
}

void write_table_markdown(std::ostream& out, const RegressionTable& table) {
  out << "## " << table.title << "\n\n";
  if (table.columns.empty()) {
    out << "(no columns)\n";
    return;
  }
  std::vector<std::string> names;
  for (const auto& col : table.columns)
    for (const auto& t : col.terms)
      if (t.name != "const" && std::find(names.begin(), names.end(), t.name) == names.end()) names.push_back(t.name);
  names.push_back("const");

  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{""};
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    header.push_back("(" + std::to_string(c + 1) + ") " + table.columns[c].dependent);
  grid.push_back(header);
  for (const auto& name : names) {
    std::vector<std::string> coef{name}, se{""};
    for (const auto& col : table.columns) {
      const auto it = std::find_if(col.terms.begin(), col.terms.end(), [&](const Term& t) { return t.name == name; });
      if (it == col.terms.end()) {
        coef.emplace_back();
        se.emplace_back();
      } else {
        coef.push_back(fixed(it->coef) + stars(it->p));
        se.push_back(is_missing(it->se) ? "" : "(" + fixed(it->se) + ")");
      }
    }
    grid.push_back(coef);
    grid.push_back(se);
  }
  std::vector<std::string> n_row{"N"}, r2_row{"Adj. R2"};
  for (const auto& col : table.columns) {
    n_row.push_back(std::to_string(col.n));
    r2_row.push_back(fixed(col.adj_r2));
  }
  grid.push_back(n_row);
  grid.push_back(r2_row);

  std::vector<std::size_t> width(grid[0].size(), 3);
  for (const auto& row : grid)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  auto emit = [&](const std::vector<std::string>& row) {
    out << '|';
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << ' ' << row[c] << std::string(width[c] - row[c].size(), ' ') << " |";
    }
    out << '\n';
  };
  emit(grid[0]);
  out << '|';
  for (std::size_t c = 0; c < width.size(); ++c) out << ' ' << (c == 0 ? std::string(width[c], '-') : std::string(width[c] - 1, '-') + ":") << " |";
  out << '\n';
  for (std::size_t r = 1; r < grid.size(); ++r) emit(grid[r]);
  out << "\nStandard errors in parentheses. *** p<0.01, ** p<0.05, * p<0.1\n";
}

void write_table_metadata(std::ostream& out, const RegressionTable& table) {
  nlohmann::ordered_json doc;
  doc["title"] = table.title;
  auto cols = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto& col = table.columns[c];
    nlohmann::ordered_json j;
    j["column"] = c + 1;
    j["label"] = col.label;
    j["dependent"] = col.dependent;
    j["method"] = std::string(to_string(col.method));
    j["seed"] = col.seed;
    j["n"] = col.n;
    j["r2"] = col.r2;
    j["adj_r2"] = col.adj_r2;
    if (col.method == Method::BlockBootstrap) {
      j["block_len"] = col.block_len;
      j["reps"] = col.reps;
      j["resampling"] = "pairs, overlapping blocks";
      j["p_value"] = "two-sided normal approximation of coef/se";
      j["rank_deficient_redraws"] = col.redraws;
    } else if (col.method == Method::NelsonKim) {
      j["reps"] = col.reps;
      j["p_value"] = "(r+1)/(R+1), two-sided around the null median";
      j["null_design"] = "AR(1) predictor, controls held fixed";
      j["permutation_fallback"] = col.permutation_fallback;
    } else {
      j["p_value"] = "two-sided Student t";
    }
    auto excluded = nlohmann::ordered_json::array();
    std::size_t missing = 0;
    for (const auto& e : col.excluded) {
      if (e.reason == "missing") ++missing;
      excluded.push_back({{"key", e.key}, {"reason", e.reason}});
    }
    j["dropped_missing"] = missing;
    j["excluded"] = std::move(excluded);
    cols.push_back(std::move(j));
  }
  doc["columns"] = std::move(cols);
  out << doc.dump(2) << '\n';
}

std::vector<CorrelationCell> correlation_table(std::span<const std::string> names, const SeriesStore& store) {
  std::vector<CorrelationCell> out;
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      CorrelationCell cell{names[i], names[j], {}};
      try {
        cell.result = pearson_test(store.daily(names[i]), store.daily(names[j]));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ConstantInput && e.code() != ErrorCode::TooFewRows) throw;
      }
      out.push_back(std::move(cell));
    }
  return out;
}

void write_correlation_csv(std::ostream& out, std::span<const CorrelationCell> cells) {
  out << "x,y,r,p,n\n";
  for (const auto& c : cells)
    out << csv::escape(c.x) << ',' << csv::escape(c.y) << ',' << csv::format_number(c.result.r) << ','
        << csv::format_number(c.result.p) << ',' << c.result.n << '\n';
}

void write_correlation_markdown(std::ostream& out, std::span<const std::string> names,
                                std::span<const CorrelationCell> cells) {
  out << "## Pairwise Pearson correlations\n\n|";
  for (const auto& n : names) out << " | " << n;
  out << " |\n|---";
  for (std::size_t i = 0; i < names.size(); ++i) out << "|---:";
  out << "|\n";
  for (const auto& row : names) {
    out << "| " << row;
    for (const auto& col : names) {
      out << " | ";
      if (row == col) {
        out << "1";
        continue;
      }
      const auto it = std::find_if(cells.begin(), cells.end(), [&](const CorrelationCell& c) {
        return (c.x == row && c.y == col) || (c.x == col && c.y == row);
      });
      if (it != cells.end() && !is_missing(it->result.r)) out << fixed(it->result.r) << stars(it->result.p);
    }
    out << " |\n";
  }
  out << "\n*** p<0.01, ** p<0.05, * p<0.1 (two-sided t test)\n";
}

}  // namespace giffluence

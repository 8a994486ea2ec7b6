#include "giffluence/econ.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "giffluence/error.hpp"
#include "giffluence/parallel.hpp"
#include "giffluence/rng.hpp"

namespace giffluence {

namespace {

using Qr = Eigen::ColPivHouseholderQR<MatrixXd>;

// Residuals at rounding level relative to y.
bool exact_fit(const OlsFit& fit, const Eigen::Ref<const VectorXd>& y) {
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  return fit.residuals.cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

Qr factor(const Eigen::Ref<const MatrixXd>& X) {
  Qr qr(X.rows(), X.cols());
  qr.setThreshold(kRankTolerance);
  qr.compute(X);
  return qr;
}

constexpr int kMaxRedraws = 100;

double sd_of(const VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

MatrixXd drop_column(const Eigen::Ref<const MatrixXd>& X, Index col) {
  MatrixXd out(X.rows(), X.cols() - 1);
  for (Index c = 0, k = 0; c < X.cols(); ++c)
    if (c != col) out.col(k++) = X.col(c);
  return out;
}

}  // namespace

MatrixXd with_intercept(const Eigen::Ref<const MatrixXd>& X) {
  MatrixXd out(X.rows(), X.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(X.cols()) = X;
  return out;
}

std::optional<VectorXd> ols_beta(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y) {
  const auto qr = factor(X);
  if (qr.rank() < X.cols()) return std::nullopt;
  return VectorXd(qr.solve(y));
}

MatrixXd xtx_inverse(const Eigen::Ref<const MatrixXd>& X) {
  const auto qr = factor(X);
  const Index p = X.cols();
  if (qr.rank() < p) throw Error(ErrorCode::RankDeficient, "design matrix is rank deficient");
  const MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(p, p));
  const MatrixXd inner = Rinv * Rinv.transpose();
  return qr.colsPermutation() * inner * qr.colsPermutation().transpose();
}

OlsFit ols_fit(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y) {
  const Index n = X.rows(), p = X.cols();
  if (y.size() != n) throw Error(ErrorCode::SchemaMismatch, "ols: y and X differ in rows");
  if (n <= p)
    throw Error(ErrorCode::TooFewRows, std::to_string(n) + " rows for " + std::to_string(p) + " coefficients");
  const auto qr = factor(X);
  if (qr.rank() < p) throw Error(ErrorCode::RankDeficient, "design matrix is rank deficient");
  OlsFit fit;
  fit.n = n;
  fit.p = p;
  fit.beta = qr.solve(y);
  fit.residuals = y - X * fit.beta;
  fit.rss = fit.residuals.squaredNorm();
  const double tss = (y.array() - y.mean()).square().sum();
  fit.r2 = tss > 0.0 ? 1.0 - fit.rss / tss : 0.0;
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / static_cast<double>(n - p);
  const double s2 = fit.rss / static_cast<double>(n - p);
  fit.se = (xtx_inverse(X).diagonal() * s2).array().sqrt();
  return fit;
}

Listwise drop_missing(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& X) {
  Listwise out;
  for (Index i = 0; i < y.size(); ++i) {
    bool ok = !is_missing(y(i));
    for (Index c = 0; ok && c < X.cols(); ++c) ok = !is_missing(X(i, c));
    (ok ? out.kept : out.dropped).push_back(static_cast<std::size_t>(i));
  }
  const auto m = static_cast<Index>(out.kept.size());
  out.y.resize(m);
  out.X.resize(m, X.cols());
  for (Index r = 0; r < m; ++r) {
    const auto i = static_cast<Index>(out.kept[static_cast<std::size_t>(r)]);
    out.y(r) = y(i);
    out.X.row(r) = X.row(i);
  }
  return out;
}

BootstrapResult block_bootstrap_se(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& X,
                                   int block_len, int reps, std::uint64_t seed, int workers) {
  if (block_len < 1) throw Error(ErrorCode::Config, "block length must be at least 1");
  if (reps < 100) throw Error(ErrorCode::Config, "bootstrap needs at least 100 replicates");
  const Index n = X.rows(), p = X.cols();
  if (n < 2 * static_cast<Index>(block_len))
    throw Error(ErrorCode::TooShort,
                std::to_string(n) + " rows for block length " + std::to_string(block_len));
  const auto full = ols_fit(X, y);

  BootstrapResult out;
  out.block_len = block_len;
  out.reps = reps;
  out.seed = seed;
  out.se = VectorXd::Zero(p);

  if (!exact_fit(full, y)) {
    const Index L = block_len;
    const Index blocks = (n + L - 1) / L;
    MatrixXd betas(reps, p);
    std::vector<int> redraws(static_cast<std::size_t>(reps), 0);
    parallel_chunks(static_cast<std::size_t>(reps), workers, [&](std::size_t, std::size_t begin, std::size_t end) {
      MatrixXd Xb(n, p);
      VectorXd yb(n);
      for (std::size_t r = begin; r < end; ++r) {
        auto engine = make_engine(seed, stream::kBootstrap, r);
        std::uniform_int_distribution<Index> start(0, n - L);
        for (int attempt = 0;; ++attempt) {
          if (attempt > kMaxRedraws)
            throw Error(ErrorCode::Degenerate, "bootstrap replicate stayed rank deficient");
          Index row = 0;
          for (Index b = 0; b < blocks && row < n; ++b) {
            const Index s = start(engine);
            for (Index k = 0; k < L && row < n; ++k, ++row) {
              Xb.row(row) = X.row(s + k);
              yb(row) = y(s + k);
            }
          }
          if (auto beta = ols_beta(Xb, yb)) {
            betas.row(static_cast<Index>(r)) = beta->transpose();
            break;
          }
          ++redraws[r];
        }
      }
    });
    for (Index c = 0; c < p; ++c) out.se(c) = sd_of(betas.col(c));
    for (const auto d : redraws) out.redraws += d;
  }

  out.p.resize(p);
  for (Index c = 0; c < p; ++c) {
    if (out.se(c) > 0.0)
      out.p(c) = normal_two_sided_p(full.beta(c) / out.se(c));
    else
      out.p(c) = full.beta(c) != 0.0 ? 0.0 : 1.0;
  }
  return out;
}

NelsonKimResult nelson_kim_pvalue(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& X,
                                  Index focal, int reps, std::uint64_t seed, int workers) {
  const Index n = X.rows(), p = X.cols();
  if (focal < 0 || focal >= p) throw Error(ErrorCode::Config, "focal column out of range");
  if (reps < 99) throw Error(ErrorCode::Config, "randomized p-values need at least 99 replicates");
  if (n < 20) throw Error(ErrorCode::TooFewRows, std::to_string(n) + " rows, need 20");
  const auto full = ols_fit(X, y);

  NelsonKimResult out;
  out.observed = full.beta(focal);
  out.reps = reps;
  out.seed = seed;

  VectorXd mu0 = VectorXd::Zero(n);
  VectorXd u = y;
  if (p > 1) {
    const MatrixXd X0 = drop_column(X, focal);
    const auto null_fit = ols_fit(X0, y);
    mu0 = X0 * null_fit.beta;
    u = null_fit.residuals;
  }

  const VectorXd x = X.col(focal);
  MatrixXd ar_design(n - 1, 2);
  ar_design.col(0).setOnes();
  ar_design.col(1) = x.head(n - 1);
  const VectorXd x_next = x.tail(n - 1);
  double c = 0.0, rho = 0.0;
  VectorXd eta;
  if (const auto ar = ols_beta(ar_design, x_next)) {
    c = (*ar)(0);
    rho = (*ar)(1);
    eta = x_next - ar_design * *ar;
    out.rho = rho;
  }
  out.permutation_fallback = eta.size() == 0 || !(std::abs(rho) < 1.0);

  std::vector<double> null_betas(static_cast<std::size_t>(reps));
  parallel_chunks(static_cast<std::size_t>(reps), workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    MatrixXd Xs = X;
    VectorXd ys(n), xs(n);
    for (std::size_t r = begin; r < end; ++r) {
      auto engine = make_engine(seed, stream::kNelsonKim, r);
      std::uniform_int_distribution<Index> any_row(0, n - 1);
      std::uniform_int_distribution<Index> pair_row(1, n - 1);
      for (int attempt = 0;; ++attempt) {
        if (attempt > kMaxRedraws) throw Error(ErrorCode::Degenerate, "null replicate stayed rank deficient");
        if (out.permutation_fallback) {
          xs = x;
          for (Index i = n - 1; i > 0; --i) {
            std::uniform_int_distribution<Index> pick(0, i);
            std::swap(xs(i), xs(pick(engine)));
          }
          for (Index i = 0; i < n; ++i) ys(i) = mu0(i) + u(any_row(engine));
        } else {
          xs(0) = x(any_row(engine));
          for (Index k = 1; k < n; ++k) {
            const Index j = pair_row(engine);
            xs(k) = c + rho * xs(k - 1) + eta(j - 1);
            ys(k - 1) = mu0(k - 1) + u(j - 1);
          }
          ys(n - 1) = mu0(n - 1) + u(any_row(engine));
        }
        Xs.col(focal) = xs;
        if (const auto beta = ols_beta(Xs, ys)) {
          null_betas[r] = (*beta)(focal);
          break;
        }
      }
    }
  });

  const double centre = median(null_betas);
  const double observed_gap = std::abs(out.observed - centre);
  int at_least = 0;
  for (const double b : null_betas)
    if (std::abs(b - centre) >= observed_gap) ++at_least;
  out.p = static_cast<double>(at_least + 1) / static_cast<double>(reps + 1);
  return out;
}

Correlation pearson_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::SchemaMismatch, "pearson: series differ in length");
  std::vector<double> a, b;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!is_missing(x[i]) && !is_missing(y[i])) {
      a.push_back(x[i]);
      b.push_back(y[i]);
    }
  const std::size_t n = a.size();
  if (n < 3) throw Error(ErrorCode::TooFewRows, std::to_string(n) + " paired observations, need 3");
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) throw Error(ErrorCode::ConstantInput, "pearson: constant input");
  Correlation out;
  out.n = n;
  out.r = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
  if (n == 3 && std::abs(out.r) == 1.0) {
    out.p = 0.0;
    return out;
  }
  const double denom = 1.0 - out.r * out.r;
  out.p = denom <= 0.0 ? 0.0
                       : t_two_sided_p(out.r * std::sqrt(static_cast<double>(n - 2) / denom), static_cast<double>(n - 2));
  return out;
}

VectorXd vif(const Eigen::Ref<const MatrixXd>& X) {
  const Index k = X.cols();
  if (k < 2) throw Error(ErrorCode::Config, "VIF needs at least two regressors");
  if (X.rows() <= k + 1) throw Error(ErrorCode::TooFewRows, "too few rows for VIF");
  if (factor(with_intercept(X)).rank() < k + 1) throw Error(ErrorCode::RankDeficient, "regressors are collinear");
  VectorXd out(k);
  for (Index c = 0; c < k; ++c) {
    const MatrixXd others = with_intercept(drop_column(X, c));
    const VectorXd target = X.col(c);
    const auto beta = ols_beta(others, target);
    if (!beta) throw Error(ErrorCode::RankDeficient, "regressors are collinear");
    const double rss = (target - others * *beta).squaredNorm();
    const double tss = (target.array() - target.mean()).square().sum();
    const double unexplained = tss > 0.0 ? rss / tss : 0.0;
    if (unexplained < kRankTolerance)
      throw Error(ErrorCode::RankDeficient, "regressor " + std::to_string(c) + " is explained by the others");
    out(c) = 1.0 / unexplained;
  }
  return out;
}

std::vector<double> winsorize(std::span<const double> x, double pct) {
  if (!(pct > 0.0 && pct < 50.0)) throw Error(ErrorCode::Config, "winsorize percentage must lie in (0, 50)");
  std::vector<double> sorted;
  for (const double v : x)
    if (!is_missing(v)) sorted.push_back(v);
  std::vector<double> out(x.begin(), x.end());
  if (sorted.empty()) return out;
  std::sort(sorted.begin(), sorted.end());
  const double lo = percentile_nearest_rank(sorted, pct);
  const double hi = percentile_nearest_rank(sorted, 100.0 - pct);
  for (auto& v : out)
    if (!is_missing(v)) v = std::clamp(v, lo, hi);
  return out;
}

DfbetaResult dfbeta_filter(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& X, Index focal,
                           std::optional<double> threshold) {
  if (focal < 0 || focal >= X.cols()) throw Error(ErrorCode::Config, "focal column out of range");
  const auto fit = ols_fit(X, y);
  const MatrixXd inv = xtx_inverse(X);
  const Index n = X.rows();
  DfbetaResult out;
  out.threshold = threshold.value_or(2.0 / std::sqrt(static_cast<double>(n)));
  out.dfbeta.resize(static_cast<std::size_t>(n));
  const double se = fit.se(focal);
  const bool exact = exact_fit(fit, y);
  const double inf = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const VectorXd w = inv * X.row(i).transpose();
    const double h = X.row(i).dot(w);
    const double e = fit.residuals(i);
    double value;
    if (exact) {
      value = 0.0;
    } else if (1.0 - h <= 1e-12) {
      value = inf;
    } else {
      const double change = w(focal) * e / (1.0 - h);
      value = se > 0.0 ? change / se : (change == 0.0 ? 0.0 : std::copysign(inf, change));
    }
    out.dfbeta[static_cast<std::size_t>(i)] = value;
    (std::abs(value) > out.threshold ? out.excluded : out.retained).push_back(static_cast<std::size_t>(i));
  }
  if (!out.excluded.empty()) {
    MatrixXd kept(static_cast<Index>(out.retained.size()), X.cols());
    for (std::size_t r = 0; r < out.retained.size(); ++r)
      kept.row(static_cast<Index>(r)) = X.row(static_cast<Index>(out.retained[r]));
    if (kept.rows() <= kept.cols() || factor(kept).rank() < kept.cols())
      throw Error(ErrorCode::RankDeficient, "design is rank deficient after DFBETA exclusion");
  }
  return out;
}

}  // namespace giffluence

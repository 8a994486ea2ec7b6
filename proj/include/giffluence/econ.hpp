#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "giffluence/stats.hpp"

namespace giffluence {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Least-squares fit. `X` carries its own intercept column when one is wanted;
/// R² is centred, so it assumes one is present.
struct OlsFit {
  VectorXd beta;
  VectorXd se;  // classical, sqrt(diag(s² (X'X)^-1)) with s² = RSS / (n - p)
  VectorXd residuals;
  double rss = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  Index n = 0;
  Index p = 0;

  double t(Index k) const { return se(k) > 0.0 ? beta(k) / se(k) : kMissing; }
};

/// Relative rank tolerance used by every fit.
inline constexpr double kRankTolerance = 1e-10;

/// Throws Error{TooFewRows} unless n > p, Error{RankDeficient}.
OlsFit ols_fit(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y);
/// Coefficients only; nullopt when X is rank deficient.
std::optional<VectorXd> ols_beta(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y);
/// (X'X)^-1 for a full-rank X. Throws Error{RankDeficient}.
MatrixXd xtx_inverse(const Eigen::Ref<const MatrixXd>& X);

/// [1 | X].
MatrixXd with_intercept(const Eigen::Ref<const MatrixXd>& X);

/// Rows of (y, X) with no missing value, plus the original positions kept and dropped.
struct Listwise {
  VectorXd y;
  MatrixXd X;
  std::vector<std::size_t> kept;
  std::vector<std::size_t> dropped;
};
Listwise drop_missing(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& X);

struct BootstrapResult {
  VectorXd se;
  VectorXd p;  // two-sided normal approximation of beta / se
  int block_len = 1;
  int reps = 0;
  std::uint64_t seed = 0;
  int redraws = 0;  // rank-deficient replicates drawn again
};

/// Moving-block pairs bootstrap. Each replicate concatenates ceil(n / L) blocks
/// of L consecutive rows, block starts uniform on [0, n - L], truncated to n rows.
/// Throws Error{TooShort} when n < 2L, Error{Config} for reps < 100 or L < 1,
/// Error{Degenerate} when a replicate stays rank deficient after 100 redraws.
BootstrapResult block_bootstrap_se(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& X,
                                   int block_len, int reps, std::uint64_t seed, int workers = 1);

struct NelsonKimResult {
  double p = kMissing;
  double observed = kMissing;
  double rho = kMissing;  // AR(1) slope of the focal regressor
  int reps = 0;
  std::uint64_t seed = 0;
  bool permutation_fallback = false;  // |rho| >= 1, focal regressor permuted instead
};

/// Randomized p-value for column `focal` of X under the no-predictability null.
/// The focal column follows a fitted AR(1) with intercept; y is rebuilt as the
/// null fitted mean (all other columns held fixed) plus resampled residuals.
/// Each y residual is drawn jointly with the next row's AR innovation.
/// p = (r + 1) / (R + 1), r counting replicates at least as far from the null
/// median as the observed coefficient. Throws Error{TooFewRows} under 20 rows.
NelsonKimResult nelson_kim_pvalue(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& X,
                                  Index focal, int reps, std::uint64_t seed, int workers = 1);

struct Correlation {
  double r = kMissing;
  double p = kMissing;
  std::size_t n = 0;
};

/// Pearson r over pairs with both values present; p from Student t with n-2 df.
/// Throws Error{TooFewRows} under 3 pairs, Error{ConstantInput}.
Correlation pearson_test(std::span<const double> x, std::span<const double> y);

/// 1 / (1 - R²_k), R²_k from regressing column k on the remaining columns plus
/// an intercept. X holds regressors only. Throws Error{RankDeficient}, Error{TooFewRows}.
VectorXd vif(const Eigen::Ref<const MatrixXd>& X);

/// Clamps to the nearest-rank pct-th and (100 - pct)-th percentiles of the
/// present values. Missing values stay missing. Throws Error{Config} unless 0 < pct < 50.
std::vector<double> winsorize(std::span<const double> x, double pct);

struct DfbetaResult {
  std::vector<double> dfbeta;  // per row, (beta - beta_(-i)) / se(beta); infinite at leverage 1, zero on an exact fit
  std::vector<std::size_t> retained;
  std::vector<std::size_t> excluded;
  double threshold = kMissing;
};

/// Single pass against the full-sample fit; threshold defaults to 2 / sqrt(n).
/// Throws Error{RankDeficient} if the retained rows no longer identify the model.
DfbetaResult dfbeta_filter(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& X, Index focal,
                           std::optional<double> threshold = std::nullopt);

}  // namespace giffluence

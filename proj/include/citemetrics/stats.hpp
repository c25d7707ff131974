#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace citemetrics::stats {

double mean(std::span<const double> values);

/// Linear interpolation between order statistics: position (n - 1) * q.
/// `sorted` must be ascending and nonempty.
double quantile_linear(std::span<const double> sorted, double q);

/// Midrank percentiles 100 * (rank - 0.5) / n; ties share the average rank.
std::vector<double> percentile_rank(std::span<const double> values);

/// Pearson correlation of midranks.
double spearman(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of a Student t statistic; NaN unless df > 0.
double t_two_sided_p(double t, double df);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;       // NaN when y has no variance
  double slope_se = 0.0;
  double p_value = 0.0;  // NaN when n <= 2
  std::size_t n = 0;
};

/// Ordinary least squares y = a + b x. Throws NumericError when x is constant.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct Bin {
  double x_mean = 0.0;
  double y_mean = 0.0;
  std::size_t n = 0;
};

struct BinnedTrend {
  std::vector<Bin> bins;
  LineFit fit;  // over the bin means
};

/// Equal-population bins by x (stable order on ties), per-bin means, and an
/// OLS line through the bin means. Throws NumericError for constant x and
/// UsageError for mismatched lengths or bins < 2.
BinnedTrend binned_trend(std::span<const double> x, std::span<const double> y, std::size_t bins);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

using Statistic = std::function<double(std::span<const double>)>;

/// Percentile bootstrap. Resample b draws from a stream seeded by
/// (seed, b), so the result does not depend on thread count.
Interval bootstrap_ci(std::span<const double> values, const Statistic& statistic, int resamples, double level,
                      std::uint64_t seed);
Interval bootstrap_ci_serial(std::span<const double> values, const Statistic& statistic, int resamples,
                             double level, std::uint64_t seed);

/// Mann-Whitney AUC: P(pos > neg) + 0.5 P(tie), via midranks.
double roc_auc(std::span<const double> scores_pos, std::span<const double> scores_neg);

}  // namespace citemetrics::stats

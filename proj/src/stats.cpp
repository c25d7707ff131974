#include "citemetrics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "citemetrics/error.hpp"
#include "citemetrics/random.hpp"

namespace citemetrics::stats {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Average 1-based ranks with ties sharing the mean rank.
std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

void check_bootstrap_args(std::span<const double> values, int resamples, double level) {
  if (values.size() < 2) throw UsageError("bootstrap needs at least 2 values");
  if (resamples < 100) throw UsageError("bootstrap needs at least 100 resamples");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("bootstrap level must be in (0,1)");
}

double one_replicate(std::span<const double> values, const Statistic& statistic, std::uint64_t seed, int b,
                     std::vector<double>& buf) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
  buf.resize(values.size());
  for (auto& v : buf) v = values[rng.below(values.size())];
  return statistic(buf);
}

Interval interval_from(std::vector<double> reps, double level) {
  std::sort(reps.begin(), reps.end());
  const double alpha = 1.0 - level;
  return {quantile_linear(reps, alpha / 2.0), quantile_linear(reps, 1.0 - alpha / 2.0)};
}

}  // namespace

double mean(std::span<const double> values) {
  if (values.empty()) return kNaN;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double quantile_linear(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw UsageError("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> percentile_rank(std::span<const double> values) {
  auto ranks = midranks(values);
  const double n = static_cast<double>(values.size());
  for (double& r : ranks) r = 100.0 * (r - 0.5) / n;
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("spearman needs two equal samples of size >= 2");
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  const double mx = mean(rx);
  const double my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

double t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) return kNaN;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("fit_line: length mismatch");
  if (x.size() < 2) throw NumericError("fit_line: need at least 2 points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw NumericError("fit_line: x is constant");

  LineFit f;
  f.n = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    rss += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - rss / syy : kNaN;
  const double df = static_cast<double>(f.n) - 2.0;
  if (df > 0.0) {
    f.slope_se = std::sqrt(rss / df / sxx);
    if (f.slope_se > 0.0) {
      f.p_value = t_two_sided_p(f.slope / f.slope_se, df);
    } else {
      f.p_value = f.slope == 0.0 ? 1.0 : 0.0;
    }
  } else {
    f.slope_se = kNaN;
    f.p_value = kNaN;
  }
  return f;
}

BinnedTrend binned_trend(std::span<const double> x, std::span<const double> y, std::size_t bins) {
  if (x.size() != y.size()) throw UsageError("binned_trend: length mismatch");
  if (bins < 2) throw UsageError("binned_trend: need at least 2 bins");
  if (x.size() < bins) throw NumericError("binned_trend: fewer observations than bins");
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) {
    throw NumericError("binned_trend: x is constant");
  }

  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  BinnedTrend out;
  const std::size_t n = x.size();
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t lo = b * n / bins;
    const std::size_t hi = (b + 1) * n / bins;
    Bin bin;
    for (std::size_t i = lo; i < hi; ++i) {
      bin.x_mean += x[order[i]];
      bin.y_mean += y[order[i]];
    }
    bin.n = hi - lo;
    bin.x_mean /= static_cast<double>(bin.n);
    bin.y_mean /= static_cast<double>(bin.n);
    out.bins.push_back(bin);
  }
  std::vector<double> bx, by;
  for (const auto& b : out.bins) {
    bx.push_back(b.x_mean);
    by.push_back(b.y_mean);
  }
  out.fit = fit_line(bx, by);
  return out;
}

Interval bootstrap_ci(std::span<const double> values, const Statistic& statistic, int resamples, double level,
                      std::uint64_t seed) {
  check_bootstrap_args(values, resamples, level);
  std::vector<double> reps(static_cast<std::size_t>(resamples));
#pragma omp parallel
  {
    std::vector<double> buf;
#pragma omp for schedule(static)
    for (int b = 0; b < resamples; ++b) {
      reps[static_cast<std::size_t>(b)] = one_replicate(values, statistic, seed, b, buf);
    }
  }
  return interval_from(std::move(reps), level);
}

Interval bootstrap_ci_serial(std::span<const double> values, const Statistic& statistic, int resamples,
                             double level, std::uint64_t seed) {
  check_bootstrap_args(values, resamples, level);
  std::vector<double> reps;
  std::vector<double> buf;
  for (int b = 0; b < resamples; ++b) reps.push_back(one_replicate(values, statistic, seed, b, buf));
  return interval_from(std::move(reps), level);
}

double roc_auc(std::span<const double> scores_pos, std::span<const double> scores_neg) {
  if (scores_pos.empty() || scores_neg.empty()) throw UsageError("roc_auc needs nonempty positive and negative sets");
  std::vector<double> all(scores_pos.begin(), scores_pos.end());
  all.insert(all.end(), scores_neg.begin(), scores_neg.end());
  const auto ranks = midranks(all);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < scores_pos.size(); ++i) rank_sum += ranks[i];
  const double np = static_cast<double>(scores_pos.size());
  const double nn = static_cast<double>(scores_neg.size());
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

}  // namespace citemetrics::stats

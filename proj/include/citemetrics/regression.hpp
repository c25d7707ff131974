#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "citemetrics/csv.hpp"
#include "citemetrics/metric_table.hpp"

namespace citemetrics::stats {

/// A regression model over named columns.
///
/// Column references may carry a `pct:` prefix, meaning the midrank
/// percentile of that column computed within the estimation sample (after
/// the filter and listwise deletion).
struct RegressionSpec {
  std::string name;
  std::string response;
  std::vector<std::string> regressors;
  std::vector<std::string> factors;  // fixed effects, one dummy per level minus the first
  std::string filter;                // e.g. "d_index > 0 && year >= 1990"; empty keeps all rows
};

/// Parses either a single model object or {"models": [...]}.
std::vector<RegressionSpec> parse_regression_specs(std::string_view json_text);

/// Column store fed to the solver. Missing numeric values are NaN; missing
/// factor levels are empty strings. Both lead to listwise deletion.
struct Frame {
  std::size_t rows = 0;
  std::map<std::string, std::vector<double>, std::less<>> numeric;
  std::map<std::string, std::vector<std::string>, std::less<>> factors;
};

/// Pulls every column `spec` mentions (including filter columns) out of a
/// metric table.
Frame frame_from_table(const MetricTable& table, const std::vector<RegressionSpec>& specs);

struct Design {
  std::vector<std::string> names;             // "(intercept)", regressors, "factor=level" dummies
  std::vector<std::vector<double>> columns;   // column-major
  std::vector<double> y;
  std::size_t n_regressors = 0;               // columns 1..n_regressors are the named regressors
};

/// Applies filter, listwise deletion and percentile transforms, then
/// dummy-encodes factors (first sorted level dropped).
Design build_design(const RegressionSpec& spec, const Frame& frame);

struct Coefficient {
  std::string term;
  double estimate = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p = 0.0;
};

struct RegressionFit {
  std::vector<Coefficient> coefficients;  // same order as Design::names
  std::vector<double> residuals;
  double r2 = 0.0;
  std::size_t n = 0;
};

/// Least squares via column-pivoted Householder QR with classical
/// (homoskedastic) standard errors. Throws NumericError naming the collinear
/// columns when the design is rank deficient, or when n <= parameters.
RegressionFit ols_fixed_effects(const RegressionSpec& spec, const Frame& frame);
RegressionFit ols(const Design& design);

/// Slopes of the named regressors after sweeping out every factor by
/// alternating projections. Independent route to the same slopes as the
/// dummy-encoded fit.
std::vector<double> within_slopes(const RegressionSpec& spec, const Frame& frame);

/// Table layout: one column per model; per regressor a cell holding the
/// estimate, significance stars and the standard error in parentheses; then
/// fixed-effect indicators, observations and R-squared.
void write_regression_table(std::ostream& out, const std::vector<RegressionSpec>& specs,
                            const std::vector<RegressionFit>& fits, const Provenance* provenance = nullptr);

}  // namespace citemetrics::stats

#include "citemetrics/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include <Eigen/Dense>
#include <json.hpp>

#include "citemetrics/error.hpp"
#include "citemetrics/stats.hpp"

namespace citemetrics::stats {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::string_view kPct = "pct:";

struct Condition {
  std::string column;
  std::string op;
  double value = 0.0;

  bool holds(double x) const {
    if (std::isnan(x)) return false;
    if (op == "<") return x < value;
    if (op == "<=") return x <= value;
    if (op == ">") return x > value;
    if (op == ">=") return x >= value;
    if (op == "==") return x == value;
    return x != value;
  }
};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<Condition> parse_filter(std::string_view text) {
  std::vector<Condition> out;
  std::string rest(text);
  for (const char* sep : {" and ", " AND "}) {
    for (auto pos = rest.find(sep); pos != std::string::npos; pos = rest.find(sep)) rest.replace(pos, std::string_view(sep).size(), "&&");
  }
  std::size_t start = 0;
  while (start <= rest.size()) {
    auto end = rest.find("&&", start);
    const std::string clause = trim(std::string_view(rest).substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (!clause.empty()) {
      Condition c;
      std::size_t op_pos = std::string::npos;
      for (const char* op : {"<=", ">=", "==", "!=", "<", ">"}) {
        op_pos = clause.find(op);
        if (op_pos != std::string::npos) {
          c.op = op;
          break;
        }
      }
      if (op_pos == std::string::npos) throw UsageError("filter clause without comparison: '" + clause + "'");
      c.column = trim(std::string_view(clause).substr(0, op_pos));
      const std::string value = trim(std::string_view(clause).substr(op_pos + c.op.size()));
      try {
        std::size_t used = 0;
        c.value = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
      } catch (const std::logic_error&) {
        throw UsageError("filter value is not a number: '" + value + "'");
      }
      if (c.column.empty()) throw UsageError("filter clause without column: '" + clause + "'");
      out.push_back(std::move(c));
    }
    if (end == std::string::npos) break;
    start = end + 2;
  }
  return out;
}

std::string_view base_column(std::string_view ref) {
  return ref.starts_with(kPct) ? ref.substr(kPct.size()) : ref;
}

const std::vector<double>& numeric_column(const Frame& frame, std::string_view name) {
  auto it = frame.numeric.find(base_column(name));
  if (it == frame.numeric.end()) throw UsageError("regression column '" + std::string(name) + "' not in frame");
  return it->second;
}

const std::vector<std::string>& factor_column(const Frame& frame, std::string_view name) {
  auto it = frame.factors.find(name);
  if (it == frame.factors.end()) throw UsageError("factor '" + std::string(name) + "' not in frame");
  return it->second;
}

struct Prepared {
  Design design;
  std::vector<std::vector<std::size_t>> factor_codes;  // per factor, level code per kept row
  std::vector<std::size_t> factor_levels;
};

Prepared prepare(const RegressionSpec& spec, const Frame& frame) {
  if (spec.response.empty()) throw UsageError("regression spec without response");
  const auto conditions = parse_filter(spec.filter);

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < frame.rows; ++i) {
    bool ok = true;
    for (const auto& c : conditions) ok = ok && c.holds(numeric_column(frame, c.column)[i]);
    ok = ok && !std::isnan(numeric_column(frame, spec.response)[i]);
    for (const auto& r : spec.regressors) ok = ok && !std::isnan(numeric_column(frame, r)[i]);
    for (const auto& f : spec.factors) ok = ok && !factor_column(frame, f)[i].empty();
    if (ok) kept.push_back(i);
  }

  auto extract = [&](const std::string& name) {
    const auto& col = numeric_column(frame, name);
    std::vector<double> v;
    v.reserve(kept.size());
    for (std::size_t i : kept) v.push_back(col[i]);
    if (std::string_view(name).starts_with(kPct) && !v.empty()) v = percentile_rank(v);
    return v;
  };

  Prepared out;
  Design& d = out.design;
  d.y = extract(spec.response);
  d.names.push_back("(intercept)");
  d.columns.emplace_back(kept.size(), 1.0);
  for (const auto& r : spec.regressors) {
    d.names.push_back(r);
    d.columns.push_back(extract(r));
  }
  d.n_regressors = spec.regressors.size();

  for (const auto& f : spec.factors) {
    const auto& col = factor_column(frame, f);
    std::set<std::string> level_set;
    for (std::size_t i : kept) level_set.insert(col[i]);
    const std::vector<std::string> levels(level_set.begin(), level_set.end());
    std::vector<std::size_t> codes;
    codes.reserve(kept.size());
    for (std::size_t i : kept) {
      codes.push_back(static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), col[i]) - levels.begin()));
    }
    for (std::size_t l = 1; l < levels.size(); ++l) {
      d.names.push_back(f + "=" + levels[l]);
      std::vector<double> dummy(kept.size(), 0.0);
      for (std::size_t i = 0; i < kept.size(); ++i) dummy[i] = codes[i] == l ? 1.0 : 0.0;
      d.columns.push_back(std::move(dummy));
    }
    out.factor_codes.push_back(std::move(codes));
    out.factor_levels.push_back(levels.size());
  }
  return out;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& columns, std::size_t rows) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (std::size_t i = 0; i < rows; ++i) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns[j][i];
  }
  return x;
}

void demean_by_groups(std::vector<double>& v, const std::vector<std::size_t>& codes, std::size_t levels) {
  std::vector<double> sum(levels, 0.0);
  std::vector<std::size_t> count(levels, 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    sum[codes[i]] += v[i];
    ++count[codes[i]];
  }
  for (std::size_t l = 0; l < levels; ++l) {
    if (count[l]) sum[l] /= static_cast<double>(count[l]);
  }
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= sum[codes[i]];
}

std::string stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

}  // namespace

std::vector<RegressionSpec> parse_regression_specs(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("regression spec is not valid JSON: ") + e.what());
  }
  auto one = [](const nlohmann::json& m, std::size_t index) {
    RegressionSpec s;
    try {
      s.name = m.value("name", "Model " + std::to_string(index + 1));
      s.response = m.at("response").get<std::string>();
      s.regressors = m.value("regressors", std::vector<std::string>{});
      s.factors = m.value("factors", std::vector<std::string>{});
      s.filter = m.value("filter", std::string{});
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(std::string("bad regression spec: ") + e.what());
    }
    return s;
  };
  std::vector<RegressionSpec> specs;
  if (j.is_object() && j.contains("models")) {
    for (std::size_t i = 0; i < j["models"].size(); ++i) specs.push_back(one(j["models"][i], i));
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) specs.push_back(one(j[i], i));
  } else {
    specs.push_back(one(j, 0));
  }
  if (specs.empty()) throw UsageError("regression spec lists no models");
  return specs;
}

Frame frame_from_table(const MetricTable& table, const std::vector<RegressionSpec>& specs) {
  Frame f;
  f.rows = table.size();
  auto add_numeric = [&](std::string_view ref) {
    const std::string base(base_column(ref));
    if (f.numeric.contains(base)) return;
    std::vector<double> col;
    col.reserve(table.size());
    for (const auto& v : table.numeric(base)) col.push_back(v ? *v : kNaN);
    f.numeric.emplace(base, std::move(col));
  };
  for (const auto& s : specs) {
    add_numeric(s.response);
    for (const auto& r : s.regressors) add_numeric(r);
    for (const auto& c : parse_filter(s.filter)) add_numeric(c.column);
    for (const auto& name : s.factors) {
      if (f.factors.contains(name)) continue;
      std::vector<std::string> col;
      col.reserve(table.size());
      for (auto& v : table.factor(name)) col.push_back(v ? std::move(*v) : std::string{});
      f.factors.emplace(name, std::move(col));
    }
  }
  return f;
}

Design build_design(const RegressionSpec& spec, const Frame& frame) { return prepare(spec, frame).design; }

RegressionFit ols(const Design& design) {
  const std::size_t n = design.y.size();
  const std::size_t p = design.columns.size();
  if (n <= p) {
    throw NumericError("regression needs more observations (" + std::to_string(n) + ") than parameters (" +
                       std::to_string(p) + ")");
  }
  const Eigen::MatrixXd x = to_matrix(design.columns, n);
  const Eigen::Map<const Eigen::VectorXd> y(design.y.data(), static_cast<Eigen::Index>(n));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  const auto rank = static_cast<std::size_t>(qr.rank());
  if (rank < p) {
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (std::size_t i = rank; i < p; ++i) {
      if (!names.empty()) names += ", ";
      names += design.names[static_cast<std::size_t>(perm(static_cast<Eigen::Index>(i)))];
    }
    throw NumericError("rank-deficient design; collinear columns: " + names);
  }
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - x * beta;
  const double rss = resid.squaredNorm();
  const double df = static_cast<double>(n - p);
  const double sigma2 = rss / df;

  const auto pi = static_cast<Eigen::Index>(p);
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(pi, pi).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(pi, pi));
  const Eigen::VectorXd var_perm = (r_inv * r_inv.transpose()).diagonal();
  const auto& perm = qr.colsPermutation().indices();

  RegressionFit fit;
  fit.n = n;
  fit.coefficients.resize(p);
  for (Eigen::Index i = 0; i < pi; ++i) {
    auto& c = fit.coefficients[static_cast<std::size_t>(perm(i))];
    c.se = std::sqrt(sigma2 * var_perm(i));
  }
  for (std::size_t j = 0; j < p; ++j) {
    auto& c = fit.coefficients[j];
    c.term = design.names[j];
    c.estimate = beta(static_cast<Eigen::Index>(j));
    if (c.se > 0.0) {
      c.t = c.estimate / c.se;
      c.p = t_two_sided_p(c.t, df);
    } else {
      c.t = c.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
      c.p = c.estimate == 0.0 ? 1.0 : 0.0;
    }
  }
  fit.residuals.assign(resid.data(), resid.data() + resid.size());
  const double my = y.mean();
  const double tss = (y.array() - my).square().sum();
  fit.r2 = tss > 0.0 ? 1.0 - rss / tss : kNaN;
  return fit;
}

RegressionFit ols_fixed_effects(const RegressionSpec& spec, const Frame& frame) {
  return ols(prepare(spec, frame).design);
}

std::vector<double> within_slopes(const RegressionSpec& spec, const Frame& frame) {
  Prepared prep = prepare(spec, frame);
  Design& d = prep.design;
  const std::size_t n = d.y.size();
  const std::size_t k = d.n_regressors;
  if (k == 0) return {};
  if (n <= k) throw NumericError("within fit needs more observations than regressors");

  std::vector<std::vector<double>*> vars{&d.y};
  for (std::size_t j = 1; j <= k; ++j) vars.push_back(&d.columns[j]);

  if (prep.factor_codes.empty()) {
    const std::vector<std::size_t> codes(n, 0);
    for (auto* v : vars) demean_by_groups(*v, codes, 1);
  } else {
    for (auto* v : vars) {
      double scale = 0.0;
      for (double x : *v) scale = std::max(scale, std::fabs(x));
      const double tol = 1e-15 * std::max(scale, 1.0);
      for (int iter = 0; iter < 100000; ++iter) {
        const std::vector<double> before = *v;
        for (std::size_t f = 0; f < prep.factor_codes.size(); ++f) {
          demean_by_groups(*v, prep.factor_codes[f], prep.factor_levels[f]);
        }
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::fabs((*v)[i] - before[i]));
        if (change <= tol) break;
      }
    }
  }

  std::vector<std::vector<double>> cols(d.columns.begin() + 1, d.columns.begin() + 1 + static_cast<std::ptrdiff_t>(k));
  const Eigen::MatrixXd x = to_matrix(cols, n);
  const Eigen::Map<const Eigen::VectorXd> y(d.y.data(), static_cast<Eigen::Index>(n));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (static_cast<std::size_t>(qr.rank()) < k) throw NumericError("within fit: regressors collinear with fixed effects");
  const Eigen::VectorXd beta = qr.solve(y);
  return {beta.data(), beta.data() + beta.size()};
}

void write_regression_table(std::ostream& out, const std::vector<RegressionSpec>& specs,
                            const std::vector<RegressionFit>& fits, const Provenance* provenance) {
  if (specs.size() != fits.size()) throw UsageError("regression table: spec/fit count mismatch");
  CsvWriter w(out, provenance);
  std::vector<std::string> header{"term"};
  for (const auto& s : specs) header.push_back(s.name);
  w.header(header);

  std::vector<std::string> terms;
  std::vector<std::string> factors;
  for (const auto& s : specs) {
    for (const auto& r : s.regressors) {
      if (std::find(terms.begin(), terms.end(), r) == terms.end()) terms.push_back(r);
    }
    for (const auto& f : s.factors) {
      if (std::find(factors.begin(), factors.end(), f) == factors.end()) factors.push_back(f);
    }
  }
  for (const auto& term : terms) {
    std::vector<std::string> row{term};
    for (const auto& fit : fits) {
      auto it = std::find_if(fit.coefficients.begin(), fit.coefficients.end(),
                             [&](const Coefficient& c) { return c.term == term; });
      row.push_back(it == fit.coefficients.end()
                        ? std::string{}
                        : format_real(it->estimate) + stars(it->p) + " (" + format_real(it->se) + ")");
    }
    w.row(row);
  }
  for (const auto& f : factors) {
    std::vector<std::string> row{f + " FE"};
    for (const auto& s : specs) {
      row.push_back(std::find(s.factors.begin(), s.factors.end(), f) != s.factors.end() ? "Yes" : "No");
    }
    w.row(row);
  }
  std::vector<std::string> obs{"Observations"};
  std::vector<std::string> r2{"R-squared"};
  for (const auto& fit : fits) {
    obs.push_back(std::to_string(fit.n));
    r2.push_back(format_real(fit.r2));
  }
  w.row(obs);
  w.row(r2);
}

}  // namespace citemetrics::stats

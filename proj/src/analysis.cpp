#include "mostv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mostv/errors.hpp"

namespace mostv {

double ans_accuracy(double n1, double n2, double w) {
  if (!(w > 0)) throw DomainError("weber fraction must be positive");
  if (n1 < n2 || n2 <= 0) throw DomainError("expects n1 >= n2 > 0");
  const double z = (n1 - n2) / (w * std::sqrt(2.0) * std::sqrt(n1 * n1 + n2 * n2));
  return 1.0 - 0.5 * std::erfc(z);
}

namespace {

constexpr double kWeberLo = 1e-6;
constexpr double kWeberHi = 10.0;

double weber_sse(const std::vector<WeberPoint>& points, double w) {
  double sse = 0;
  for (const auto& p : points) {
    const double r = ans_accuracy(p.n1, p.n2, w) - p.accuracy;
    sse += r * r;
  }
  return sse;
}

// Golden-section minimum of f on [lo, hi].
template <class F>
double golden_min(F f, double lo, double hi, int iterations = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations && (b - a) > 1e-14 * std::max(1.0, a); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

}  // namespace

WeberFit fit_weber(const std::vector<WeberPoint>& points) {
  if (points.size() < 2) throw FitError("weber fit needs at least two points");
  for (const auto& p : points) {
    if (!(p.n1 >= p.n2) || !(p.n2 > 0)) throw FitError("invalid counts in weber fit");
    if (!std::isfinite(p.accuracy) || p.accuracy < 0.0 || p.accuracy > 1.0)
      throw FitError("accuracies must lie in [0, 1]");
  }

  // Coarse log-spaced scan to bracket the minimum, then golden refinement.
  const int grid = 512;
  double best_w = kWeberLo;
  double best_sse = weber_sse(points, kWeberLo);
  const double log_lo = std::log(kWeberLo), log_hi = std::log(kWeberHi);
  for (int i = 1; i <= grid; ++i) {
    const double w = std::exp(log_lo + (log_hi - log_lo) * i / grid);
    const double sse = weber_sse(points, w);
    if (sse < best_sse) {
      best_sse = sse;
      best_w = w;
    }
  }
  const double step = (log_hi - log_lo) / grid;
  const double lo = std::max(kWeberLo, best_w * std::exp(-step));
  const double hi = std::min(kWeberHi, best_w * std::exp(step));
  const double w = golden_min([&](double v) { return weber_sse(points, v); }, lo, hi);

  WeberFit fit;
  fit.w = w;
  const double sse = weber_sse(points, w);
  double mean = 0;
  for (const auto& p : points) mean += p.accuracy;
  mean /= static_cast<double>(points.size());
  double sstot = 0;
  for (const auto& p : points) sstot += (p.accuracy - mean) * (p.accuracy - mean);
  if (sstot > 1e-15) {
    fit.r_squared = 1.0 - sse / sstot;
  } else if (sse <= 1e-12) {
    fit.r_squared = 1.0;
  } else {
    fit.r_squared = std::numeric_limits<double>::quiet_NaN();
    fit.r_squared_defined = false;
  }

  double r_min = 10, r_max = 0;
  for (const auto& p : points) {
    r_min = std::min(r_min, p.n1 / p.n2);
    r_max = std::max(r_max, p.n1 / p.n2);
  }
  for (int i = 0; i <= 100; ++i) {
    const double r = r_min + (r_max - r_min) * i / 100.0;
    fit.curve.emplace_back(r, ans_accuracy(r, 1.0, w));
  }
  return fit;
}

std::vector<AccuracyPoint> aggregate_accuracy(const std::vector<TrialResult>& trials,
                                              GroupBy group_by) {
  if (trials.empty()) throw EmptyDataError("no trials to aggregate");
  const bool by_model = static_cast<unsigned>(group_by) & static_cast<unsigned>(GroupBy::Model);
  const bool by_type = static_cast<unsigned>(group_by) & static_cast<unsigned>(GroupBy::Type);
  const bool by_ratio = static_cast<unsigned>(group_by) & static_cast<unsigned>(GroupBy::Ratio);

  struct Cell {
    int64_t correct = 0;
    int64_t total = 0;
  };
  std::map<std::tuple<std::string, int, int>, Cell> cells;
  for (const auto& t : trials) {
    auto key = std::make_tuple(by_model ? t.model_id : std::string(),
                               by_type ? static_cast<int>(t.image_type) : -1,
                               by_ratio ? t.ratio.small : -1);
    Cell& c = cells[key];
    c.total += 1;
    c.correct += t.correct ? 1 : 0;
  }

  std::vector<AccuracyPoint> out;
  for (const auto& [key, cell] : cells) {
    AccuracyPoint p;
    p.model_id = by_model ? std::get<0>(key) : "all";
    p.image_type = by_type ? to_string(static_cast<ImageType>(std::get<1>(key))) : "all";
    if (by_ratio) p.ratio = RatioPair{std::get<2>(key), std::get<2>(key) + 1};
    p.mean_accuracy = static_cast<double>(cell.correct) / static_cast<double>(cell.total);
    p.n_trials = cell.total;
    out.push_back(std::move(p));
  }
  return out;
}

ExclusionResult exclude_invariant_cells(const std::vector<TrialResult>& trials,
                                        double threshold) {
  if (trials.empty()) throw EmptyDataError("no trials given");
  struct Cell {
    int64_t correct = 0;
    int64_t total = 0;
  };
  std::map<std::pair<int, int>, Cell> cells;  // (type, duration)
  for (const auto& t : trials) {
    Cell& c = cells[{static_cast<int>(t.image_type), t.duration_level}];
    c.total += 1;
    c.correct += t.correct ? 1 : 0;
  }

  std::set<std::pair<int, int>> dropped;
  ExclusionResult result;
  for (const auto& [key, cell] : cells) {
    const double acc = static_cast<double>(cell.correct) / static_cast<double>(cell.total);
    if (acc >= threshold) {
      dropped.insert(key);
      result.excluded.push_back(
          {static_cast<ImageType>(key.first), key.second, acc});
    }
  }
  for (const auto& t : trials)
    if (!dropped.count({static_cast<int>(t.image_type), t.duration_level}))
      result.retained.push_back(t);
  if (result.retained.empty())
    throw EmptyDataError("all cells were response-invariant at this threshold");
  return result;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return ".";
  return "";
}

namespace {

// Two-sided normal tail.
double p_from_z(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

// Cholesky factorization; returns false when the matrix is not numerically
// positive definite (rank-deficient design).
bool cholesky(std::vector<double>& a, int p) {
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = a[static_cast<size_t>(i) * p + j];
      for (int k = 0; k < j; ++k)
        sum -= a[static_cast<size_t>(i) * p + k] * a[static_cast<size_t>(j) * p + k];
      if (i == j) {
        if (sum <= 0.0 || !std::isfinite(sum)) return false;
        a[static_cast<size_t>(i) * p + j] = std::sqrt(sum);
      } else {
        a[static_cast<size_t>(i) * p + j] = sum / a[static_cast<size_t>(j) * p + j];
      }
    }
  }
  return true;
}

void cholesky_solve(const std::vector<double>& l, int p, std::vector<double>& b) {
  for (int i = 0; i < p; ++i) {
    double sum = b[i];
    for (int k = 0; k < i; ++k) sum -= l[static_cast<size_t>(i) * p + k] * b[k];
    b[i] = sum / l[static_cast<size_t>(i) * p + i];
  }
  for (int i = p - 1; i >= 0; --i) {
    double sum = b[i];
    for (int k = i + 1; k < p; ++k) sum -= l[static_cast<size_t>(k) * p + i] * b[k];
    b[i] = sum / l[static_cast<size_t>(i) * p + i];
  }
}

// Inverse from the Cholesky factor, for Wald standard errors.
std::vector<double> cholesky_inverse(const std::vector<double>& l, int p) {
  std::vector<double> inv(static_cast<size_t>(p) * p, 0.0);
  for (int col = 0; col < p; ++col) {
    std::vector<double> e(p, 0.0);
    e[col] = 1.0;
    cholesky_solve(l, p, e);
    for (int row = 0; row < p; ++row) inv[static_cast<size_t>(row) * p + col] = e[row];
  }
  return inv;
}

}  // namespace

std::vector<CoefficientRow> logistic_fit(const std::vector<double>& design, int n, int p,
                                         const std::vector<int>& outcome,
                                         const std::vector<std::string>& terms,
                                         double tolerance, int max_iterations) {
  if (n <= 0 || p <= 0 || design.size() != static_cast<size_t>(n) * p ||
      outcome.size() != static_cast<size_t>(n) || terms.size() != static_cast<size_t>(p))
    throw ConfigError("inconsistent regression inputs");

  {
    const int first = outcome[0];
    bool constant = true;
    for (int y : outcome)
      if (y != first) {
        constant = false;
        break;
      }
    if (constant)
      throw SeparationError("(Intercept)", "outcome has no variation");
  }

  // Unweighted Gram rank check: collinear designs are rejected, not pruned.
  {
    std::vector<double> gram(static_cast<size_t>(p) * p, 0.0);
    for (int i = 0; i < n; ++i) {
      const double* row = design.data() + static_cast<size_t>(i) * p;
      for (int a = 0; a < p; ++a)
        for (int b = 0; b <= a; ++b) gram[static_cast<size_t>(a) * p + b] += row[a] * row[b];
    }
    for (int a = 0; a < p; ++a)
      for (int b = a + 1; b < p; ++b)
        gram[static_cast<size_t>(a) * p + b] = gram[static_cast<size_t>(b) * p + a];
    // Scale-normalized tolerance on the pivots.
    double max_diag = 0;
    for (int a = 0; a < p; ++a) max_diag = std::max(max_diag, gram[static_cast<size_t>(a) * p + a]);
    for (int a = 0; a < p; ++a) gram[static_cast<size_t>(a) * p + a] -= 1e-10 * max_diag;
    if (!cholesky(gram, p)) throw RankError("design matrix is rank deficient");
  }

  std::vector<double> beta(p, 0.0);
  std::vector<double> info;  // X^T W X of the final iteration
  for (int iter = 0; iter < max_iterations; ++iter) {
    info.assign(static_cast<size_t>(p) * p, 0.0);
    std::vector<double> score(p, 0.0);  // X^T (y - mu)
    for (int i = 0; i < n; ++i) {
      const double* row = design.data() + static_cast<size_t>(i) * p;
      double eta = 0;
      for (int j = 0; j < p; ++j) eta += row[j] * beta[j];
      const double mu = 1.0 / (1.0 + std::exp(-eta));
      const double w = std::max(mu * (1.0 - mu), 1e-12);
      const double resid = outcome[i] - mu;
      for (int a = 0; a < p; ++a) {
        score[a] += row[a] * resid;
        for (int b = 0; b <= a; ++b)
          info[static_cast<size_t>(a) * p + b] += w * row[a] * row[b];
      }
    }
    for (int a = 0; a < p; ++a)
      for (int b = a + 1; b < p; ++b)
        info[static_cast<size_t>(a) * p + b] = info[static_cast<size_t>(b) * p + a];

    std::vector<double> l = info;
    if (!cholesky(l, p)) throw RankError("weighted information matrix is singular");
    std::vector<double> delta = score;
    cholesky_solve(l, p, delta);

    double max_change = 0;
    for (int j = 0; j < p; ++j) {
      beta[j] += delta[j];
      max_change = std::max(max_change, std::abs(delta[j]));
    }

    // Runaway coefficients signal perfect separation by some term.
    double max_beta = 0;
    int max_term = 0;
    for (int j = 0; j < p; ++j)
      if (std::abs(beta[j]) > max_beta) {
        max_beta = std::abs(beta[j]);
        max_term = j;
      }
    if (max_beta > 30.0)
      throw SeparationError(terms[max_term],
                            "term appears to separate the outcome: " + terms[max_term]);

    if (max_change < tolerance) break;
    if (iter + 1 == max_iterations)
      throw FitError("IRLS did not converge");
  }

  std::vector<double> l = info;
  if (!cholesky(l, p)) throw RankError("information matrix is singular at the optimum");
  const std::vector<double> cov = cholesky_inverse(l, p);

  std::vector<CoefficientRow> rows;
  for (int j = 0; j < p; ++j) {
    CoefficientRow r;
    r.term = terms[j];
    r.estimate = beta[j];
    r.std_error = std::sqrt(cov[static_cast<size_t>(j) * p + j]);
    r.z_value = r.estimate / r.std_error;
    r.p_value = p_from_z(r.z_value);
    r.significance = significance_stars(r.p_value);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<CoefficientRow> logistic_regression(const std::vector<TrialResult>& trials,
                                                const RegressionSpec& spec) {
  if (trials.empty()) throw EmptyDataError("no trials for regression");

  // Levels present in the data. Organisation rank follows the enum order;
  // duration reference is the largest level.
  std::set<int> type_set, duration_set;
  for (const auto& t : trials) {
    type_set.insert(static_cast<int>(t.image_type));
    duration_set.insert(t.duration_level);
  }
  const int ref_type = spec.reference_type
                           ? static_cast<int>(*spec.reference_type)
                           : *type_set.begin();
  const int ref_duration = spec.reference_duration ? *spec.reference_duration
                                                   : *duration_set.rbegin();

  std::vector<int> type_dummies;  // non-reference types, most organised first
  for (int t : type_set)
    if (t != ref_type) type_dummies.push_back(t);
  std::vector<int> duration_dummies;  // non-reference levels, largest first
  for (auto it = duration_set.rbegin(); it != duration_set.rend(); ++it)
    if (*it != ref_duration) duration_dummies.push_back(*it);

  std::vector<std::string> terms;
  terms.push_back("(Intercept)");
  for (int t : type_dummies)
    terms.push_back(std::string("image_type:") + to_string(static_cast<ImageType>(t)));
  for (int d : duration_dummies) terms.push_back("duration:" + std::to_string(d));
  terms.push_back("dot_ratio");
  terms.push_back("abs_diff");
  terms.push_back("total_dots");
  if (spec.ratio_duration_interaction)
    for (int d : duration_dummies)
      terms.push_back("dot_ratio:duration:" + std::to_string(d));

  const int n = static_cast<int>(trials.size());
  const int p = static_cast<int>(terms.size());
  std::vector<double> design(static_cast<size_t>(n) * p, 0.0);
  std::vector<int> outcome(n);
  for (int i = 0; i < n; ++i) {
    const TrialResult& t = trials[static_cast<size_t>(i)];
    double* row = design.data() + static_cast<size_t>(i) * p;
    int col = 0;
    row[col++] = 1.0;
    for (int ty : type_dummies)
      row[col++] = static_cast<int>(t.image_type) == ty ? 1.0 : 0.0;
    for (int d : duration_dummies) row[col++] = t.duration_level == d ? 1.0 : 0.0;
    const double ratio = t.ratio.balance();
    row[col++] = ratio;
    row[col++] = t.abs_diff;
    row[col++] = t.total_dots;
    if (spec.ratio_duration_interaction)
      for (int d : duration_dummies)
        row[col++] = t.duration_level == d ? ratio : 0.0;
    outcome[static_cast<size_t>(i)] = t.correct ? 1 : 0;
  }

  return logistic_fit(design, n, p, outcome, terms, spec.tolerance, spec.max_iterations);
}

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw ConfigError("spearman needs two equal-length series");
  auto ranks = [](const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return v[i] < v[j]; });
    std::vector<double> r(n);
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  double ma = 0, mb = 0;
  for (size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= static_cast<double>(ra.size());
  mb /= static_cast<double>(rb.size());
  double num = 0, da = 0, db = 0;
  for (size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace mostv

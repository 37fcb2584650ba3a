#ifndef MOSTV_ANALYSIS_HPP_
#define MOSTV_ANALYSIS_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mostv/train.hpp"

namespace mostv {

// Psychophysical accuracy for comparing numerosities n1 >= n2 with Weber
// fraction w:  acc = 1 - erfc((n1 - n2) / (w * sqrt(2) * sqrt(n1^2 + n2^2))) / 2.
// Scale-invariant in (n1, n2); exactly 0.5 at n1 == n2.
double ans_accuracy(double n1, double n2, double w);

struct WeberFit {
  std::string model_id;
  std::string image_type;  // or "all"
  double w = 0;
  double r_squared = 0;    // NaN when SStot == 0 with nonzero residual
  bool r_squared_defined = true;
  // Fitted curve sampled over the observed ratio span, for plotting.
  std::vector<std::pair<double, double>> curve;  // (n1/n2, predicted accuracy)
};

struct WeberPoint {
  double n1 = 0;  // larger count
  double n2 = 0;  // smaller count
  double accuracy = 0;
};

// Least-squares fit of w over [1e-6, 10]: coarse log-grid bracket, then
// golden-section refinement.
WeberFit fit_weber(const std::vector<WeberPoint>& points);

struct AccuracyPoint {
  std::string model_id;
  std::string image_type;         // "all" when pooled over types
  std::optional<RatioPair> ratio; // empty when pooled over ratios
  double mean_accuracy = 0;
  int64_t n_trials = 0;
};

enum class GroupBy : unsigned {
  Model = 1u << 0,
  Type = 1u << 1,
  Ratio = 1u << 2,
};
inline GroupBy operator|(GroupBy a, GroupBy b) {
  return static_cast<GroupBy>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}

// Exact ratio-of-counts accuracy per group, deterministically ordered.
std::vector<AccuracyPoint> aggregate_accuracy(const std::vector<TrialResult>& trials,
                                              GroupBy group_by);

// A cell is one (image type, duration level) pair. Cells at or above the
// accuracy threshold cannot inform the regression and are dropped.
struct ExcludedCell {
  ImageType image_type;
  int duration_level = 0;
  double accuracy = 0;
};
struct ExclusionResult {
  std::vector<TrialResult> retained;
  std::vector<ExcludedCell> excluded;
};
ExclusionResult exclude_invariant_cells(const std::vector<TrialResult>& trials,
                                        double threshold = 0.995);

struct CoefficientRow {
  std::string term;
  double estimate = 0;
  double std_error = 0;
  double z_value = 0;
  double p_value = 0;
  std::string significance;  // ***, **, *, ., or empty
};

struct RegressionSpec {
  // Reference levels: the most organised retained image type and the largest
  // retained duration level; both default to "pick from the data".
  std::optional<ImageType> reference_type;
  std::optional<int> reference_duration;
  bool ratio_duration_interaction = true;
  double tolerance = 1e-8;
  int max_iterations = 100;
};

// Maximum-likelihood logit fit via iteratively reweighted least squares,
// Wald standard errors from the inverse observed information. Predictors:
// image-type dummies, duration dummies, dot ratio (small/large), absolute
// difference, total dots, and ratio x duration interactions.
std::vector<CoefficientRow> logistic_regression(const std::vector<TrialResult>& trials,
                                                const RegressionSpec& spec = {});

// Generic IRLS core on an explicit design matrix (n x p, row-major).
std::vector<CoefficientRow> logistic_fit(const std::vector<double>& design, int n, int p,
                                         const std::vector<int>& outcome,
                                         const std::vector<std::string>& terms,
                                         double tolerance = 1e-8, int max_iterations = 100);

std::string significance_stars(double p);

// Spearman rank correlation (average ranks on ties).
double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace mostv

#endif  // MOSTV_ANALYSIS_HPP_

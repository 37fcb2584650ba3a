#include <doctest.h>

#include <cmath>

#include "mostv/analysis.hpp"
#include "mostv/errors.hpp"
#include "mostv/rng.hpp"

using namespace mostv;

namespace {

// Independent complementary-error-function oracle in extended precision:
// alternating Maclaurin series for small arguments, Legendre continued
// fraction (modified Lentz) for the tail.
long double erfc_oracle(long double x) {
  if (x < 0) return 2.0L - erfc_oracle(-x);
  if (x == 0) return 1.0L;
  if (x > 26.0L) return 0.0L;
  const long double inv_sqrt_pi = 0.564189583547756286948079451560772586L;
  if (x <= 2.0L) {
    // erf(x) = 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1))
    long double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
      term *= -x * x / n;
      const long double add = term / (2 * n + 1);
      sum += add;
      if (std::abs((double)add) < 1e-25 * std::abs((double)sum)) break;
    }
    return 1.0L - 2.0L * inv_sqrt_pi * sum;
  }
  // Legendre continued fraction via modified Lentz:
  // erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
  long double f = x, c = x, d = 0.0L;
  for (int n = 1; n < 20000; ++n) {
    const long double an = n * 0.5L;
    d = x + an * d;
    if (d == 0) d = 1e-30L;
    c = x + an / c;
    if (c == 0) c = 1e-30L;
    d = 1.0L / d;
    const long double delta = c * d;
    f *= delta;
    if (std::abs((double)(delta - 1.0L)) < 1e-19) break;
  }
  return std::exp(-x * x) * inv_sqrt_pi / f;
}

double ans_oracle(double n1, double n2, double w) {
  const long double z = (n1 - n2) / (w * std::sqrt(2.0L) * std::sqrt((long double)(n1 * n1 + n2 * n2)));
  return (double)(1.0L - 0.5L * erfc_oracle(z));
}

std::vector<WeberPoint> synthetic_curve(double w) {
  std::vector<WeberPoint> points;
  for (const RatioPair r : all_ratios())
    points.push_back({static_cast<double>(r.large), static_cast<double>(r.small),
                      ans_accuracy(r.large, r.small, w)});
  return points;
}

TrialResult make_trial(ImageType type, int duration, RatioPair ratio, bool correct,
                       int multiplier = 1) {
  TrialResult t;
  t.model_id = "m" + std::to_string(duration);
  t.duration_level = duration;
  t.image_type = type;
  t.ratio = ratio;
  t.total_dots = multiplier * (ratio.small + ratio.large);
  t.abs_diff = multiplier * (ratio.large - ratio.small);
  t.truth = true;
  t.predicted = correct;
  t.correct = correct;
  return t;
}

}  // namespace

TEST_CASE("erfc implementation agrees with the series/continued-fraction oracle") {
  for (double x = -4.0; x <= 6.0; x += 0.0625)
    CHECK(std::abs(std::erfc(x) - (double)erfc_oracle(x)) < 1e-12);
}

TEST_CASE("equal counts give exactly one half") {
  CHECK(ans_accuracy(7, 7, 0.3) == 0.5);
  CHECK(ans_accuracy(12, 12, 1.7) == 0.5);
}

TEST_CASE("two against one at w=0.363 matches the oracle value") {
  const double got = ans_accuracy(2, 1, 0.363);
  const double expected = ans_oracle(2, 1, 0.363);
  CHECK(std::abs(got - expected) < 1e-12);
  CHECK(got == doctest::Approx(0.8907).epsilon(1e-3));
}

TEST_CASE("vanishing weber fraction drives accuracy to one") {
  CHECK(ans_accuracy(2, 1, 1e-9) == doctest::Approx(1.0));
}

TEST_CASE("domain violations are rejected") {
  CHECK_THROWS_AS(ans_accuracy(1, 2, 0.3), DomainError);
  CHECK_THROWS_AS(ans_accuracy(2, 1, 0.0), DomainError);
  CHECK_THROWS_AS(ans_accuracy(2, 1, -1.0), DomainError);
}

TEST_CASE("accuracy decreases strictly in w and is scale invariant") {
  double prev = 1.0;
  for (double w = 0.05; w < 2.0; w += 0.05) {
    const double acc = ans_accuracy(3, 2, w);
    CHECK(acc < prev);
    CHECK(acc > 0.5);
    prev = acc;
  }
  for (const RatioPair r : all_ratios()) {
    const double base = ans_accuracy(r.large, r.small, 0.27);
    for (double k : {2.0, 3.0, 10.0})
      CHECK(std::abs(ans_accuracy(k * r.large, k * r.small, 0.27) - base) < 1e-12);
  }
}

TEST_CASE("noise-free weber fits recover the planted fraction") {
  for (double w : {0.05, 0.1, 0.3, 0.5}) {
    const WeberFit fit = fit_weber(synthetic_curve(w));
    CHECK(std::abs(fit.w - w) / w < 1e-6);
    CHECK(fit.r_squared >= 0.999999);
  }
}

TEST_CASE("flat chance-level data pins w at the upper bound, r2 undefined") {
  std::vector<WeberPoint> flat;
  for (const RatioPair r : all_ratios())
    flat.push_back({static_cast<double>(r.large), static_cast<double>(r.small), 0.5});
  const WeberFit fit = fit_weber(flat);
  CHECK(fit.w == doctest::Approx(10.0).epsilon(1e-3));
  CHECK_FALSE(fit.r_squared_defined);
  CHECK(std::isnan(fit.r_squared));
}

TEST_CASE("degenerate weber inputs are a fit error") {
  CHECK_THROWS_AS(fit_weber({{2, 1, 0.9}}), FitError);
  CHECK_THROWS_AS(fit_weber({{2, 1, 1.4}, {3, 2, 0.7}}), FitError);
  CHECK_THROWS_AS(fit_weber({{1, 2, 0.9}, {3, 2, 0.7}}), FitError);
}

TEST_CASE("cells at ceiling are excluded, others retained") {
  std::vector<TrialResult> trials;
  for (int i = 0; i < 100; ++i)
    trials.push_back(make_trial(ImageType::ColumnPairsSorted, 7, RatioPair{1, 2}, true));
  for (int i = 0; i < 100; ++i)
    trials.push_back(make_trial(ImageType::ScatteredRandom, 7, RatioPair{1, 2}, i < 80));

  const ExclusionResult result = exclude_invariant_cells(trials, 0.995);
  REQUIRE(result.excluded.size() == 1);
  CHECK(result.excluded[0].image_type == ImageType::ColumnPairsSorted);
  CHECK(result.excluded[0].accuracy == doctest::Approx(1.0));
  CHECK(result.retained.size() == 100);
  for (const auto& t : result.retained)
    CHECK(t.image_type == ImageType::ScatteredRandom);
}

TEST_CASE("excluding every cell is an error") {
  std::vector<TrialResult> trials;
  for (int i = 0; i < 10; ++i)
    trials.push_back(make_trial(ImageType::ScatteredPairs, 9, RatioPair{2, 3}, true));
  CHECK_THROWS_AS(exclude_invariant_cells(trials, 0.995), EmptyDataError);
}

TEST_CASE("constant outcome raises a separation error") {
  std::vector<double> design;
  std::vector<int> outcome;
  Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    design.push_back(1.0);
    design.push_back(rng.uniform());
    outcome.push_back(1);
  }
  CHECK_THROWS_AS(logistic_fit(design, 50, 2, outcome, {"(Intercept)", "x"}),
                  SeparationError);
}

TEST_CASE("perfectly separating predictor raises a separation error naming it") {
  std::vector<double> design;
  std::vector<int> outcome;
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    design.push_back(1.0);
    design.push_back(x);
    outcome.push_back(x > 0 ? 1 : 0);
  }
  try {
    logistic_fit(design, 200, 2, outcome, {"(Intercept)", "x"});
    FAIL("expected SeparationError");
  } catch (const SeparationError& e) {
    CHECK(e.term == "x");
  }
}

TEST_CASE("a constant duplicate column raises a rank error, never a silent drop") {
  std::vector<double> design;
  std::vector<int> outcome;
  Rng rng(43);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(-2.0, 2.0);
    design.push_back(1.0);
    design.push_back(x);
    design.push_back(1.0);  // collinear with the intercept
    const double p = 1.0 / (1.0 + std::exp(-x));
    outcome.push_back(rng.uniform() < p ? 1 : 0);
  }
  CHECK_THROWS_AS(logistic_fit(design, 200, 3, outcome, {"(Intercept)", "x", "c"}),
                  RankError);
}

TEST_CASE("planted coefficients are recovered within three standard errors") {
  // Outcome from logit(p) = 1 - 5 * ratio over the nine stimulus ratios.
  Rng rng(44);
  const int n = 50000;
  std::vector<double> design;
  std::vector<int> outcome;
  const auto ratios = all_ratios();
  for (int i = 0; i < n; ++i) {
    const double ratio = ratios[static_cast<size_t>(rng.uniform_int(0, 8))].balance();
    design.push_back(1.0);
    design.push_back(ratio);
    const double p = 1.0 / (1.0 + std::exp(-(1.0 - 5.0 * ratio)));
    outcome.push_back(rng.uniform() < p ? 1 : 0);
  }
  const auto rows = logistic_fit(design, n, 2, outcome, {"(Intercept)", "dot_ratio"});
  REQUIRE(rows.size() == 2);
  CHECK(std::abs(rows[0].estimate - 1.0) < 3.0 * rows[0].std_error);
  CHECK(std::abs(rows[1].estimate + 5.0) < 3.0 * rows[1].std_error);
  CHECK(rows[1].estimate < 0.0);
}

TEST_CASE("IRLS matches a brute-force ML search on a 3-parameter toy") {
  Rng rng(45);
  const int n = 300, p = 3;
  std::vector<double> design;
  std::vector<int> outcome;
  for (int i = 0; i < n; ++i) {
    const double x1 = rng.uniform(-1.0, 1.0);
    const double x2 = rng.uniform(-1.0, 1.0);
    design.push_back(1.0);
    design.push_back(x1);
    design.push_back(x2);
    const double eta = 0.4 - 1.1 * x1 + 0.8 * x2;
    outcome.push_back(rng.uniform() < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0);
  }

  // Independent oracle: Newton iterations on the log-likelihood using only
  // numeric finite-difference derivatives.
  auto loglik = [&](const std::array<double, 3>& beta) {
    double ll = 0;
    for (int i = 0; i < n; ++i) {
      double eta = 0;
      for (int j = 0; j < p; ++j) eta += design[static_cast<size_t>(i) * p + j] * beta[j];
      const double mu = 1.0 / (1.0 + std::exp(-eta));
      ll += outcome[i] ? std::log(mu) : std::log(1.0 - mu);
    }
    return ll;
  };
  std::array<double, 3> beta{0, 0, 0};
  const double h = 1e-5;
  for (int iter = 0; iter < 60; ++iter) {
    std::array<double, 3> grad{};
    double hess[3][3];
    for (int j = 0; j < 3; ++j) {
      auto up = beta, dn = beta;
      up[j] += h;
      dn[j] -= h;
      grad[j] = (loglik(up) - loglik(dn)) / (2 * h);
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        auto pp = beta, pm = beta, mp = beta, mm = beta;
        pp[a] += h; pp[b] += h;
        pm[a] += h; pm[b] -= h;
        mp[a] -= h; mp[b] += h;
        mm[a] -= h; mm[b] -= h;
        hess[a][b] = (loglik(pp) - loglik(pm) - loglik(mp) + loglik(mm)) / (4 * h * h);
      }
    }
    // Solve hess * delta = grad by Cramer's rule, then ascend.
    auto det3 = [](double m[3][3]) {
      return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
             m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
             m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const double d = det3(hess);
    std::array<double, 3> delta{};
    for (int j = 0; j < 3; ++j) {
      double m[3][3];
      std::copy(&hess[0][0], &hess[0][0] + 9, &m[0][0]);
      for (int a = 0; a < 3; ++a) m[a][j] = grad[a];
      delta[j] = det3(m) / d;
    }
    double change = 0;
    for (int j = 0; j < 3; ++j) {
      beta[j] -= delta[j];  // Newton ascent: hess is negative definite
      change = std::max(change, std::abs(delta[j]));
    }
    if (change < 1e-10) break;
  }

  const auto rows = logistic_fit(design, n, p, outcome, {"b0", "b1", "b2"});
  for (int j = 0; j < 3; ++j) CHECK(std::abs(rows[j].estimate - beta[j]) < 1e-6);
}

TEST_CASE("regression builds the documented terms with paper-style references") {
  // Two image types, two duration levels: reference = most organised type
  // and the largest level, so dummies name the scattered type and level 7.
  std::vector<TrialResult> trials;
  Rng rng(46);
  for (int i = 0; i < 4000; ++i) {
    const ImageType type = rng.coin() ? ImageType::ColumnPairsMixed : ImageType::ScatteredRandom;
    const int duration = rng.coin() ? 11 : 7;
    const RatioPair ratio = all_ratios()[static_cast<size_t>(rng.uniform_int(0, 8))];
    const int k_max = 22 / (ratio.small + ratio.large);
    const int k = static_cast<int>(rng.uniform_int(1, k_max));
    const double eta = 1.5 - 2.0 * ratio.balance() +
                       (type == ImageType::ScatteredRandom ? -0.8 : 0.0) +
                       (duration == 7 ? -0.5 : 0.0);
    trials.push_back(make_trial(type, duration, ratio,
                                rng.uniform() < 1.0 / (1.0 + std::exp(-eta)), k));
  }
  const auto rows = logistic_regression(trials);
  std::vector<std::string> terms;
  for (const auto& r : rows) terms.push_back(r.term);
  CHECK(terms == std::vector<std::string>{
                     "(Intercept)", "image_type:scattered_random", "duration:7",
                     "dot_ratio", "abs_diff", "total_dots", "dot_ratio:duration:7"});
  for (const auto& r : rows) {
    CHECK(r.z_value == doctest::Approx(r.estimate / r.std_error));
    CHECK(r.p_value == doctest::Approx(std::erfc(std::abs(r.z_value) / std::sqrt(2.0))));
  }
}

TEST_CASE("aggregation is an exact partition") {
  std::vector<TrialResult> trials;
  trials.push_back(make_trial(ImageType::ScatteredRandom, 7, RatioPair{1, 2}, true));
  CHECK(aggregate_accuracy(trials, GroupBy::Model)[0].mean_accuracy == 1.0);
  CHECK(aggregate_accuracy(trials, GroupBy::Model)[0].n_trials == 1);

  trials.push_back(make_trial(ImageType::ScatteredRandom, 7, RatioPair{1, 2}, false));
  CHECK(aggregate_accuracy(trials, GroupBy::Model)[0].mean_accuracy == 0.5);

  Rng rng(47);
  for (int i = 0; i < 500; ++i)
    trials.push_back(make_trial(all_image_types()[static_cast<size_t>(rng.uniform_int(0, 3))],
                                rng.coin() ? 7 : 9,
                                all_ratios()[static_cast<size_t>(rng.uniform_int(0, 8))],
                                rng.coin()));
  int64_t total = 0;
  for (const auto& p : aggregate_accuracy(trials, GroupBy::Model | GroupBy::Type | GroupBy::Ratio))
    total += p.n_trials;
  CHECK(total == static_cast<int64_t>(trials.size()));
}

TEST_CASE("significance stars follow the table convention") {
  CHECK(significance_stars(0.0005) == "***");
  CHECK(significance_stars(0.005) == "**");
  CHECK(significance_stars(0.03) == "*");
  CHECK(significance_stars(0.07) == ".");
  CHECK(significance_stars(0.5) == "");
}

TEST_CASE("spearman correlation on monotone, reversed, and tied data") {
  CHECK(spearman_rho({1, 2, 3, 4, 5}, {10, 20, 30, 40, 50}) == doctest::Approx(1.0));
  CHECK(spearman_rho({1, 2, 3, 4, 5}, {50, 40, 30, 20, 10}) == doctest::Approx(-1.0));
  const double rho = spearman_rho({1, 2, 3, 4}, {1, 1, 2, 2});
  CHECK(rho > 0.7);
  CHECK(rho < 1.0);
}

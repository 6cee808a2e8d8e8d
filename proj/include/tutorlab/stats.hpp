#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tutorlab {

// Regularized incomplete beta I_x(a, b) and upper incomplete gamma Q(a, x),
// evaluated by continued fractions and series to about 1e-12 relative.
double regularized_beta(double x, double a, double b);
double regularized_gamma_q(double a, double x);

// Survival functions P(X > x).
double f_sf(double f, double df1, double df2);
double chi_squared_sf(double x, double df);
// Two-sided P(|T| > |t|).
double t_two_sided_p(double t, double df);

struct AnovaResult {
  double F = 0.0;
  double df_between = 0.0;
  double df_within = 0.0;
  double p_value = 1.0;
  double eta_squared = 0.0;
  double ss_effect = 0.0;
  double ss_within = 0.0;
  double ss_total = 0.0;
};

// Needs at least two groups of two observations. Throws StatisticsError
// ("degenerate groups") when the within-group sum of squares is zero.
AnovaResult one_way_anova(std::span<const std::vector<double>> groups);

struct TwoWayAnovaResult {
  AnovaResult factor_a;
  AnovaResult factor_b;
  AnovaResult interaction;
};

// cells[i][j] holds the observations at level i of A and level j of B. The
// design must be complete and balanced with at least two observations per
// cell; eta squared is SS_effect / SS_total.
TwoWayAnovaResult two_way_anova(const std::vector<std::vector<std::vector<double>>>& cells);

struct ChiSquaredResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Pearson statistic without continuity correction, df = 1. Throws
// StatisticsError on a negative count or an empty row or column.
ChiSquaredResult chi_squared_2x2(const std::array<std::array<std::int64_t, 2>, 2>& table);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);
TTestResult pooled_t_test(std::span<const double> a, std::span<const double> b);

struct PairComparison {
  std::size_t first = 0;
  std::size_t second = 0;
  TTestResult test;
  double p_adjusted = 1.0;
};

inline constexpr const char* kPairwiseMethod = "welch_bonferroni (approximation of Tukey HSD)";

struct PairwiseResult {
  std::string method = kPairwiseMethod;
  std::vector<PairComparison> pairs;
  std::vector<std::string> warnings;
};

// Welch t-test for every pair, Bonferroni-adjusted over k(k-1)/2 pairs. Pairs
// involving a group with fewer than two observations are skipped with a
// warning.
PairwiseResult pairwise_comparisons(std::span<const std::vector<double>> groups);

double mean(std::span<const double> xs);
// Sample variance (n - 1 denominator).
double sample_variance(std::span<const double> xs);

}  // namespace tutorlab

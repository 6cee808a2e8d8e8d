#include "tutorlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tutorlab/errors.hpp"

namespace tutorlab {
namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEpsilon = 1e-15;
constexpr double kTiny = 1e-300;

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) return h;
  }
  throw StatisticsError("incomplete beta continued fraction did not converge");
}

double gamma_series_p(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEpsilon) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw StatisticsError("incomplete gamma series did not converge");
}

double gamma_continued_fraction_q(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  }
  throw StatisticsError("incomplete gamma continued fraction did not converge");
}

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

double regularized_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw StatisticsError("incomplete beta needs positive parameters");
  if (std::isnan(x)) throw StatisticsError("incomplete beta at NaN");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return clamp_probability(front * beta_continued_fraction(x, a, b) / a);
  return clamp_probability(1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw StatisticsError("incomplete gamma needs a positive shape");
  if (std::isnan(x)) throw StatisticsError("incomplete gamma at NaN");
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return clamp_probability(1.0 - gamma_series_p(a, x));
  return clamp_probability(gamma_continued_fraction_q(a, x));
}

double f_sf(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return regularized_beta(df2 / (df2 + df1 * f), df2 / 2.0, df1 / 2.0);
}

double chi_squared_sf(double x, double df) { return regularized_gamma_q(df / 2.0, x / 2.0); }

double t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return regularized_beta(df / (df + t * t), df / 2.0, 0.5);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw StatisticsError("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw StatisticsError("sample variance needs at least two observations");
  const double m = mean(xs);
  double ss = 0.0;
  for (const double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

AnovaResult one_way_anova(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw StatisticsError("one-way ANOVA needs at least two groups");
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw StatisticsError("one-way ANOVA needs at least two observations per group");
    total += std::accumulate(g.begin(), g.end(), 0.0);
    n += g.size();
  }
  const double grand = total / static_cast<double>(n);
  double ssb = 0.0, ssw = 0.0, sst = 0.0;
  for (const auto& g : groups) {
    const double m = mean(g);
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (const double x : g) {
      ssw += (x - m) * (x - m);
      sst += (x - grand) * (x - grand);
    }
  }
  if (sst == 0.0 || ssw <= 1e-14 * sst) throw StatisticsError("degenerate groups: within-group sum of squares is zero");
  AnovaResult r;
  r.df_between = static_cast<double>(groups.size() - 1);
  r.df_within = static_cast<double>(n - groups.size());
  r.ss_effect = ssb;
  r.ss_within = ssw;
  r.ss_total = sst;
  r.F = (ssb / r.df_between) / (ssw / r.df_within);
  r.p_value = f_sf(r.F, r.df_between, r.df_within);
  r.eta_squared = std::clamp(ssb / sst, 0.0, 1.0);
  return r;
}

TwoWayAnovaResult two_way_anova(const std::vector<std::vector<std::vector<double>>>& cells) {
  const std::size_t a = cells.size();
  if (a < 2) throw StatisticsError("two-way ANOVA needs at least two levels of factor A");
  const std::size_t b = cells.front().size();
  if (b < 2) throw StatisticsError("two-way ANOVA needs at least two levels of factor B");
  const std::size_t n = cells.front().front().size();
  for (const auto& row : cells) {
    if (row.size() != b) throw StatisticsError("two-way ANOVA needs a complete design");
    for (const auto& cell : row) {
      if (cell.size() != n) throw StatisticsError("two-way ANOVA needs a balanced design (equal cell sizes)");
    }
  }
  if (n < 2) throw StatisticsError("two-way ANOVA needs at least two observations per cell");

  std::vector<double> mean_a(a, 0.0), mean_b(b, 0.0);
  std::vector<std::vector<double>> cell_mean(a, std::vector<double>(b));
  double grand = 0.0;
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      cell_mean[i][j] = mean(cells[i][j]);
      mean_a[i] += cell_mean[i][j] / static_cast<double>(b);
      mean_b[j] += cell_mean[i][j] / static_cast<double>(a);
      grand += cell_mean[i][j] / static_cast<double>(a * b);
    }
  }
  const double dn = static_cast<double>(n);
  double ssa = 0.0, ssb = 0.0, ssab = 0.0, ssw = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < a; ++i) ssa += static_cast<double>(b) * dn * (mean_a[i] - grand) * (mean_a[i] - grand);
  for (std::size_t j = 0; j < b; ++j) ssb += static_cast<double>(a) * dn * (mean_b[j] - grand) * (mean_b[j] - grand);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const double inter = cell_mean[i][j] - mean_a[i] - mean_b[j] + grand;
      ssab += dn * inter * inter;
      for (const double x : cells[i][j]) {
        ssw += (x - cell_mean[i][j]) * (x - cell_mean[i][j]);
        sst += (x - grand) * (x - grand);
      }
    }
  }
  if (sst == 0.0 || ssw <= 1e-14 * sst) throw StatisticsError("degenerate groups: within-cell sum of squares is zero");

  const double df_within = static_cast<double>(a * b * (n - 1));
  const double ms_within = ssw / df_within;
  const auto effect = [&](double ss, double df) {
    AnovaResult r;
    r.df_between = df;
    r.df_within = df_within;
    r.ss_effect = ss;
    r.ss_within = ssw;
    r.ss_total = sst;
    r.F = (ss / df) / ms_within;
    r.p_value = f_sf(r.F, df, df_within);
    r.eta_squared = std::clamp(ss / sst, 0.0, 1.0);
    return r;
  };
  return {effect(ssa, static_cast<double>(a - 1)), effect(ssb, static_cast<double>(b - 1)),
          effect(ssab, static_cast<double>((a - 1) * (b - 1)))};
}

ChiSquaredResult chi_squared_2x2(const std::array<std::array<std::int64_t, 2>, 2>& table) {
  double row[2] = {0, 0}, col[2] = {0, 0}, total = 0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (table[i][j] < 0) throw StatisticsError("contingency counts must be non-negative");
      const auto v = static_cast<double>(table[i][j]);
      row[i] += v;
      col[j] += v;
      total += v;
    }
  }
  if (row[0] == 0 || row[1] == 0 || col[0] == 0 || col[1] == 0) {
    throw StatisticsError("contingency table has a zero marginal");
  }
  ChiSquaredResult r;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double expected = row[i] * col[j] / total;
      const double diff = static_cast<double>(table[i][j]) - expected;
      r.statistic += diff * diff / expected;
    }
  }
  r.p_value = chi_squared_sf(r.statistic, 1.0);
  return r;
}

namespace {

TTestResult finish_t(double diff, double se, double df) {
  TTestResult r;
  r.df = df;
  if (se == 0.0) {
    // Both samples constant: equal means give no evidence, unequal means are
    // separated without error.
    if (diff != 0.0) {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
      r.p_value = 0.0;
    }
    return r;
  }
  r.t = diff / se;
  r.p_value = t_two_sided_p(r.t, df);
  return r;
}

}  // namespace

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw StatisticsError("t-test needs at least two observations per group");
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  const double se2 = va + vb;
  double df = static_cast<double>(a.size() + b.size() - 2);
  if (se2 > 0.0) {
    df = se2 * se2 / (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  }
  return finish_t(mean(a) - mean(b), std::sqrt(se2), df);
}

TTestResult pooled_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw StatisticsError("t-test needs at least two observations per group");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double df = na + nb - 2.0;
  const double sp2 = ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / df;
  return finish_t(mean(a) - mean(b), std::sqrt(sp2 * (1.0 / na + 1.0 / nb)), df);
}

PairwiseResult pairwise_comparisons(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw StatisticsError("pairwise comparisons need at least two groups");
  PairwiseResult out;
  const double m = static_cast<double>(groups.size() * (groups.size() - 1) / 2);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      if (groups[i].size() < 2 || groups[j].size() < 2) {
        out.warnings.push_back("pair (" + std::to_string(i) + ", " + std::to_string(j) +
                               ") skipped: a group has fewer than two observations");
        continue;
      }
      PairComparison c;
      c.first = i;
      c.second = j;
      c.test = welch_t_test(groups[i], groups[j]);
      c.p_adjusted = std::min(1.0, c.test.p_value * m);
      out.pairs.push_back(c);
    }
  }
  return out;
}

}  // namespace tutorlab

#pragma once

#include <span>
#include <vector>

namespace biomark {
namespace stats {

double mean(std::span<const double> x);
// n-1 denominator throughout (consistent with the t statistics).
double sample_variance(std::span<const double> x);
double sample_sd(std::span<const double> x);
// Moment-based sample skewness m3 / m2^(3/2).
double skewness(std::span<const double> x);

// Welch statistic (mu_a - mu_b) / sqrt(s2_a/n_a + s2_b/n_b).
// Both groups constant with equal means -> 0; with different means the
// statistic is infinite and an AlgorithmError is thrown instead.
double welch_t(std::span<const double> a, std::span<const double> b);

// (mu_a - mu_b) / (sd_a + sd_b); AlgorithmError when both groups constant.
double snr(std::span<const double> a, std::span<const double> b);

// One-way F = between-group mean square / within-group mean square.
// AlgorithmError when the within-group variance is zero.
double anova_f(const std::vector<std::span<const double>>& groups);

// 0 when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

// Correlation ratio (eta) of a feature against k classes:
// sqrt(SS_between / SS_total); 0 for a zero-variance feature.
double correlation_ratio(std::span<const double> values, std::span<const int> class_index, int k);

}  // namespace stats
}  // namespace biomark

#include "biomark/stats.hpp"

#include <cmath>
#include <cstddef>

#include "biomark/error.hpp"

namespace biomark {
namespace stats {

double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) throw AlgorithmError("too_few_values", "sample variance needs at least 2 values");
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) {
        const double d = v - m;
        ss += d * d;
    }
    return ss / static_cast<double>(n - 1);
}

double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

double skewness(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 3) throw AlgorithmError("too_few_values", "skewness needs at least 3 values");
    const double m = mean(x);
    double m2 = 0.0, m3 = 0.0;
    for (double v : x) {
        const double d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    if (m2 <= 0.0) return 0.0;
    return m3 / std::pow(m2, 1.5);
}

double welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw AlgorithmError("too_few_values", "welch_t needs at least 2 values per group");
    const double ma = mean(a), mb = mean(b);
    const double va = sample_variance(a), vb = sample_variance(b);
    const double se2 = va / static_cast<double>(a.size()) + vb / static_cast<double>(b.size());
    if (se2 <= 0.0) {
        if (ma == mb) return 0.0;
        throw AlgorithmError("degenerate_statistic",
                             "welch_t: both groups constant with different means");
    }
    return (ma - mb) / std::sqrt(se2);
}

double snr(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw AlgorithmError("too_few_values", "snr needs at least 2 values per group");
    const double denom = sample_sd(a) + sample_sd(b);
    if (denom <= 0.0)
        throw AlgorithmError("degenerate_statistic", "snr: both groups constant");
    return (mean(a) - mean(b)) / denom;
}

double anova_f(const std::vector<std::span<const double>>& groups) {
    if (groups.size() < 2)
        throw AlgorithmError("too_few_groups", "anova_f needs at least 2 groups");
    std::size_t n = 0;
    double grand = 0.0;
    for (const auto& g : groups) {
        if (g.size() < 2)
            throw AlgorithmError("too_few_values", "anova_f needs at least 2 values per group");
        n += g.size();
        for (double v : g) grand += v;
    }
    grand /= static_cast<double>(n);

    double ss_between = 0.0, ss_within = 0.0;
    for (const auto& g : groups) {
        const double gm = mean(g);
        const double d = gm - grand;
        ss_between += static_cast<double>(g.size()) * d * d;
        for (double v : g) {
            const double e = v - gm;
            ss_within += e * e;
        }
    }
    const std::size_t df_between = groups.size() - 1;
    const std::size_t df_within = n - groups.size();
    if (ss_within <= 0.0)
        throw AlgorithmError("degenerate_statistic", "anova_f: zero within-group variance");
    const double msb = ss_between / static_cast<double>(df_between);
    const double msw = ss_within / static_cast<double>(df_within);
    return msb / msw;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    if (n != b.size() || n < 2)
        throw AlgorithmError("length_mismatch", "pearson needs two equal-length vectors, n >= 2");
    const double ma = mean(a), mb = mean(b);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

double correlation_ratio(std::span<const double> values, std::span<const int> class_index, int k) {
    const std::size_t n = values.size();
    if (class_index.size() != n)
        throw AlgorithmError("length_mismatch", "correlation_ratio: class index length mismatch");
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
    std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum[static_cast<std::size_t>(class_index[i])] += values[i];
        count[static_cast<std::size_t>(class_index[i])]++;
        grand += values[i];
    }
    grand /= static_cast<double>(n);
    double ss_total = 0.0;
    for (double v : values) {
        const double d = v - grand;
        ss_total += d * d;
    }
    if (ss_total <= 0.0) return 0.0;
    double ss_between = 0.0;
    for (int c = 0; c < k; ++c) {
        if (count[static_cast<std::size_t>(c)] == 0) continue;
        const double gm = sum[static_cast<std::size_t>(c)] /
                          static_cast<double>(count[static_cast<std::size_t>(c)]);
        const double d = gm - grand;
        ss_between += static_cast<double>(count[static_cast<std::size_t>(c)]) * d * d;
    }
    return std::sqrt(ss_between / ss_total);
}

}  // namespace stats
}  // namespace biomark

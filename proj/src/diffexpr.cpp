#include "biomark/diffexpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <unordered_map>

#include "biomark/error.hpp"
#include "biomark/io.hpp"
#include "biomark/parallel.hpp"
#include "biomark/rng.hpp"

namespace biomark {

const char* stat_name(StatKind k) {
    switch (k) {
        case StatKind::welch_t: return "t";
        case StatKind::snr: return "snr";
        case StatKind::anova_f: return "f";
    }
    return "?";
}

StatKind stat_from_name(const std::string& name) {
    if (name == "t") return StatKind::welch_t;
    if (name == "snr") return StatKind::snr;
    if (name == "f") return StatKind::anova_f;
    throw ConfigError("unknown_statistic", "unknown statistic '" + name + "' (use t, snr, f)");
}

namespace {

// Per-class first/second moments of one probeset row under a class
// assignment. Scratch arrays are caller-owned so the permutation loop does
// not allocate.
struct Moments {
    std::vector<double> sum, sumsq;
    std::vector<std::size_t> count;
    explicit Moments(int k)
        : sum(static_cast<std::size_t>(k)), sumsq(static_cast<std::size_t>(k)),
          count(static_cast<std::size_t>(k)) {}
};

void accumulate(const double* row, const int* cls, std::size_t n, Moments& m) {
    std::fill(m.sum.begin(), m.sum.end(), 0.0);
    std::fill(m.sumsq.begin(), m.sumsq.end(), 0.0);
    std::fill(m.count.begin(), m.count.end(), std::size_t{0});
    for (std::size_t s = 0; s < n; ++s) {
        const double v = row[s];
        const auto c = static_cast<std::size_t>(cls[s]);
        m.sum[c] += v;
        m.sumsq[c] += v * v;
        m.count[c]++;
    }
}

// Signed statistic of the maximum-magnitude class pair (t, snr) or the
// one-way F. ok=false when no pair / the F is not computable.
double stat_from_moments(StatKind kind, const Moments& m, bool& ok) {
    const int k = static_cast<int>(m.sum.size());
    ok = false;
    if (kind == StatKind::anova_f) {
        double total_sum = 0.0, total_sumsq = 0.0;
        std::size_t n = 0;
        double ss_within = 0.0;
        for (int c = 0; c < k; ++c) {
            const auto cc = static_cast<std::size_t>(c);
            n += m.count[cc];
            total_sum += m.sum[cc];
            total_sumsq += m.sumsq[cc];
            const double nc = static_cast<double>(m.count[cc]);
            ss_within += m.sumsq[cc] - m.sum[cc] * m.sum[cc] / nc;
        }
        const double grand = total_sum / static_cast<double>(n);
        double ss_between = 0.0;
        for (int c = 0; c < k; ++c) {
            const auto cc = static_cast<std::size_t>(c);
            const double nc = static_cast<double>(m.count[cc]);
            const double d = m.sum[cc] / nc - grand;
            ss_between += nc * d * d;
        }
        if (ss_within <= 0.0) return 0.0;
        const double msb = ss_between / static_cast<double>(k - 1);
        const double msw = ss_within / static_cast<double>(n - static_cast<std::size_t>(k));
        ok = true;
        return msb / msw;
    }

    double best = 0.0;
    bool any = false;
    for (int a = 0; a < k; ++a) {
        for (int b = a + 1; b < k; ++b) {
            const auto ca = static_cast<std::size_t>(a), cb = static_cast<std::size_t>(b);
            const double na = static_cast<double>(m.count[ca]), nb = static_cast<double>(m.count[cb]);
            const double mean_a = m.sum[ca] / na, mean_b = m.sum[cb] / nb;
            double var_a = (m.sumsq[ca] - m.sum[ca] * m.sum[ca] / na) / (na - 1.0);
            double var_b = (m.sumsq[cb] - m.sum[cb] * m.sum[cb] / nb) / (nb - 1.0);
            if (var_a < 0.0) var_a = 0.0;
            if (var_b < 0.0) var_b = 0.0;
            double s = 0.0;
            if (kind == StatKind::welch_t) {
                const double se2 = var_a / na + var_b / nb;
                if (se2 <= 0.0) {
                    if (mean_a == mean_b) s = 0.0;
                    else continue;  // infinite separation, not representable
                } else {
                    s = (mean_a - mean_b) / std::sqrt(se2);
                }
            } else {
                const double denom = std::sqrt(var_a) + std::sqrt(var_b);
                if (denom <= 0.0) continue;
                s = (mean_a - mean_b) / denom;
            }
            if (!any || std::abs(s) > std::abs(best)) best = s;
            any = true;
        }
    }
    ok = any;
    return best;
}

}  // namespace

double multiclass_statistic(StatKind kind, const double* row,
                            const std::vector<std::vector<std::size_t>>& groups) {
    const int k = static_cast<int>(groups.size());
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    std::vector<int> cls(n, 0);
    for (int c = 0; c < k; ++c)
        for (std::size_t s : groups[static_cast<std::size_t>(c)]) cls[s] = c;
    Moments m(k);
    accumulate(row, cls.data(), n, m);
    bool ok = false;
    const double s = stat_from_moments(kind, m, ok);
    if (!ok)
        throw AlgorithmError("degenerate_statistic", "statistic not computable for this row");
    return s;
}

PermutationResult permutation_pvalues(const LabeledDataset& ds, StatKind kind,
                                      const PermutationPlan& plan) {
    ds.validate();
    if (plan.permutation_count < 1)
        throw ConfigError("bad_permutation_count", "permutation count must be >= 1");
    const int k = static_cast<int>(ds.n_classes());
    const std::size_t n = ds.matrix.n_samples();
    const std::size_t n_genes = ds.matrix.n_probesets();
    const auto base_cls = ds.class_indices();
    for (const auto& g : ds.samples_by_class())
        if (g.size() < 2)
            throw DataError("class_too_small", "every class needs >= 2 samples for permutation testing");

    PermutationResult res;
    res.observed.assign(n_genes, 0.0);
    res.raw_p.assign(n_genes, 1.0);
    res.degenerate.assign(n_genes, 0);

    parallel_chunks(n_genes, [&](std::size_t lo, std::size_t hi) {
        Moments m(k);
        for (std::size_t g = lo; g < hi; ++g) {
            accumulate(ds.matrix.row(g), base_cls.data(), n, m);
            bool ok = false;
            const double s = stat_from_moments(kind, m, ok);
            if (ok) {
                res.observed[g] = s;
            } else {
                res.degenerate[g] = 1;
            }
        }
    });

    const int B = plan.permutation_count;
    std::vector<std::uint32_t> exceed(n_genes, 0);
    std::mutex merge_mutex;

    parallel_chunks(static_cast<std::size_t>(B), [&](std::size_t lo, std::size_t hi) {
        Moments m(k);
        std::vector<int> perm(n);
        std::vector<std::uint32_t> local(n_genes, 0);
        for (std::size_t round = lo; round < hi; ++round) {
            perm = base_cls;
            Rng rng(derive_seed(plan.seed, round));
            rng.shuffle(perm);
            for (std::size_t g = 0; g < n_genes; ++g) {
                if (res.degenerate[g]) continue;
                accumulate(ds.matrix.row(g), perm.data(), n, m);
                bool ok = false;
                const double s = stat_from_moments(kind, m, ok);
                // a non-computable permuted statistic counts against the
                // observed one (conservative)
                if (!ok || std::abs(s) >= std::abs(res.observed[g])) local[g]++;
            }
        }
        std::lock_guard<std::mutex> lock(merge_mutex);
        for (std::size_t g = 0; g < n_genes; ++g) exceed[g] += local[g];
    });

    for (std::size_t g = 0; g < n_genes; ++g) {
        if (res.degenerate[g]) {
            res.raw_p[g] = 1.0;
        } else {
            res.raw_p[g] = (1.0 + static_cast<double>(exceed[g])) / (1.0 + static_cast<double>(B));
        }
    }
    return res;
}

namespace {

void check_pvalues(const std::vector<double>& p) {
    for (double v : p)
        if (!(v > 0.0 && v <= 1.0))
            throw DataError("p_out_of_range", "p-values must lie in (0, 1]");
}

std::vector<std::size_t> ascending_order(const std::vector<double>& p) {
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    return order;
}

}  // namespace

std::vector<double> adjust_bh(const std::vector<double>& raw_p) {
    check_pvalues(raw_p);
    const std::size_t m = raw_p.size();
    const auto order = ascending_order(raw_p);
    std::vector<double> out(m, 1.0);
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t i = m; i-- > 0;) {
        const double val = static_cast<double>(m) * raw_p[order[i]] / static_cast<double>(i + 1);
        running = std::min(running, val);
        out[order[i]] = std::min(running, 1.0);
    }
    return out;
}

std::vector<double> adjust_bonferroni(const std::vector<double>& raw_p) {
    check_pvalues(raw_p);
    std::vector<double> out(raw_p.size());
    for (std::size_t i = 0; i < raw_p.size(); ++i)
        out[i] = std::min(static_cast<double>(raw_p.size()) * raw_p[i], 1.0);
    return out;
}

std::vector<double> adjust_hochberg(const std::vector<double>& raw_p) {
    check_pvalues(raw_p);
    const std::size_t m = raw_p.size();
    const auto order = ascending_order(raw_p);
    std::vector<double> out(m, 1.0);
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t i = m; i-- > 0;) {
        const double val = static_cast<double>(m - i) * raw_p[order[i]];  // (m - j + 1), j = i+1
        running = std::min(running, val);
        out[order[i]] = std::min(running, 1.0);
    }
    return out;
}

std::vector<GeneScore> rank_genes(const LabeledDataset& ds, StatKind kind,
                                  const PermutationPlan& plan) {
    const PermutationResult perm = permutation_pvalues(ds, kind, plan);
    const auto bh = adjust_bh(perm.raw_p);
    const auto bonf = adjust_bonferroni(perm.raw_p);
    const auto hoch = adjust_hochberg(perm.raw_p);

    std::vector<GeneScore> scores(perm.raw_p.size());
    for (std::size_t g = 0; g < scores.size(); ++g) {
        scores[g].probeset_id = ds.matrix.probeset_ids[g];
        scores[g].statistic = perm.observed[g];
        scores[g].raw_p = perm.raw_p[g];
        scores[g].fdr_bh = bh[g];
        scores[g].fwer_bonferroni = bonf[g];
        scores[g].fwer_hochberg = hoch[g];
    }
    std::sort(scores.begin(), scores.end(), [](const GeneScore& a, const GeneScore& b) {
        if (a.raw_p != b.raw_p) return a.raw_p < b.raw_p;
        return a.probeset_id < b.probeset_id;
    });
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i].rank = i + 1;
    return scores;
}

ExpressionMatrix heatmap_export(const LabeledDataset& ds, const std::vector<GeneScore>& scores,
                                std::size_t top_n) {
    ds.validate();
    std::vector<const GeneScore*> by_rank;
    by_rank.reserve(scores.size());
    for (const auto& s : scores) by_rank.push_back(&s);
    std::sort(by_rank.begin(), by_rank.end(),
              [](const GeneScore* a, const GeneScore* b) { return a->rank < b->rank; });
    if (top_n > by_rank.size()) top_n = by_rank.size();

    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t p = 0; p < ds.matrix.n_probesets(); ++p)
        row_of[ds.matrix.probeset_ids[p]] = p;

    // class-contiguous column order, original order within each class
    std::vector<std::size_t> col_order;
    for (const auto& g : ds.samples_by_class())
        col_order.insert(col_order.end(), g.begin(), g.end());

    const std::size_t n = ds.matrix.n_samples();
    ExpressionMatrix out;
    out.stage = Stage::zscore;
    for (std::size_t c : col_order) out.sample_ids.push_back(ds.matrix.sample_ids[c]);
    out.values.reserve(top_n * n);
    for (std::size_t i = 0; i < top_n; ++i) {
        const auto it = row_of.find(by_rank[i]->probeset_id);
        if (it == row_of.end())
            throw DataError("unknown_probeset",
                            "score list references probeset '" + by_rank[i]->probeset_id +
                                "' not present in the dataset");
        const double* row = ds.matrix.row(it->second);
        double mean = 0.0;
        for (std::size_t s = 0; s < n; ++s) mean += row[s];
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t s = 0; s < n; ++s) ss += (row[s] - mean) * (row[s] - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        out.probeset_ids.push_back(by_rank[i]->probeset_id);
        for (std::size_t c : col_order)
            out.values.push_back(sd > 0.0 ? (row[c] - mean) / sd : 0.0);
    }
    return out;
}

std::string format_scores(const std::vector<GeneScore>& scores) {
    std::string out = "probeset_id\tstatistic\traw_p\tfdr_bh\tfwer_bonferroni\tfwer_hochberg\trank\n";
    for (const auto& s : scores) {
        out += s.probeset_id + "\t" + format_value(s.statistic) + "\t" + format_value(s.raw_p) +
               "\t" + format_value(s.fdr_bh) + "\t" + format_value(s.fwer_bonferroni) + "\t" +
               format_value(s.fwer_hochberg) + "\t" + std::to_string(s.rank) + "\n";
    }
    return out;
}

std::vector<GeneScore> parse_scores(const std::string& text) {
    std::vector<GeneScore> out;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        GeneScore s;
        std::size_t field = 0, start = 0;
        while (start <= line.size()) {
            std::size_t tab = line.find('\t', start);
            if (tab == std::string::npos) tab = line.size();
            const std::string cell = line.substr(start, tab - start);
            switch (field) {
                case 0: s.probeset_id = cell; break;
                case 1: s.statistic = std::stod(cell); break;
                case 2: s.raw_p = std::stod(cell); break;
                case 3: s.fdr_bh = std::stod(cell); break;
                case 4: s.fwer_bonferroni = std::stod(cell); break;
                case 5: s.fwer_hochberg = std::stod(cell); break;
                case 6: s.rank = static_cast<std::size_t>(std::stoull(cell)); break;
                default: throw DataError("ragged_row", "score row has too many columns");
            }
            ++field;
            start = tab + 1;
            if (tab == line.size()) break;
        }
        if (field != 7) throw DataError("ragged_row", "score row has too few columns");
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace biomark

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biomark/types.hpp"

namespace biomark {

enum class StatKind : std::uint8_t { welch_t, snr, anova_f };

const char* stat_name(StatKind k);
StatKind stat_from_name(const std::string& name);  // "t", "snr", "f"

struct PermutationPlan {
    int permutation_count = 1000;
    std::uint64_t seed = 0;
};

struct GeneScore {
    std::string probeset_id;
    double statistic = 0.0;
    double raw_p = 1.0;
    double fdr_bh = 1.0;
    double fwer_bonferroni = 1.0;
    double fwer_hochberg = 1.0;
    std::size_t rank = 0;  // 1-based, rank 1 = smallest raw_p
};

struct PermutationResult {
    std::vector<double> observed;          // per probeset, dataset row order
    std::vector<double> raw_p;             // add-one estimator (1+b)/(1+B)
    std::vector<std::uint8_t> degenerate;  // rows whose statistic is not computable
};

// Two-class statistics extend to k classes as the signed pairwise value of
// maximum magnitude; anova_f handles any class count directly.
double multiclass_statistic(StatKind kind, const double* row,
                            const std::vector<std::vector<std::size_t>>& groups);

// p = (1 + #{b : |S_perm| >= |S_obs|}) / (1 + B), where one label shuffle per
// round is shared by every probeset. Each round derives its shuffle from
// (seed, round), so results do not depend on thread count. Probesets whose
// statistic is not computable get p = 1 and a degeneracy flag.
PermutationResult permutation_pvalues(const LabeledDataset& ds, StatKind kind,
                                      const PermutationPlan& plan);

// Benjamini-Hochberg step-up FDR.
std::vector<double> adjust_bh(const std::vector<double>& raw_p);
// min(m*p, 1).
std::vector<double> adjust_bonferroni(const std::vector<double>& raw_p);
// Hochberg step-up FWER.
std::vector<double> adjust_hochberg(const std::vector<double>& raw_p);

// One GeneScore per probeset with every adjustment populated, sorted by
// raw_p ascending (ties by probeset ID).
std::vector<GeneScore> rank_genes(const LabeledDataset& ds, StatKind kind,
                                  const PermutationPlan& plan);

// Row-z-scored expression of the top_n genes by FDR, rows in rank order,
// columns regrouped so each class is contiguous (class_set order). top_n
// beyond the gene count is clipped; callers that care should compare the
// returned row count against their request.
ExpressionMatrix heatmap_export(const LabeledDataset& ds, const std::vector<GeneScore>& scores,
                                std::size_t top_n = 40);

// Columns: probeset, statistic, raw_p, fdr, bonferroni, hochberg, rank.
std::string format_scores(const std::vector<GeneScore>& scores);
std::vector<GeneScore> parse_scores(const std::string& text);

}  // namespace biomark

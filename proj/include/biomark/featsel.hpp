#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biomark/learners.hpp"
#include "biomark/types.hpp"

namespace biomark {

enum class EvaluatorKind : std::uint8_t { cfs, wrapper };
enum class SearchKind : std::uint8_t { greedy, bestfirst, ranker };

const char* search_name(SearchKind k);
SearchKind search_from_name(const std::string& name);

struct FeatureSubset {
    std::vector<std::size_t> feature_indices;  // selection order
    std::vector<std::string> feature_ids;
    double score = 0.0;
    EvaluatorKind evaluator = EvaluatorKind::cfs;
    // (feature added, subset score after adding); strictly increasing for
    // greedy forward search
    std::vector<std::pair<std::string, double>> trace;
};

struct FeatureRanking {
    std::vector<std::size_t> feature_indices;  // most to least important
    std::vector<std::string> feature_ids;
    std::vector<double> criterion;  // squared-weight score at elimination time
    std::size_t training_rounds = 0;
};

// CFS merit (k * mean feature-class correlation) /
// sqrt(k + k(k-1) * mean |feature-feature correlation|). Feature-class
// correlation is the correlation ratio across classes; zero-variance
// features contribute 0.
double cfs_merit(const LabeledDataset& ds, const std::vector<std::size_t>& subset);

// Mean stratified-CV accuracy of the base learner on the subset's columns.
double wrapper_eval(const LabeledDataset& ds, const std::vector<std::size_t>& subset,
                    const ClassifierConfig& base_learner, int internal_folds,
                    std::uint64_t seed);

struct SubsetSearchConfig {
    EvaluatorKind evaluator = EvaluatorKind::cfs;
    int stale_limit = 5;  // best_first: consecutive non-improving expansions tolerated
    int internal_folds = 5;
    ClassifierConfig base_learner{.kind = ClassifierKind::decision_table};
    std::uint64_t seed = 0;
};

// Forward selection with strict improvement; candidate ties resolve to the
// lexicographically smallest probeset ID.
FeatureSubset greedy_stepwise(const LabeledDataset& ds, const SubsetSearchConfig& cfg);

// Priority-queue search over subsets expanding the best open node by
// single-feature additions; stops once more than stale_limit consecutive
// expansions fail to improve the global best (stale_limit = 0 reproduces
// greedy stopping). Returns the best subset seen.
FeatureSubset best_first(const LabeledDataset& ds, const SubsetSearchConfig& cfg);

// Recursive elimination on the one-vs-one linear SVM: each round trains on
// the surviving features, scores feature f by the sum over pair machines of
// w_f^2, and removes the lowest-scoring features. No rescaling between
// rounds. Ranking lists features in reverse elimination order.
FeatureRanking svm_rfe(const LabeledDataset& ds, int eliminate_per_iteration = 1,
                       double c = 1.0, double tol = 1e-3);

FeatureSubset select_top_k(const FeatureRanking& ranking, std::size_t k = 20);

std::string format_subset(const FeatureSubset& s);
std::string format_ranking(const FeatureRanking& r);

}  // namespace biomark

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biomark/featsel.hpp"
#include "biomark/learners.hpp"
#include "biomark/types.hpp"

namespace biomark {

struct FoldPlan {
    int k = 10;
    std::vector<int> assignment;  // fold index per sample
    std::uint64_t seed = 0;
};

// Within each class, samples are shuffled by a per-class stream of `seed`
// and dealt round-robin through a fold pointer that runs across classes, so
// fold sizes differ by at most 1 and per-class fold counts differ by at
// most 1.
FoldPlan stratified_folds(const std::vector<std::string>& labels, int k = 10,
                          std::uint64_t seed = 0);

struct ConfusionMatrix {
    std::vector<std::string> class_set;
    std::vector<std::size_t> counts;  // k x k row-major, rows = true class

    std::size_t at(std::size_t truth, std::size_t predicted) const {
        return counts[truth * class_set.size() + predicted];
    }
    std::size_t& at(std::size_t truth, std::size_t predicted) {
        return counts[truth * class_set.size() + predicted];
    }
    std::size_t n_instances() const;
    std::size_t correct() const;
    double accuracy() const;
};

ConfusionMatrix confusion(const std::vector<int>& predicted, const std::vector<int>& truth,
                          const std::vector<std::string>& class_set);
ConfusionMatrix confusion(const std::vector<std::string>& predicted,
                          const std::vector<std::string>& truth,
                          const std::vector<std::string>& class_set);

// (p_o - p_e) / (1 - p_e); errors when the matrix is empty or p_e = 1.
double kappa(const ConfusionMatrix& cm);

struct ProbErrors {
    double mae = 0.0, rmse = 0.0;
    double rae = 0.0, rrse = 0.0;  // percent, relative to the prior predictor
};

// Per-class averaged deviation from one-hot truth; the baseline row i is the
// class prior a prior-predictor would output for instance i.
ProbErrors prob_errors(const std::vector<std::vector<double>>& predictions,
                       const std::vector<int>& truth,
                       const std::vector<std::vector<double>>& baselines);
// Single shared prior baseline.
ProbErrors prob_errors(const std::vector<std::vector<double>>& predictions,
                       const std::vector<int>& truth, const std::vector<double>& prior);

enum class SelectorKind : std::uint8_t { wse, cfs, rsvm };
const char* selector_name(SelectorKind k);
SelectorKind selector_from_name(const std::string& name);

struct SelectorConfig {
    SelectorKind kind = SelectorKind::rsvm;
    SearchKind search = SearchKind::ranker;  // greedy/bestfirst for wse and cfs
    std::size_t top_k = 20;                  // rsvm
    int eliminate_per_iteration = 1;         // rsvm
    double svm_c = 1.0;                      // rsvm
    int internal_folds = 5;                  // wse
    int stale_limit = 5;                     // bestfirst
    ClassifierConfig wrapper_learner{.kind = ClassifierKind::decision_table};
    std::uint64_t seed = 0;
};

// Selected feature indices into the dataset's probeset rows.
std::vector<std::size_t> run_selector(const LabeledDataset& ds, const SelectorConfig& cfg);

struct EvalReport {
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    double kappa_stat = 0.0;
    double mae = 0.0, rmse = 0.0, rae = 0.0, rrse = 0.0;
    std::size_t n_instances = 0;
    bool complete = true;
    std::vector<int> failed_folds;
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<std::vector<std::string>> fold_features;  // selected per fold
};

// The guarded protocol: each fold runs the selector on its training rows
// only, fits the classifier on those rows restricted to the selected
// features, and predicts the held-out rows; held-out predictions are pooled
// into one report. A fold whose selector fails aborts the run unless
// continue_on_failure is set, in which case the report is flagged
// incomplete.
EvalReport nested_cv(const LabeledDataset& ds, const SelectorConfig& selector,
                     const ClassifierConfig& classifier, const FoldPlan& folds,
                     bool continue_on_failure = false);

std::string format_report(const EvalReport& report);
std::string report_to_json_string(const EvalReport& report);

}  // namespace biomark

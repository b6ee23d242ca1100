#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "biomark/error.hpp"
#include "biomark/evaluate.hpp"
#include "oracles.hpp"

using namespace biomark;

namespace {

ConfusionMatrix from_rows(const std::vector<std::vector<std::size_t>>& rows,
                          const std::vector<std::string>& class_set) {
    ConfusionMatrix cm;
    cm.class_set = class_set;
    for (const auto& row : rows) cm.counts.insert(cm.counts.end(), row.begin(), row.end());
    return cm;
}

std::vector<std::string> paper_labels() {
    std::vector<std::string> labels;
    for (int i = 0; i < 22; ++i) labels.push_back("HC");
    for (int i = 0; i < 33; ++i) labels.push_back("ND");
    for (int i = 0; i < 50; ++i) labels.push_back("PD");
    return labels;
}

}  // namespace

TEST_CASE("stratified folds balance the 22/33/50 split over 10 folds") {
    const auto labels = paper_labels();
    const FoldPlan plan = stratified_folds(labels, 10, 4);
    REQUIRE(plan.assignment.size() == 105);

    std::vector<std::size_t> fold_sizes(10, 0);
    std::vector<std::size_t> pd_counts(10, 0), hc_counts(10, 0), nd_counts(10, 0);
    for (std::size_t s = 0; s < labels.size(); ++s) {
        const auto f = static_cast<std::size_t>(plan.assignment[s]);
        fold_sizes[f]++;
        if (labels[s] == "PD") pd_counts[f]++;
        if (labels[s] == "HC") hc_counts[f]++;
        if (labels[s] == "ND") nd_counts[f]++;
    }
    for (std::size_t f = 0; f < 10; ++f) {
        CHECK(fold_sizes[f] >= 10);
        CHECK(fold_sizes[f] <= 11);
        CHECK(pd_counts[f] == 5);
        CHECK(hc_counts[f] >= 2);
        CHECK(hc_counts[f] <= 3);
        CHECK(nd_counts[f] >= 3);
        CHECK(nd_counts[f] <= 4);
    }

    // determinism and seed sensitivity
    CHECK(stratified_folds(labels, 10, 4).assignment == plan.assignment);
    CHECK(stratified_folds(labels, 10, 5).assignment != plan.assignment);
}

TEST_CASE("leave-one-out folds put one sample in each fold") {
    const std::vector<std::string> labels{"A", "B", "A", "B", "A", "B"};
    const FoldPlan plan = stratified_folds(labels, 6, 1);
    std::set<int> used(plan.assignment.begin(), plan.assignment.end());
    CHECK(used.size() == 6);
}

TEST_CASE("stratified fold invariants hold for random label vectors") {
    std::mt19937 gen(12);
    for (int trial = 0; trial < 150; ++trial) {
        std::uniform_int_distribution<std::size_t> n_pick(4, 60);
        std::uniform_int_distribution<int> k_classes(2, 4);
        const std::size_t n = n_pick(gen);
        const int kc = k_classes(gen);
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < n; ++i)
            labels.push_back(std::string(1, static_cast<char>('A' + gen() % kc)));
        std::uniform_int_distribution<int> k_pick(2, static_cast<int>(n));
        const int k = k_pick(gen);
        const FoldPlan plan = stratified_folds(labels, k, gen());

        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (int a : plan.assignment) sizes[static_cast<std::size_t>(a)]++;
        CHECK(*std::max_element(sizes.begin(), sizes.end()) -
                  *std::min_element(sizes.begin(), sizes.end()) <=
              1);

        for (const auto& cls : distinct_labels(labels)) {
            std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
            for (std::size_t s = 0; s < n; ++s)
                if (labels[s] == cls) counts[static_cast<std::size_t>(plan.assignment[s])]++;
            CHECK(*std::max_element(counts.begin(), counts.end()) -
                      *std::min_element(counts.begin(), counts.end()) <=
                  1);
        }
    }
}

TEST_CASE("fold plan rejects bad parameters") {
    const std::vector<std::string> labels{"A", "B", "A", "B"};
    CHECK_THROWS_AS(stratified_folds(labels, 1, 0), ConfigError);
    CHECK_THROWS_AS(stratified_folds(labels, 5, 0), ConfigError);
}

TEST_CASE("confusion counts instances by true and predicted class") {
    // published RSVM block
    const auto cm = from_rows({{16, 0, 6}, {2, 26, 5}, {1, 4, 45}}, {"HC", "ND", "PD"});
    CHECK(cm.n_instances() == 105);
    CHECK(cm.correct() == 87);
    CHECK(cm.accuracy() == doctest::Approx(0.828571).epsilon(1e-4));

    const ConfusionMatrix diag =
        confusion(std::vector<int>{0, 1, 2}, std::vector<int>{0, 1, 2}, {"a", "b", "c"});
    CHECK(diag.correct() == 3);

    const ConfusionMatrix empty = confusion(std::vector<int>{}, {}, {"a", "b"});
    CHECK(empty.n_instances() == 0);
    for (std::size_t v : empty.counts) CHECK(v == 0);
}

TEST_CASE("kappa reproduces the three published confusion blocks") {
    const auto rsvm = from_rows({{16, 0, 6}, {2, 26, 5}, {1, 4, 45}}, {"HC", "ND", "PD"});
    CHECK(std::abs(kappa(rsvm) - 0.7228) <= 5e-4);
    CHECK(std::abs(rsvm.accuracy() - 0.828571) <= 5e-6);

    const auto wse = from_rows({{4, 6, 12}, {0, 17, 16}, {0, 2, 48}}, {"HC", "ND", "PD"});
    CHECK(std::abs(kappa(wse) - 0.4011) <= 5e-4);
    CHECK(std::abs(wse.accuracy() - 0.657143) <= 5e-6);

    const auto cfs = from_rows({{9, 3, 5}, {1, 19, 5}, {3, 4, 31}}, {"HC", "ND", "PD"});
    CHECK(cfs.n_instances() == 80);
    CHECK(std::abs(kappa(cfs) - 0.577) <= 5e-4);
    CHECK(std::abs(cfs.accuracy() - 0.7375) <= 5e-6);
}

TEST_CASE("kappa edge cases") {
    const auto perfect = from_rows({{10, 0}, {0, 5}}, {"a", "b"});
    CHECK(kappa(perfect) == doctest::Approx(1.0).epsilon(1e-12));

    const auto degenerate = from_rows({{7, 0}, {0, 0}}, {"a", "b"});
    CHECK_THROWS_AS(kappa(degenerate), AlgorithmError);

    ConfusionMatrix empty;
    empty.class_set = {"a", "b"};
    empty.counts.assign(4, 0);
    CHECK_THROWS_AS(kappa(empty), DataError);
}

TEST_CASE("prob_errors frozen cases") {
    // perfect one-hot predictions
    const std::vector<std::vector<double>> perfect{{1, 0}, {0, 1}};
    const std::vector<int> truth{0, 1};
    const std::vector<double> prior{0.5, 0.5};
    const ProbErrors zero = prob_errors(perfect, truth, prior);
    CHECK(zero.mae == 0.0);
    CHECK(zero.rmse == 0.0);

    // predicting the prior exactly scores 100% relative error
    const std::vector<std::vector<double>> prior_pred{{0.5, 0.5}, {0.5, 0.5}};
    const ProbErrors base = prob_errors(prior_pred, truth, prior);
    CHECK(base.rae == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(base.rrse == doctest::Approx(100.0).epsilon(1e-12));

    // hand-computed single instance: p=[0.8, 0.2], truth first class
    const ProbErrors hand = prob_errors({{0.8, 0.2}}, {0}, prior);
    CHECK(hand.mae == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(hand.rmse == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("prob_errors validates distributions") {
    const std::vector<double> prior{0.5, 0.5};
    CHECK_THROWS_AS(prob_errors({{0.9, 0.3}}, {0}, prior), DataError);
    CHECK_THROWS_AS(prob_errors({{1.2, -0.2}}, {0}, prior), DataError);
}

namespace {

// dataset where one feature encodes the class exactly and the rest is noise
LabeledDataset separable_dataset(std::size_t per_class, std::size_t n_noise,
                                 unsigned rng_seed) {
    std::mt19937 gen(rng_seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < per_class; ++i) labels.push_back("A");
    for (std::size_t i = 0; i < per_class; ++i) labels.push_back("B");
    const std::size_t n = labels.size();
    std::vector<std::vector<double>> rows;
    std::vector<double> informative(n);
    for (std::size_t i = 0; i < n; ++i) informative[i] = i < per_class ? -3.0 : 3.0;
    rows.push_back(informative);
    for (std::size_t f = 0; f < n_noise; ++f) {
        std::vector<double> row(n);
        for (double& v : row) v = noise(gen);
        rows.push_back(row);
    }
    return oracle::make_dataset(rows, labels);
}

}  // namespace

TEST_CASE("nested_cv is perfect on a separable dataset") {
    const LabeledDataset ds = separable_dataset(10, 6, 3);
    SelectorConfig sel;
    sel.kind = SelectorKind::rsvm;
    sel.top_k = 1;
    sel.seed = 17;
    ClassifierConfig clf;
    clf.kind = ClassifierKind::linear_svm;
    const FoldPlan folds = stratified_folds(ds.labels, 5, 23);
    const EvalReport report = nested_cv(ds, sel, clf, folds);
    CHECK(report.accuracy == doctest::Approx(1.0));
    CHECK(report.kappa_stat == doctest::Approx(1.0));
    CHECK(report.n_instances == 20);
    CHECK(report.complete);
    // the informative feature is picked in every fold
    for (const auto& fold : report.fold_features) {
        REQUIRE(fold.size() == 1);
        CHECK(fold[0] == "G1_at");
    }
}

TEST_CASE("nested_cv metrics recompute from the stored confusion matrix") {
    const LabeledDataset ds = separable_dataset(12, 10, 5);
    SelectorConfig sel;
    sel.kind = SelectorKind::rsvm;
    sel.top_k = 3;
    ClassifierConfig clf;
    clf.kind = ClassifierKind::naive_bayes;
    const FoldPlan folds = stratified_folds(ds.labels, 4, 2);
    const EvalReport report = nested_cv(ds, sel, clf, folds);
    CHECK(report.accuracy == doctest::Approx(report.confusion.accuracy()).epsilon(1e-9));
    CHECK(report.kappa_stat == doctest::Approx(kappa(report.confusion)).epsilon(1e-9));
    CHECK(report.n_instances == report.confusion.n_instances());
}

TEST_CASE("nested_cv aborts or flags when every fold fails") {
    // constant features: CFS greedy finds nothing informative in any fold
    const auto ds = oracle::make_dataset(
        {{1, 1, 1, 1, 1, 1, 1, 1}, {2, 2, 2, 2, 2, 2, 2, 2}},
        {"A", "A", "A", "A", "B", "B", "B", "B"});
    SelectorConfig sel;
    sel.kind = SelectorKind::cfs;
    sel.search = SearchKind::greedy;
    ClassifierConfig clf;
    clf.kind = ClassifierKind::naive_bayes;
    const FoldPlan folds = stratified_folds(ds.labels, 2, 0);
    CHECK_THROWS_AS(nested_cv(ds, sel, clf, folds), AlgorithmError);
    CHECK_THROWS_AS(nested_cv(ds, sel, clf, folds, true), AlgorithmError);
}

TEST_CASE("nested_cv flags partially failed runs when asked to continue") {
    // fold 0's training half is constant (CFS fails), fold 1's has signal
    const auto ds = oracle::make_dataset({{0, 0, 5, 5, 3, 3, 3, 3}},
                                         {"A", "A", "B", "B", "A", "A", "B", "B"});
    FoldPlan plan;
    plan.k = 2;
    plan.assignment = {0, 0, 0, 0, 1, 1, 1, 1};
    SelectorConfig sel;
    sel.kind = SelectorKind::cfs;
    sel.search = SearchKind::greedy;
    ClassifierConfig clf;
    clf.kind = ClassifierKind::naive_bayes;

    CHECK_THROWS_AS(nested_cv(ds, sel, clf, plan, false), AlgorithmError);

    const EvalReport report = nested_cv(ds, sel, clf, plan, true);
    CHECK(!report.complete);
    CHECK(report.failed_folds == std::vector<int>{0});
    CHECK(report.n_instances == 4);
}

TEST_CASE("nested_cv works with every classifier kind") {
    const LabeledDataset ds = separable_dataset(10, 4, 21);
    SelectorConfig sel;
    sel.kind = SelectorKind::rsvm;
    sel.top_k = 1;
    sel.seed = 5;
    const FoldPlan folds = stratified_folds(ds.labels, 5, 11);
    for (ClassifierKind kind : {ClassifierKind::naive_bayes, ClassifierKind::linear_svm,
                                ClassifierKind::lvq, ClassifierKind::decision_table}) {
        ClassifierConfig clf;
        clf.kind = kind;
        clf.lvq_epochs = 80;
        clf.seed = 2;
        const EvalReport report = nested_cv(ds, sel, clf, folds);
        // a 6-sigma gap on the informative feature is learnable by all four
        CHECK(report.accuracy >= 0.9);
        CHECK(report.n_instances == 20);
    }
}

TEST_CASE("nested_cv accepts the subset-search selectors") {
    const LabeledDataset ds = separable_dataset(10, 3, 27);
    ClassifierConfig clf;
    clf.kind = ClassifierKind::naive_bayes;
    const FoldPlan folds = stratified_folds(ds.labels, 4, 19);

    SelectorConfig cfs_sel;
    cfs_sel.kind = SelectorKind::cfs;
    cfs_sel.search = SearchKind::greedy;
    const EvalReport cfs_report = nested_cv(ds, cfs_sel, clf, folds);
    CHECK(cfs_report.accuracy >= 0.9);

    SelectorConfig wse_sel;
    wse_sel.kind = SelectorKind::wse;
    wse_sel.search = SearchKind::greedy;
    wse_sel.internal_folds = 5;
    const EvalReport wse_report = nested_cv(ds, wse_sel, clf, folds);
    CHECK(wse_report.accuracy >= 0.9);
}

TEST_CASE("report formatting mirrors the summary-plus-confusion layout") {
    const LabeledDataset ds = separable_dataset(8, 3, 13);
    SelectorConfig sel;
    sel.kind = SelectorKind::rsvm;
    sel.top_k = 2;
    ClassifierConfig clf;
    clf.kind = ClassifierKind::linear_svm;
    const FoldPlan folds = stratified_folds(ds.labels, 4, 8);
    const EvalReport report = nested_cv(ds, sel, clf, folds);
    const std::string text = format_report(report);
    CHECK(text.find("=== Stratified cross-validation ===") != std::string::npos);
    CHECK(text.find("Kappa statistic") != std::string::npos);
    CHECK(text.find("Root relative squared error") != std::string::npos);
    CHECK(text.find("=== Confusion Matrix ===") != std::string::npos);
    CHECK(text.find("<-- classified as") != std::string::npos);
    CHECK(text.find("Total Number of Instances\t16") != std::string::npos);

    const std::string json_text = report_to_json_string(report);
    CHECK(json_text.find("\"kappa\"") != std::string::npos);
    CHECK(json_text.find("\"confusion\"") != std::string::npos);
}

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "biomark/error.hpp"
#include "biomark/featsel.hpp"
#include "biomark/stats.hpp"
#include "oracles.hpp"

using namespace biomark;

namespace {

// labels with two balanced classes over n samples
std::vector<std::string> two_class_labels(std::size_t n) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back(i < n / 2 ? "A" : "B");
    return labels;
}

SubsetSearchConfig cfs_search() {
    SubsetSearchConfig cfg;
    cfg.evaluator = EvaluatorKind::cfs;
    cfg.seed = 3;
    return cfg;
}

}  // namespace

TEST_CASE("cfs merit reduces to r_cf for singletons") {
    std::mt19937 gen(5);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> feature;
    std::vector<std::string> labels = two_class_labels(20);
    for (std::size_t i = 0; i < 20; ++i) feature.push_back((i < 10 ? 0.0 : 2.0) + noise(gen));
    const auto ds = oracle::make_dataset({feature}, labels);
    const auto cls = ds.class_indices();
    const double eta = oracle::eta(feature, cls, 2);
    CHECK(cfs_merit(ds, {0}) == doctest::Approx(eta).epsilon(1e-12));
}

TEST_CASE("cfs merit matches the direct formula on random subsets") {
    std::mt19937 gen(7);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t n = 18, n_features = 8;
    std::vector<std::string> labels = two_class_labels(n);
    std::vector<std::vector<double>> rows(n_features, std::vector<double>(n));
    for (auto& row : rows)
        for (double& v : row) v = noise(gen);
    const auto ds = oracle::make_dataset(rows, labels);
    const auto cls = ds.class_indices();

    std::uniform_int_distribution<std::size_t> pick(0, n_features - 1);
    for (int trial = 0; trial < 200; ++trial) {
        std::set<std::size_t> chosen;
        const std::size_t want = 1 + pick(gen) % 5;
        while (chosen.size() < want) chosen.insert(pick(gen));
        const std::vector<std::size_t> subset(chosen.begin(), chosen.end());

        double sum_cf = 0.0, sum_ff = 0.0;
        for (std::size_t f : subset) sum_cf += oracle::eta(rows[f], cls, 2);
        for (std::size_t i = 0; i < subset.size(); ++i)
            for (std::size_t j = i + 1; j < subset.size(); ++j)
                sum_ff += std::abs(oracle::pearson(rows[subset[i]], rows[subset[j]]));
        const double k = static_cast<double>(subset.size());
        const double expected = sum_cf / std::sqrt(k + 2.0 * sum_ff);
        CHECK(cfs_merit(ds, subset) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("redundant feature with weaker class signal never raises the merit") {
    std::mt19937 gen(11);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 24;
        std::vector<std::string> labels = two_class_labels(n);
        std::vector<double> good(n);
        for (std::size_t i = 0; i < n; ++i) good[i] = (i < n / 2 ? 0.0 : 2.0) + noise(gen);
        std::vector<double> copy = good;  // perfectly correlated duplicate
        const auto ds = oracle::make_dataset({good, copy}, labels);
        CHECK(cfs_merit(ds, {0, 1}) <= cfs_merit(ds, {0}) + 1e-12);
    }
}

TEST_CASE("wrapper accuracy: informative feature wins, noise stays near chance") {
    std::vector<std::string> labels = two_class_labels(30);
    std::vector<double> label_feature;
    for (const auto& l : labels) label_feature.push_back(l == "A" ? 0.0 : 1.0);
    std::mt19937 gen(13);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> junk(30);
    for (double& v : junk) v = noise(gen);
    const auto ds = oracle::make_dataset({label_feature, junk}, labels);

    ClassifierConfig base;
    base.kind = ClassifierKind::decision_table;
    CHECK(wrapper_eval(ds, {0}, base, 5, 3) == doctest::Approx(1.0));
    const double chance = wrapper_eval(ds, {1}, base, 5, 3);
    CHECK(chance >= 0.3);
    CHECK(chance <= 0.7);
    CHECK(wrapper_eval(ds, {1}, base, 5, 3) == chance);  // same seed, same answer
}

TEST_CASE("wrapper requires enough samples per class for its folds") {
    const auto ds = oracle::make_dataset({{1, 2, 3, 4, 5, 6}},
                                         {"A", "A", "A", "B", "B", "B"});
    ClassifierConfig base;
    base.kind = ClassifierKind::decision_table;
    CHECK_THROWS_AS(wrapper_eval(ds, {0}, base, 5, 1), DataError);
}

TEST_CASE("greedy stepwise stops at the informative singleton") {
    std::mt19937 gen(17);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t n = 30;
    std::vector<std::string> labels = two_class_labels(n);
    std::vector<double> strong(n);
    for (std::size_t i = 0; i < n; ++i) strong[i] = (i < n / 2 ? 0.0 : 8.0) + 0.05 * noise(gen);
    std::vector<std::vector<double>> rows{strong};
    for (int f = 0; f < 6; ++f) {
        std::vector<double> junk(n);
        for (double& v : junk) v = noise(gen);
        rows.push_back(junk);
    }
    const auto ds = oracle::make_dataset(rows, labels);
    const FeatureSubset subset = greedy_stepwise(ds, cfs_search());
    REQUIRE(subset.feature_indices.size() >= 1);
    CHECK(subset.feature_indices[0] == 0);
    CHECK(subset.trace.size() == subset.feature_indices.size());
    for (std::size_t i = 1; i < subset.trace.size(); ++i)
        CHECK(subset.trace[i].second > subset.trace[i - 1].second);
    CHECK(subset.score == subset.trace.back().second);
}

TEST_CASE("greedy admits only one copy of duplicated features, smallest ID first") {
    std::mt19937 gen(19);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t n = 30;
    std::vector<std::string> labels = two_class_labels(n);
    std::vector<double> strong(n);
    for (std::size_t i = 0; i < n; ++i) strong[i] = (i < n / 2 ? 0.0 : 6.0) + 0.1 * noise(gen);
    const auto ds = oracle::make_dataset({strong, strong}, labels);  // G1_at, G2_at identical
    const FeatureSubset subset = greedy_stepwise(ds, cfs_search());
    CHECK(subset.feature_indices == std::vector<std::size_t>{0});
    CHECK(subset.feature_ids == std::vector<std::string>{"G1_at"});
}

TEST_CASE("greedy errors when nothing is informative") {
    const auto ds = oracle::make_dataset({{3, 3, 3, 3}, {7, 7, 7, 7}},
                                         {"A", "A", "B", "B"});
    CHECK_THROWS_AS(greedy_stepwise(ds, cfs_search()), AlgorithmError);
}

TEST_CASE("best-first never scores below greedy and matches it at stale_limit 0") {
    std::mt19937 gen(23);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 24;
        std::vector<std::string> labels = two_class_labels(n);
        std::vector<std::vector<double>> rows;
        for (int f = 0; f < 6; ++f) {
            std::vector<double> row(n);
            const double shift = (f % 3 == 0) ? 1.5 : 0.0;
            for (std::size_t i = 0; i < n; ++i)
                row[i] = (i < n / 2 ? 0.0 : shift) + noise(gen);
            rows.push_back(row);
        }
        const auto ds = oracle::make_dataset(rows, labels);
        const auto cfg = cfs_search();

        FeatureSubset greedy;
        bool greedy_ok = true;
        try {
            greedy = greedy_stepwise(ds, cfg);
        } catch (const AlgorithmError&) {
            greedy_ok = false;
        }
        if (!greedy_ok) continue;

        const FeatureSubset bf = best_first(ds, cfg);
        CHECK(bf.score >= greedy.score - 1e-12);

        SubsetSearchConfig strict = cfg;
        strict.stale_limit = 0;
        const FeatureSubset bf0 = best_first(ds, strict);
        CHECK(bf0.score == doctest::Approx(greedy.score).epsilon(1e-12));
        CHECK(bf0.feature_indices == greedy.feature_indices);
    }
}

TEST_CASE("best-first finds the exhaustive optimum on most small instances") {
    std::mt19937 gen(29);
    std::normal_distribution<double> noise(0.0, 1.0);
    int optimal = 0, total = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 20, n_features = 5;
        std::vector<std::string> labels = two_class_labels(n);
        std::vector<std::vector<double>> rows;
        for (std::size_t f = 0; f < n_features; ++f) {
            std::vector<double> row(n);
            std::uniform_real_distribution<double> shift_pick(0.0, 1.5);
            const double shift = shift_pick(gen);
            for (std::size_t i = 0; i < n; ++i) row[i] = (i < n / 2 ? 0.0 : shift) + noise(gen);
            rows.push_back(row);
        }
        const auto ds = oracle::make_dataset(rows, labels);

        // exhaustive oracle over all 31 nonempty subsets
        double best_merit = 0.0;
        for (unsigned mask = 1; mask < (1u << n_features); ++mask) {
            std::vector<std::size_t> subset;
            for (std::size_t f = 0; f < n_features; ++f)
                if (mask & (1u << f)) subset.push_back(f);
            best_merit = std::max(best_merit, cfs_merit(ds, subset));
        }

        try {
            const FeatureSubset bf = best_first(ds, cfs_search());
            ++total;
            if (bf.score >= best_merit - 1e-9) ++optimal;
        } catch (const AlgorithmError&) {
            // nothing informative in this draw; skip
        }
    }
    REQUIRE(total >= 20);
    CHECK(static_cast<double>(optimal) / static_cast<double>(total) >= 0.9);
}

namespace {

LabeledDataset planted_two(std::mt19937& gen, std::size_t n_noise) {
    // two informative features (2-sigma shifts) in a sea of noise
    const std::size_t per_class = 20;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < per_class; ++i) labels.push_back("A");
    for (std::size_t i = 0; i < per_class; ++i) labels.push_back("B");
    const std::size_t n = labels.size();
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    for (std::size_t f = 0; f < n_noise + 2; ++f) {
        std::vector<double> row(n);
        const bool informative = f == 10 || f == 31;
        for (std::size_t i = 0; i < n; ++i) {
            const double shift = informative && i >= per_class ? 2.0 : 0.0;
            row[i] = shift + noise(gen);
        }
        rows.push_back(row);
    }
    return oracle::make_dataset(rows, labels);
}

}  // namespace

TEST_CASE("svm_rfe ranks planted features near the top across seeds") {
    std::mt19937 gen(31);
    int hits5 = 0, hits10 = 0;
    const int trials = 8;
    for (int t = 0; t < trials; ++t) {
        const auto ds = planted_two(gen, 50);
        const FeatureRanking ranking = svm_rfe(ds, 1, 1.0);
        CHECK(ranking.feature_indices.size() == 52);
        CHECK(ranking.training_rounds == 51);  // n-1 trainings for n features

        // permutation of the input features
        std::set<std::size_t> seen(ranking.feature_indices.begin(),
                                   ranking.feature_indices.end());
        CHECK(seen.size() == 52);

        std::set<std::size_t> top5(ranking.feature_indices.begin(),
                                   ranking.feature_indices.begin() + 5);
        std::set<std::size_t> top10(ranking.feature_indices.begin(),
                                    ranking.feature_indices.begin() + 10);
        if (top5.count(10) && top5.count(31)) ++hits5;
        if (top10.count(10) && top10.count(31)) ++hits10;
    }
    CHECK(hits5 >= 5);
    CHECK(hits10 >= 6);
}

TEST_CASE("svm_rfe with a full-width elimination equals single-pass w^2 ordering") {
    std::mt19937 gen(37);
    const auto ds = planted_two(gen, 10);
    const std::size_t n_features = ds.matrix.n_probesets();
    const FeatureRanking one_shot =
        svm_rfe(ds, static_cast<int>(n_features), 1.0);
    CHECK(one_shot.training_rounds == 1);
    // criterion must be sorted descending in ranking order
    for (std::size_t i = 1; i < one_shot.criterion.size(); ++i)
        CHECK(one_shot.criterion[i - 1] >= one_shot.criterion[i] - 1e-15);
}

TEST_CASE("svm_rfe keeps duplicated informative columns adjacent") {
    std::mt19937 gen(41);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t n = 24;
    std::vector<std::string> labels = two_class_labels(n);
    std::vector<double> strong(n);
    for (std::size_t i = 0; i < n; ++i) strong[i] = i < n / 2 ? 0.0 : 2.0;  // noise-free
    std::vector<std::vector<double>> rows;
    for (int f = 0; f < 8; ++f) {
        std::vector<double> row(n);
        for (double& v : row) v = noise(gen);
        rows.push_back(row);
    }
    rows[2] = strong;
    rows[6] = strong;
    const auto ds = oracle::make_dataset(rows, labels);
    const FeatureRanking ranking = svm_rfe(ds, 1, 1.0);
    std::size_t pos2 = 0, pos6 = 0;
    for (std::size_t i = 0; i < ranking.feature_indices.size(); ++i) {
        if (ranking.feature_indices[i] == 2) pos2 = i;
        if (ranking.feature_indices[i] == 6) pos6 = i;
    }
    CHECK((pos2 > pos6 ? pos2 - pos6 : pos6 - pos2) <= 2);
}

TEST_CASE("svm_rfe is deterministic") {
    std::mt19937 gen(43);
    const auto ds = planted_two(gen, 20);
    const FeatureRanking a = svm_rfe(ds, 1, 1.0);
    const FeatureRanking b = svm_rfe(ds, 1, 1.0);
    CHECK(a.feature_indices == b.feature_indices);
    CHECK(a.criterion == b.criterion);
}

TEST_CASE("select_top_k slices the ranking and validates k") {
    FeatureRanking ranking;
    ranking.feature_indices = {4, 2, 0, 3, 1};
    ranking.feature_ids = {"e", "c", "a", "d", "b"};
    ranking.criterion = {5, 4, 3, 2, 1};

    const FeatureSubset all = select_top_k(ranking, 5);
    CHECK(all.feature_indices == ranking.feature_indices);
    const FeatureSubset one = select_top_k(ranking, 1);
    CHECK(one.feature_ids == std::vector<std::string>{"e"});
    CHECK_THROWS_AS(select_top_k(ranking, 0), ConfigError);
    CHECK_THROWS_AS(select_top_k(ranking, 6), ConfigError);

    // the configuration mirrored from the published RSVM subset size
    FeatureRanking wide;
    for (std::size_t i = 0; i < 40; ++i) {
        wide.feature_indices.push_back(i);
        wide.feature_ids.push_back("f" + std::to_string(i));
        wide.criterion.push_back(40.0 - static_cast<double>(i));
    }
    CHECK(select_top_k(wide).feature_indices.size() == 20);
}

TEST_CASE("subset and ranking serialization") {
    FeatureSubset s;
    s.feature_ids = {"x_at", "y_at"};
    s.feature_indices = {0, 1};
    s.score = 0.75;
    s.trace = {{"x_at", 0.5}, {"y_at", 0.75}};
    const std::string text = format_subset(s);
    CHECK(text == "feature_id\tscore\nx_at\t0.5\ny_at\t0.75\n");

    FeatureRanking r;
    r.feature_ids = {"x_at", "y_at"};
    r.feature_indices = {1, 0};
    r.criterion = {2.0, 1.0};
    const std::string rt = format_ranking(r);
    CHECK(rt == "feature_id\trank\tcriterion\nx_at\t1\t2\ny_at\t2\t1\n");
}

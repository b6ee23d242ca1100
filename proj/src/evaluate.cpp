#include "biomark/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "biomark/error.hpp"
#include "biomark/io.hpp"
#include "biomark/rng.hpp"

namespace biomark {

using nlohmann::json;

FoldPlan stratified_folds(const std::vector<std::string>& labels, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("bad_fold_count", "fold count must be >= 2");
    if (static_cast<std::size_t>(k) > labels.size())
        throw ConfigError("k_exceeds_samples", "fold count exceeds sample count");
    const auto class_set = distinct_labels(labels);
    if (class_set.empty()) throw DataError("no_samples", "no samples to fold");

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignment.assign(labels.size(), -1);

    std::size_t pointer = 0;  // runs across classes so total fold sizes stay balanced
    for (std::size_t c = 0; c < class_set.size(); ++c) {
        std::vector<std::size_t> members;
        for (std::size_t s = 0; s < labels.size(); ++s)
            if (labels[s] == class_set[c]) members.push_back(s);
        Rng rng(derive_seed(seed, c));
        rng.shuffle(members);
        for (std::size_t m : members) {
            plan.assignment[m] = static_cast<int>(pointer % static_cast<std::size_t>(k));
            ++pointer;
        }
    }
    return plan;
}

std::size_t ConfusionMatrix::n_instances() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::correct() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < class_set.size(); ++i) c += at(i, i);
    return c;
}

double ConfusionMatrix::accuracy() const {
    const std::size_t n = n_instances();
    if (n == 0) throw DataError("empty_confusion", "confusion matrix has no instances");
    return static_cast<double>(correct()) / static_cast<double>(n);
}

ConfusionMatrix confusion(const std::vector<int>& predicted, const std::vector<int>& truth,
                          const std::vector<std::string>& class_set) {
    if (predicted.size() != truth.size())
        throw DataError("length_mismatch", "prediction and truth lengths differ");
    ConfusionMatrix cm;
    cm.class_set = class_set;
    cm.counts.assign(class_set.size() * class_set.size(), 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i], p = predicted[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= class_set.size() ||
            static_cast<std::size_t>(p) >= class_set.size())
            throw DataError("unknown_label", "label index outside class set");
        cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p))++;
    }
    return cm;
}

ConfusionMatrix confusion(const std::vector<std::string>& predicted,
                          const std::vector<std::string>& truth,
                          const std::vector<std::string>& class_set) {
    std::unordered_map<std::string, int> index;
    for (std::size_t c = 0; c < class_set.size(); ++c) index[class_set[c]] = static_cast<int>(c);
    auto to_idx = [&](const std::vector<std::string>& v) {
        std::vector<int> out;
        out.reserve(v.size());
        for (const auto& s : v) {
            auto it = index.find(s);
            if (it == index.end())
                throw DataError("unknown_label", "label '" + s + "' not in class set");
            out.push_back(it->second);
        }
        return out;
    };
    return confusion(to_idx(predicted), to_idx(truth), class_set);
}

double kappa(const ConfusionMatrix& cm) {
    const std::size_t n = cm.n_instances();
    if (n == 0) throw DataError("empty_confusion", "kappa needs at least one instance");
    const std::size_t k = cm.class_set.size();
    const double dn = static_cast<double>(n);
    const double p_o = static_cast<double>(cm.correct()) / dn;
    double p_e = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        double row = 0.0, col = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            row += static_cast<double>(cm.at(c, j));
            col += static_cast<double>(cm.at(j, c));
        }
        p_e += (row / dn) * (col / dn);
    }
    if (p_e >= 1.0)
        throw AlgorithmError("kappa_undefined",
                             "expected agreement is 1; kappa is undefined");
    return (p_o - p_e) / (1.0 - p_e);
}

namespace {

void check_distribution(const std::vector<double>& p, const char* what) {
    double total = 0.0;
    for (double v : p) {
        if (!(v >= -1e-12))
            throw DataError("not_a_distribution", std::string(what) + " has a negative entry");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw DataError("not_a_distribution",
                        std::string(what) + " does not sum to 1 (got " + format_value(total) + ")");
}

}  // namespace

ProbErrors prob_errors(const std::vector<std::vector<double>>& predictions,
                       const std::vector<int>& truth,
                       const std::vector<std::vector<double>>& baselines) {
    const std::size_t n = predictions.size();
    if (n == 0) throw DataError("no_predictions", "prob_errors needs at least one prediction");
    if (truth.size() != n || baselines.size() != n)
        throw DataError("length_mismatch", "prediction, truth and baseline lengths differ");
    const std::size_t k = predictions[0].size();

    double abs_sum = 0.0, sq_sum = 0.0, abs_base = 0.0, sq_base = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (predictions[i].size() != k || baselines[i].size() != k)
            throw DataError("length_mismatch", "ragged prediction rows");
        check_distribution(predictions[i], "prediction");
        check_distribution(baselines[i], "baseline");
        const auto t = static_cast<std::size_t>(truth[i]);
        if (t >= k) throw DataError("unknown_label", "truth index outside class set");
        for (std::size_t c = 0; c < k; ++c) {
            const double y = c == t ? 1.0 : 0.0;
            const double dp = predictions[i][c] - y;
            const double db = baselines[i][c] - y;
            abs_sum += std::abs(dp);
            sq_sum += dp * dp;
            abs_base += std::abs(db);
            sq_base += db * db;
        }
    }
    const double cells = static_cast<double>(n * k);
    ProbErrors e;
    e.mae = abs_sum / cells;
    e.rmse = std::sqrt(sq_sum / cells);
    const double mae0 = abs_base / cells;
    const double rmse0 = std::sqrt(sq_base / cells);
    if (mae0 <= 0.0 || rmse0 <= 0.0)
        throw AlgorithmError("degenerate_baseline",
                             "prior predictor has zero error; relative errors undefined");
    e.rae = 100.0 * e.mae / mae0;
    e.rrse = 100.0 * e.rmse / rmse0;
    return e;
}

ProbErrors prob_errors(const std::vector<std::vector<double>>& predictions,
                       const std::vector<int>& truth, const std::vector<double>& prior) {
    return prob_errors(predictions, truth,
                       std::vector<std::vector<double>>(predictions.size(), prior));
}

const char* selector_name(SelectorKind k) {
    switch (k) {
        case SelectorKind::wse: return "wse";
        case SelectorKind::cfs: return "cfs";
        case SelectorKind::rsvm: return "rsvm";
    }
    return "?";
}

SelectorKind selector_from_name(const std::string& name) {
    if (name == "wse") return SelectorKind::wse;
    if (name == "cfs") return SelectorKind::cfs;
    if (name == "rsvm") return SelectorKind::rsvm;
    throw ConfigError("unknown_selector",
                      "unknown selector '" + name + "' (use wse, cfs, rsvm)");
}

std::vector<std::size_t> run_selector(const LabeledDataset& ds, const SelectorConfig& cfg) {
    switch (cfg.kind) {
        case SelectorKind::rsvm: {
            const FeatureRanking ranking =
                svm_rfe(ds, cfg.eliminate_per_iteration, cfg.svm_c);
            const std::size_t k = std::min(cfg.top_k, ranking.feature_indices.size());
            return select_top_k(ranking, k).feature_indices;
        }
        case SelectorKind::wse: {
            SubsetSearchConfig sc;
            sc.evaluator = EvaluatorKind::wrapper;
            sc.internal_folds = cfg.internal_folds;
            sc.stale_limit = cfg.stale_limit;
            sc.base_learner = cfg.wrapper_learner;
            sc.seed = cfg.seed;
            const FeatureSubset subset = cfg.search == SearchKind::bestfirst
                                             ? best_first(ds, sc)
                                             : greedy_stepwise(ds, sc);
            return subset.feature_indices;
        }
        case SelectorKind::cfs: {
            SubsetSearchConfig sc;
            sc.evaluator = EvaluatorKind::cfs;
            sc.stale_limit = cfg.stale_limit;
            sc.seed = cfg.seed;
            const FeatureSubset subset = cfg.search == SearchKind::bestfirst
                                             ? best_first(ds, sc)
                                             : greedy_stepwise(ds, sc);
            return subset.feature_indices;
        }
    }
    throw ConfigError("unknown_selector", "unhandled selector kind");
}

namespace {

LabeledDataset restrict_samples(const LabeledDataset& ds, const std::vector<std::size_t>& keep) {
    LabeledDataset out;
    out.class_set = ds.class_set;
    out.matrix.probeset_ids = ds.matrix.probeset_ids;
    out.matrix.stage = ds.matrix.stage;
    out.labels.reserve(keep.size());
    out.matrix.sample_ids.reserve(keep.size());
    for (std::size_t s : keep) {
        out.labels.push_back(ds.labels[s]);
        out.matrix.sample_ids.push_back(ds.matrix.sample_ids[s]);
    }
    out.matrix.values.resize(ds.matrix.n_probesets() * keep.size());
    for (std::size_t p = 0; p < ds.matrix.n_probesets(); ++p) {
        const double* src = ds.matrix.row(p);
        double* dst = out.matrix.row(p);
        for (std::size_t i = 0; i < keep.size(); ++i) dst[i] = src[keep[i]];
    }
    return out;
}

}  // namespace

EvalReport nested_cv(const LabeledDataset& ds, const SelectorConfig& selector,
                     const ClassifierConfig& classifier, const FoldPlan& folds,
                     bool continue_on_failure) {
    ds.validate();
    if (folds.assignment.size() != ds.matrix.n_samples())
        throw DataError("fold_plan_mismatch", "fold plan does not cover the dataset");
    const auto cls = ds.class_indices();
    const std::size_t n = ds.matrix.n_samples();

    std::vector<std::vector<double>> predictions;
    std::vector<std::vector<double>> baselines;
    std::vector<int> pred_idx, truth_idx;
    EvalReport report;
    report.fold_features.resize(static_cast<std::size_t>(folds.k));

    for (int f = 0; f < folds.k; ++f) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t s = 0; s < n; ++s)
            (folds.assignment[s] == f ? test_idx : train_idx).push_back(s);
        if (test_idx.empty()) continue;

        const LabeledDataset train_ds = restrict_samples(ds, train_idx);

        std::vector<std::size_t> selected;
        try {
            SelectorConfig fold_selector = selector;
            fold_selector.seed = derive_seed(selector.seed, static_cast<std::uint64_t>(f));
            selected = run_selector(train_ds, fold_selector);
        } catch (const Error& e) {
            if (!continue_on_failure)
                throw AlgorithmError("fold_failed", "selector failed on fold " +
                                                        std::to_string(f) + ": " + e.what());
            report.failed_folds.push_back(f);
            report.complete = false;
            continue;
        }
        for (std::size_t g : selected)
            report.fold_features[static_cast<std::size_t>(f)].push_back(
                ds.matrix.probeset_ids[g]);

        std::vector<int> y_train;
        y_train.reserve(train_idx.size());
        for (std::size_t s : train_idx) y_train.push_back(cls[s]);

        ClassifierConfig fold_clf = classifier;
        fold_clf.seed = derive_seed(classifier.seed, static_cast<std::uint64_t>(f));
        const SampleMatrix train = extract_samples(ds.matrix, train_idx, selected);
        const ClassifierModel model = fit(train, y_train, ds.class_set, fold_clf);

        std::vector<double> prior(ds.class_set.size(), 0.0);
        for (int y : y_train) prior[static_cast<std::size_t>(y)] += 1.0;
        for (double& v : prior) v /= static_cast<double>(y_train.size());

        const SampleMatrix test = extract_samples(ds.matrix, test_idx, selected);
        for (std::size_t i = 0; i < test_idx.size(); ++i) {
            auto proba = predict_proba(model, test.row(i), test.d);
            std::size_t best = 0;
            for (std::size_t c = 1; c < proba.size(); ++c)
                if (proba[c] > proba[best]) best = c;
            predictions.push_back(std::move(proba));
            baselines.push_back(prior);
            pred_idx.push_back(static_cast<int>(best));
            truth_idx.push_back(cls[test_idx[i]]);
        }
    }

    if (predictions.empty())
        throw AlgorithmError("no_successful_folds", "every fold failed; nothing to report");

    report.confusion = confusion(pred_idx, truth_idx, ds.class_set);
    report.accuracy = report.confusion.accuracy();
    report.kappa_stat = kappa(report.confusion);
    const ProbErrors pe = prob_errors(predictions, truth_idx, baselines);
    report.mae = pe.mae;
    report.rmse = pe.rmse;
    report.rae = pe.rae;
    report.rrse = pe.rrse;
    report.n_instances = predictions.size();

    report.config_echo = {
        {"selector", selector_name(selector.kind)},
        {"search", search_name(selector.search)},
        {"top_k", std::to_string(selector.top_k)},
        {"eliminate_per_iteration", std::to_string(selector.eliminate_per_iteration)},
        {"selector_svm_c", format_value(selector.svm_c)},
        {"internal_folds", std::to_string(selector.internal_folds)},
        {"stale_limit", std::to_string(selector.stale_limit)},
        {"selector_seed", std::to_string(selector.seed)},
        {"classifier", classifier_name(classifier.kind)},
        {"classifier_svm_c", format_value(classifier.svm_c)},
        {"lvq_prototypes_per_class", std::to_string(classifier.lvq_prototypes_per_class)},
        {"lvq_initial_rate", format_value(classifier.lvq_initial_rate)},
        {"lvq_epochs", std::to_string(classifier.lvq_epochs)},
        {"dtable_bins", std::to_string(classifier.dtable_bins)},
        {"classifier_seed", std::to_string(classifier.seed)},
        {"folds", std::to_string(folds.k)},
        {"fold_seed", std::to_string(folds.seed)},
    };
    return report;
}

namespace {

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string percent4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f %%", v);
    return buf;
}

}  // namespace

std::string format_report(const EvalReport& r) {
    std::string out;
    out += "=== Stratified cross-validation ===\n";
    for (const auto& [key, value] : r.config_echo) out += "# " + key + " = " + value + "\n";
    if (!r.complete) {
        out += "# INCOMPLETE: failed folds:";
        for (int f : r.failed_folds) out += " " + std::to_string(f);
        out += "\n";
    }
    out += "=== Summary ===\n";
    const auto n = static_cast<double>(r.n_instances);
    out += "Correctly Classified Instances\t" + std::to_string(r.confusion.correct()) + "\t" +
           percent4(100.0 * r.accuracy) + "\n";
    out += "Incorrectly Classified Instances\t" +
           std::to_string(r.n_instances - r.confusion.correct()) + "\t" +
           percent4(100.0 * (n - static_cast<double>(r.confusion.correct())) / n) + "\n";
    out += "Kappa statistic\t" + fixed4(r.kappa_stat) + "\n";
    out += "Mean absolute error\t" + fixed4(r.mae) + "\n";
    out += "Root mean squared error\t" + fixed4(r.rmse) + "\n";
    out += "Relative absolute error\t" + percent4(r.rae) + "\n";
    out += "Root relative squared error\t" + percent4(r.rrse) + "\n";
    out += "Total Number of Instances\t" + std::to_string(r.n_instances) + "\n";
    out += "=== Confusion Matrix ===\n";
    const std::size_t k = r.confusion.class_set.size();
    for (std::size_t c = 0; c < k; ++c) {
        out += static_cast<char>('a' + c);
        out += '\t';
    }
    out += "<-- classified as\n";
    for (std::size_t t = 0; t < k; ++t) {
        for (std::size_t p = 0; p < k; ++p) {
            out += std::to_string(r.confusion.at(t, p));
            out += '\t';
        }
        out += static_cast<char>('a' + t);
        out += " = " + r.confusion.class_set[t] + "\n";
    }
    return out;
}

std::string report_to_json_string(const EvalReport& r) {
    json j;
    j["n_instances"] = r.n_instances;
    j["accuracy"] = r.accuracy;
    j["kappa"] = r.kappa_stat;
    j["mean_absolute_error"] = r.mae;
    j["root_mean_squared_error"] = r.rmse;
    j["relative_absolute_error_percent"] = r.rae;
    j["root_relative_squared_error_percent"] = r.rrse;
    j["complete"] = r.complete;
    j["failed_folds"] = r.failed_folds;
    j["class_set"] = r.confusion.class_set;
    json rows = json::array();
    const std::size_t k = r.confusion.class_set.size();
    for (std::size_t t = 0; t < k; ++t) {
        json row = json::array();
        for (std::size_t p = 0; p < k; ++p) row.push_back(r.confusion.at(t, p));
        rows.push_back(std::move(row));
    }
    j["confusion"] = std::move(rows);
    json cfg = json::object();
    for (const auto& [key, value] : r.config_echo) cfg[key] = value;
    j["config"] = std::move(cfg);
    json ff = json::array();
    for (const auto& fold : r.fold_features) ff.push_back(fold);
    j["fold_features"] = std::move(ff);
    return j.dump(2);
}

}  // namespace biomark

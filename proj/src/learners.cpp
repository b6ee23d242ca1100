#include "biomark/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "biomark/error.hpp"
#include "biomark/rng.hpp"
#include "biomark/svm.hpp"

namespace biomark {

using nlohmann::json;

const char* classifier_name(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::naive_bayes: return "nb";
        case ClassifierKind::linear_svm: return "svm";
        case ClassifierKind::lvq: return "lvq";
        case ClassifierKind::decision_table: return "dtable";
    }
    return "?";
}

ClassifierKind classifier_from_name(const std::string& name) {
    if (name == "nb") return ClassifierKind::naive_bayes;
    if (name == "svm") return ClassifierKind::linear_svm;
    if (name == "lvq") return ClassifierKind::lvq;
    if (name == "dtable") return ClassifierKind::decision_table;
    throw ConfigError("unknown_classifier",
                      "unknown classifier '" + name + "' (use nb, svm, lvq, dtable)");
}

SampleMatrix extract_samples(const ExpressionMatrix& m,
                             const std::vector<std::size_t>& sample_idx,
                             const std::vector<std::size_t>& feature_idx) {
    SampleMatrix out;
    out.n = sample_idx.size();
    out.d = feature_idx.size();
    out.x.resize(out.n * out.d);
    for (std::size_t i = 0; i < out.n; ++i)
        for (std::size_t f = 0; f < out.d; ++f)
            out.x[i * out.d + f] = m.at(feature_idx[f], sample_idx[i]);
    return out;
}

namespace {

void check_training(const SampleMatrix& train, const std::vector<int>& y,
                    const std::vector<std::string>& class_set) {
    if (train.n == 0 || train.d == 0)
        throw DataError("empty_training", "training data needs >= 1 sample and >= 1 feature");
    if (y.size() != train.n)
        throw DataError("label_count_mismatch", "label count does not match sample count");
    if (class_set.size() < 2) throw DataError("too_few_classes", "need at least 2 classes");
    std::vector<std::size_t> counts(class_set.size(), 0);
    for (int c : y) {
        if (c < 0 || static_cast<std::size_t>(c) >= class_set.size())
            throw DataError("unknown_label", "class index out of range");
        counts[static_cast<std::size_t>(c)]++;
    }
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] == 0)
            throw DataError("empty_class", "class '" + class_set[c] + "' has no training samples");
    for (double v : train.x)
        if (!std::isfinite(v))
            throw DataError("non_finite_feature", "training data contains a non-finite value");
}

void fit_naive_bayes(const SampleMatrix& train, const std::vector<int>& y,
                     ClassifierModel& model) {
    const std::size_t k = model.class_set.size();
    const std::size_t d = train.d;
    model.nb_mean.assign(k * d, 0.0);
    model.nb_var.assign(k * d, 0.0);
    model.nb_log_prior.assign(k, 0.0);
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < train.n; ++i) {
        const auto c = static_cast<std::size_t>(y[i]);
        counts[c] += 1.0;
        const double* xi = train.row(i);
        for (std::size_t f = 0; f < d; ++f) model.nb_mean[c * d + f] += xi[f];
    }
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t f = 0; f < d; ++f) model.nb_mean[c * d + f] /= counts[c];
    for (std::size_t i = 0; i < train.n; ++i) {
        const auto c = static_cast<std::size_t>(y[i]);
        const double* xi = train.row(i);
        for (std::size_t f = 0; f < d; ++f) {
            const double diff = xi[f] - model.nb_mean[c * d + f];
            model.nb_var[c * d + f] += diff * diff;
        }
    }
    const double floor = model.config.nb_variance_floor;
    for (std::size_t c = 0; c < k; ++c) {
        const double denom = counts[c] - 1.0;  // sample variance; floored when n_c < 2
        for (std::size_t f = 0; f < d; ++f) {
            double v = denom > 0.0 ? model.nb_var[c * d + f] / denom : 0.0;
            model.nb_var[c * d + f] = std::max(v, floor);
        }
        model.nb_log_prior[c] = std::log(counts[c] / static_cast<double>(train.n));
    }
}

void fit_linear_svm(const SampleMatrix& train, const std::vector<int>& y,
                    ClassifierModel& model) {
    const int k = static_cast<int>(model.class_set.size());
    for (int a = 0; a < k; ++a) {
        for (int b = a + 1; b < k; ++b) {
            SvmPairMachine pair;
            pair.class_a = a;
            pair.class_b = b;
            std::vector<double> labels;
            for (std::size_t i = 0; i < train.n; ++i) {
                if (y[i] == a || y[i] == b) {
                    pair.samples.push_back(i);
                    labels.push_back(y[i] == a ? 1.0 : -1.0);
                }
            }
            SampleMatrix sub;
            sub.n = pair.samples.size();
            sub.d = train.d;
            sub.x.resize(sub.n * sub.d);
            for (std::size_t i = 0; i < sub.n; ++i)
                std::copy_n(train.row(pair.samples[i]), train.d, sub.row(i));
            const auto gram = linear_gram(sub.x.data(), sub.n, sub.d);
            BinarySvm solved =
                smo_train(gram, labels, model.config.svm_c, model.config.svm_tol);
            pair.alpha = std::move(solved.alpha);
            pair.bias = solved.bias;
            pair.dual_trace = std::move(solved.dual_trace);
            pair.w = svm_primal_weights(sub.x.data(), sub.n, sub.d, labels, pair.alpha);
            model.svm_pairs.push_back(std::move(pair));
        }
    }
}

void fit_lvq(const SampleMatrix& train, const std::vector<int>& y, ClassifierModel& model) {
    const std::size_t k = model.class_set.size();
    const std::size_t d = train.d;
    const auto& cfg = model.config;

    // seeded class-stratified draws for the initial codebook
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < train.n; ++i)
            if (static_cast<std::size_t>(y[i]) == c) members.push_back(i);
        Rng rng(derive_seed(cfg.seed, 1000 + c));
        rng.shuffle(members);
        const std::size_t take =
            std::min<std::size_t>(static_cast<std::size_t>(cfg.lvq_prototypes_per_class),
                                  members.size());
        for (std::size_t p = 0; p < take; ++p) {
            const double* xi = train.row(members[p]);
            model.lvq_prototypes.insert(model.lvq_prototypes.end(), xi, xi + d);
            model.lvq_proto_class.push_back(static_cast<int>(c));
        }
    }

    const std::size_t n_protos = model.lvq_proto_class.size();
    std::vector<std::size_t> order(train.n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 0; epoch < cfg.lvq_epochs; ++epoch) {
        const double rate =
            cfg.lvq_initial_rate * (1.0 - static_cast<double>(epoch) /
                                              static_cast<double>(cfg.lvq_epochs));
        if (rate <= 0.0) break;
        Rng rng(derive_seed(cfg.seed, 2000 + static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);
        for (std::size_t i : order) {
            const double* xi = train.row(i);
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t p = 0; p < n_protos; ++p) {
                const double* proto = model.lvq_prototypes.data() + p * d;
                double dist = 0.0;
                for (std::size_t f = 0; f < d; ++f) {
                    const double diff = xi[f] - proto[f];
                    dist += diff * diff;
                }
                if (dist < best_d) {
                    best_d = dist;
                    best = p;
                }
            }
            double* proto = model.lvq_prototypes.data() + best * d;
            const double sign = model.lvq_proto_class[best] == y[i] ? 1.0 : -1.0;
            for (std::size_t f = 0; f < d; ++f) proto[f] += sign * rate * (xi[f] - proto[f]);
        }
    }
}

std::vector<std::uint8_t> dtable_cell(const DecisionTableModel& dt, const double* x,
                                      std::size_t d) {
    std::vector<std::uint8_t> key(d);
    for (std::size_t f = 0; f < d; ++f) {
        const auto& edges = dt.bin_edges[f];
        const auto it = std::upper_bound(edges.begin(), edges.end(), x[f]);
        key[f] = static_cast<std::uint8_t>(it - edges.begin());
    }
    return key;
}

void fit_decision_table(const SampleMatrix& train, const std::vector<int>& y,
                        ClassifierModel& model) {
    const std::size_t k = model.class_set.size();
    const std::size_t d = train.d;
    auto& dt = model.dtable;
    const int bins = std::max(1, model.config.dtable_bins);

    dt.bin_edges.resize(d);
    std::vector<double> column(train.n);
    for (std::size_t f = 0; f < d; ++f) {
        for (std::size_t i = 0; i < train.n; ++i) column[i] = train.x[i * train.d + f];
        std::sort(column.begin(), column.end());
        std::vector<double> edges;
        for (int b = 1; b < bins; ++b) {
            const std::size_t pos = (static_cast<std::size_t>(b) * train.n) / static_cast<std::size_t>(bins);
            const double e = column[pos];
            if (edges.empty() || e > edges.back()) edges.push_back(e);
        }
        dt.bin_edges[f] = std::move(edges);
    }

    dt.fallback.assign(k, 0.0);
    std::map<std::vector<std::uint8_t>, std::vector<double>> counts;
    for (std::size_t i = 0; i < train.n; ++i) {
        dt.fallback[static_cast<std::size_t>(y[i])] += 1.0;
        auto key = dtable_cell(dt, train.row(i), d);
        auto& cell = counts[key];
        if (cell.empty()) cell.assign(k, 0.0);
        cell[static_cast<std::size_t>(y[i])] += 1.0;
    }
    for (auto& [key, cell] : counts) {
        const double total = std::accumulate(cell.begin(), cell.end(), 0.0);
        for (double& v : cell) v /= total;
    }
    dt.cells = std::move(counts);
    const double total = static_cast<double>(train.n);
    for (double& v : dt.fallback) v /= total;
}

}  // namespace

ClassifierModel fit(const SampleMatrix& train, const std::vector<int>& y,
                    const std::vector<std::string>& class_set, const ClassifierConfig& cfg) {
    check_training(train, y, class_set);
    ClassifierModel model;
    model.kind = cfg.kind;
    model.class_set = class_set;
    model.n_features = train.d;
    model.config = cfg;
    switch (cfg.kind) {
        case ClassifierKind::naive_bayes: fit_naive_bayes(train, y, model); break;
        case ClassifierKind::linear_svm: fit_linear_svm(train, y, model); break;
        case ClassifierKind::lvq: fit_lvq(train, y, model); break;
        case ClassifierKind::decision_table: fit_decision_table(train, y, model); break;
    }
    return model;
}

std::vector<double> predict_proba(const ClassifierModel& model, const double* sample,
                                  std::size_t d) {
    if (d != model.n_features)
        throw DataError("dimension_mismatch",
                        "sample has " + std::to_string(d) + " features, model expects " +
                            std::to_string(model.n_features));
    const std::size_t k = model.class_set.size();
    std::vector<double> proba(k, 0.0);

    switch (model.kind) {
        case ClassifierKind::naive_bayes: {
            std::vector<double> logp(k, 0.0);
            for (std::size_t c = 0; c < k; ++c) {
                double acc = model.nb_log_prior[c];
                for (std::size_t f = 0; f < d; ++f) {
                    const double var = model.nb_var[c * d + f];
                    const double diff = sample[f] - model.nb_mean[c * d + f];
                    acc += -0.5 * std::log(2.0 * M_PI * var) - diff * diff / (2.0 * var);
                }
                logp[c] = acc;
            }
            const double mx = *std::max_element(logp.begin(), logp.end());
            double total = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                proba[c] = std::exp(logp[c] - mx);
                total += proba[c];
            }
            for (double& v : proba) v /= total;
            break;
        }
        case ClassifierKind::linear_svm: {
            for (const auto& pair : model.svm_pairs) {
                double f = pair.bias;
                for (std::size_t j = 0; j < d; ++j) f += pair.w[j] * sample[j];
                proba[static_cast<std::size_t>(f >= 0.0 ? pair.class_a : pair.class_b)] += 1.0;
            }
            const double total = static_cast<double>(model.svm_pairs.size());
            for (double& v : proba) v /= total;
            break;
        }
        case ClassifierKind::lvq: {
            std::vector<double> best(k, std::numeric_limits<double>::infinity());
            const std::size_t n_protos = model.lvq_proto_class.size();
            for (std::size_t p = 0; p < n_protos; ++p) {
                const double* proto = model.lvq_prototypes.data() + p * d;
                double dist = 0.0;
                for (std::size_t f = 0; f < d; ++f) {
                    const double diff = sample[f] - proto[f];
                    dist += diff * diff;
                }
                auto& slot = best[static_cast<std::size_t>(model.lvq_proto_class[p])];
                slot = std::min(slot, std::sqrt(dist));
            }
            bool exact = false;
            for (std::size_t c = 0; c < k; ++c) exact = exact || best[c] == 0.0;
            double total = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                if (exact)
                    proba[c] = best[c] == 0.0 ? 1.0 : 0.0;
                else if (std::isinf(best[c]))
                    proba[c] = 0.0;  // class without prototypes
                else
                    proba[c] = 1.0 / best[c];
                total += proba[c];
            }
            for (double& v : proba) v /= total;
            break;
        }
        case ClassifierKind::decision_table: {
            const auto key = dtable_cell(model.dtable, sample, d);
            const auto it = model.dtable.cells.find(key);
            proba = it != model.dtable.cells.end() ? it->second : model.dtable.fallback;
            break;
        }
    }
    return proba;
}

int predict_index(const ClassifierModel& model, const double* sample, std::size_t d) {
    const auto proba = predict_proba(model, sample, d);
    std::size_t best = 0;
    for (std::size_t c = 1; c < proba.size(); ++c)
        if (proba[c] > proba[best]) best = c;
    return static_cast<int>(best);
}

std::string predict(const ClassifierModel& model, const double* sample, std::size_t d) {
    return model.class_set[static_cast<std::size_t>(predict_index(model, sample, d))];
}

std::vector<PairWeights> svm_weights(const ClassifierModel& model) {
    if (model.kind != ClassifierKind::linear_svm)
        throw AlgorithmError("wrong_kind", "svm_weights requires a linear SVM model");
    std::vector<PairWeights> out;
    for (const auto& pair : model.svm_pairs) {
        out.push_back(PairWeights{model.class_set[static_cast<std::size_t>(pair.class_a)],
                                  model.class_set[static_cast<std::size_t>(pair.class_b)],
                                  pair.w, pair.bias});
    }
    return out;
}

std::string model_to_json(const ClassifierModel& model) {
    json j;
    j["format_version"] = 1;
    j["kind"] = classifier_name(model.kind);
    j["class_set"] = model.class_set;
    j["n_features"] = model.n_features;
    j["config"] = {{"svm_c", model.config.svm_c},
                   {"svm_tol", model.config.svm_tol},
                   {"lvq_prototypes_per_class", model.config.lvq_prototypes_per_class},
                   {"lvq_initial_rate", model.config.lvq_initial_rate},
                   {"lvq_epochs", model.config.lvq_epochs},
                   {"dtable_bins", model.config.dtable_bins},
                   {"nb_variance_floor", model.config.nb_variance_floor},
                   {"seed", model.config.seed}};
    switch (model.kind) {
        case ClassifierKind::naive_bayes:
            j["nb"] = {{"mean", model.nb_mean}, {"var", model.nb_var},
                       {"log_prior", model.nb_log_prior}};
            break;
        case ClassifierKind::linear_svm: {
            json pairs = json::array();
            for (const auto& p : model.svm_pairs)
                pairs.push_back({{"class_a", p.class_a},
                                 {"class_b", p.class_b},
                                 {"w", p.w},
                                 {"bias", p.bias},
                                 {"alpha", p.alpha},
                                 {"samples", p.samples}});
            j["svm_pairs"] = std::move(pairs);
            break;
        }
        case ClassifierKind::lvq:
            j["lvq"] = {{"prototypes", model.lvq_prototypes},
                        {"proto_class", model.lvq_proto_class}};
            break;
        case ClassifierKind::decision_table: {
            json cells = json::array();
            for (const auto& [key, dist] : model.dtable.cells)
                cells.push_back({{"key", key}, {"dist", dist}});
            j["dtable"] = {{"bin_edges", model.dtable.bin_edges},
                           {"cells", std::move(cells)},
                           {"fallback", model.dtable.fallback}};
            break;
        }
    }
    return j.dump(2);
}

ClassifierModel model_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("format_version").get<int>() != 1)
        throw DataError("bad_model_version", "unsupported model format version");
    ClassifierModel model;
    model.kind = classifier_from_name(j.at("kind").get<std::string>());
    model.class_set = j.at("class_set").get<std::vector<std::string>>();
    model.n_features = j.at("n_features").get<std::size_t>();
    const auto& c = j.at("config");
    model.config.kind = model.kind;
    model.config.svm_c = c.at("svm_c").get<double>();
    model.config.svm_tol = c.at("svm_tol").get<double>();
    model.config.lvq_prototypes_per_class = c.at("lvq_prototypes_per_class").get<int>();
    model.config.lvq_initial_rate = c.at("lvq_initial_rate").get<double>();
    model.config.lvq_epochs = c.at("lvq_epochs").get<int>();
    model.config.dtable_bins = c.at("dtable_bins").get<int>();
    model.config.nb_variance_floor = c.at("nb_variance_floor").get<double>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    switch (model.kind) {
        case ClassifierKind::naive_bayes:
            model.nb_mean = j.at("nb").at("mean").get<std::vector<double>>();
            model.nb_var = j.at("nb").at("var").get<std::vector<double>>();
            model.nb_log_prior = j.at("nb").at("log_prior").get<std::vector<double>>();
            break;
        case ClassifierKind::linear_svm:
            for (const auto& p : j.at("svm_pairs")) {
                SvmPairMachine pair;
                pair.class_a = p.at("class_a").get<int>();
                pair.class_b = p.at("class_b").get<int>();
                pair.w = p.at("w").get<std::vector<double>>();
                pair.bias = p.at("bias").get<double>();
                pair.alpha = p.at("alpha").get<std::vector<double>>();
                pair.samples = p.at("samples").get<std::vector<std::size_t>>();
                model.svm_pairs.push_back(std::move(pair));
            }
            break;
        case ClassifierKind::lvq:
            model.lvq_prototypes = j.at("lvq").at("prototypes").get<std::vector<double>>();
            model.lvq_proto_class = j.at("lvq").at("proto_class").get<std::vector<int>>();
            break;
        case ClassifierKind::decision_table:
            model.dtable.bin_edges =
                j.at("dtable").at("bin_edges").get<std::vector<std::vector<double>>>();
            for (const auto& cell : j.at("dtable").at("cells"))
                model.dtable.cells[cell.at("key").get<std::vector<std::uint8_t>>()] =
                    cell.at("dist").get<std::vector<double>>();
            model.dtable.fallback = j.at("dtable").at("fallback").get<std::vector<double>>();
            break;
    }
    return model;
}

}  // namespace biomark

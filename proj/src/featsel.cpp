#include "biomark/featsel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>

#include "biomark/error.hpp"
#include "biomark/evaluate.hpp"
#include "biomark/io.hpp"
#include "biomark/parallel.hpp"
#include "biomark/rng.hpp"
#include "biomark/stats.hpp"
#include "biomark/svm.hpp"

namespace biomark {

const char* search_name(SearchKind k) {
    switch (k) {
        case SearchKind::greedy: return "greedy";
        case SearchKind::bestfirst: return "bestfirst";
        case SearchKind::ranker: return "ranker";
    }
    return "?";
}

SearchKind search_from_name(const std::string& name) {
    if (name == "greedy") return SearchKind::greedy;
    if (name == "bestfirst") return SearchKind::bestfirst;
    if (name == "ranker") return SearchKind::ranker;
    throw ConfigError("unknown_search",
                      "unknown search '" + name + "' (use greedy, bestfirst, ranker)");
}

namespace {

// Lazily cached feature-class and feature-feature correlations for CFS.
class CfsCache {
  public:
    explicit CfsCache(const LabeledDataset& ds)
        : ds_(ds), cls_(ds.class_indices()), r_cf_(ds.matrix.n_probesets(), -1.0) {}

    double r_cf(std::size_t f) {
        if (r_cf_[f] < 0.0) {
            std::span<const double> row(ds_.matrix.row(f), ds_.matrix.n_samples());
            r_cf_[f] = stats::correlation_ratio(row, cls_, static_cast<int>(ds_.n_classes()));
        }
        return r_cf_[f];
    }

    double r_ff(std::size_t a, std::size_t b) {
        if (a > b) std::swap(a, b);
        const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
        auto it = pair_.find(key);
        if (it != pair_.end()) return it->second;
        std::span<const double> ra(ds_.matrix.row(a), ds_.matrix.n_samples());
        std::span<const double> rb(ds_.matrix.row(b), ds_.matrix.n_samples());
        const double r = std::abs(stats::pearson(ra, rb));
        pair_.emplace(key, r);
        return r;
    }

    double merit(const std::vector<std::size_t>& subset) {
        const double k = static_cast<double>(subset.size());
        double sum_cf = 0.0;
        for (std::size_t f : subset) sum_cf += r_cf(f);
        double sum_ff = 0.0;
        for (std::size_t i = 0; i < subset.size(); ++i)
            for (std::size_t j = i + 1; j < subset.size(); ++j)
                sum_ff += r_ff(subset[i], subset[j]);
        const double denom = std::sqrt(k + 2.0 * sum_ff);
        return denom > 0.0 ? sum_cf / denom : 0.0;
    }

  private:
    const LabeledDataset& ds_;
    std::vector<int> cls_;
    std::vector<double> r_cf_;
    std::unordered_map<std::uint64_t, double> pair_;
};

// Shared evaluator behind greedy/best-first; wrapper evaluations reuse one
// fold plan so subset scores are comparable and deterministic.
class SubsetScorer {
  public:
    SubsetScorer(const LabeledDataset& ds, const SubsetSearchConfig& cfg)
        : ds_(ds), cfg_(cfg) {
        if (cfg.evaluator == EvaluatorKind::cfs) {
            cfs_ = std::make_unique<CfsCache>(ds);
        } else {
            folds_ = stratified_folds(ds.labels, cfg.internal_folds, cfg.seed);
            cls_ = ds.class_indices();
        }
    }

    double score(const std::vector<std::size_t>& subset) {
        if (cfg_.evaluator == EvaluatorKind::cfs) {
            std::lock_guard<std::mutex> lock(mutex_);
            return cfs_->merit(subset);
        }
        return wrapper_accuracy(subset);
    }

    // Candidate scores for current+f over many features, parallel.
    std::vector<double> score_additions(const std::vector<std::size_t>& current,
                                        const std::vector<std::size_t>& candidates) {
        std::vector<double> out(candidates.size());
        if (cfg_.evaluator == EvaluatorKind::cfs) {
            // warm the per-feature cache in parallel, then combine serially
            parallel_chunks(candidates.size(), [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    std::lock_guard<std::mutex> lock(mutex_);
                    cfs_->r_cf(candidates[i]);
                }
            });
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                auto subset = current;
                subset.push_back(candidates[i]);
                out[i] = cfs_->merit(subset);
            }
        } else {
            parallel_chunks(candidates.size(), [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    auto subset = current;
                    subset.push_back(candidates[i]);
                    out[i] = wrapper_accuracy(subset);
                }
            });
        }
        return out;
    }

  private:
    double wrapper_accuracy(const std::vector<std::size_t>& subset) const {
        std::size_t correct = 0, total = 0;
        for (int f = 0; f < folds_.k; ++f) {
            std::vector<std::size_t> train_idx, test_idx;
            for (std::size_t s = 0; s < folds_.assignment.size(); ++s)
                (folds_.assignment[s] == f ? test_idx : train_idx).push_back(s);
            SampleMatrix train = extract_samples(ds_.matrix, train_idx, subset);
            std::vector<int> y_train;
            y_train.reserve(train_idx.size());
            for (std::size_t s : train_idx) y_train.push_back(cls_[s]);
            ClassifierConfig base = cfg_.base_learner;
            base.seed = derive_seed(cfg_.seed, 7000 + static_cast<std::uint64_t>(f));
            const ClassifierModel model = fit(train, y_train, ds_.class_set, base);
            SampleMatrix test = extract_samples(ds_.matrix, test_idx, subset);
            for (std::size_t i = 0; i < test_idx.size(); ++i) {
                if (predict_index(model, test.row(i), test.d) == cls_[test_idx[i]]) ++correct;
                ++total;
            }
        }
        return static_cast<double>(correct) / static_cast<double>(total);
    }

    const LabeledDataset& ds_;
    SubsetSearchConfig cfg_;
    std::unique_ptr<CfsCache> cfs_;
    FoldPlan folds_;
    std::vector<int> cls_;
    std::mutex mutex_;
};

std::vector<std::size_t> features_by_id(const LabeledDataset& ds) {
    std::vector<std::size_t> order(ds.matrix.n_probesets());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ds.matrix.probeset_ids[a] < ds.matrix.probeset_ids[b];
    });
    return order;
}

void check_search_pre(const LabeledDataset& ds, const SubsetSearchConfig& cfg) {
    ds.validate();
    if (ds.matrix.n_probesets() == 0)
        throw DataError("no_features", "subset search needs at least one feature");
    if (cfg.evaluator == EvaluatorKind::wrapper) {
        if (cfg.internal_folds < 2)
            throw ConfigError("bad_fold_count", "internal fold count must be >= 2");
        for (const auto& g : ds.samples_by_class())
            if (g.size() < static_cast<std::size_t>(cfg.internal_folds))
                throw DataError("class_too_small",
                                "every class needs >= internal_folds samples for wrapper CV");
    }
}

}  // namespace

double cfs_merit(const LabeledDataset& ds, const std::vector<std::size_t>& subset) {
    if (subset.empty()) throw DataError("empty_subset", "cfs_merit needs a nonempty subset");
    CfsCache cache(ds);
    return cache.merit(subset);
}

double wrapper_eval(const LabeledDataset& ds, const std::vector<std::size_t>& subset,
                    const ClassifierConfig& base_learner, int internal_folds,
                    std::uint64_t seed) {
    if (subset.empty()) throw DataError("empty_subset", "wrapper_eval needs a nonempty subset");
    SubsetSearchConfig cfg;
    cfg.evaluator = EvaluatorKind::wrapper;
    cfg.internal_folds = internal_folds;
    cfg.base_learner = base_learner;
    cfg.seed = seed;
    check_search_pre(ds, cfg);
    SubsetScorer scorer(ds, cfg);
    return scorer.score(subset);
}

FeatureSubset greedy_stepwise(const LabeledDataset& ds, const SubsetSearchConfig& cfg) {
    check_search_pre(ds, cfg);
    SubsetScorer scorer(ds, cfg);
    const auto id_order = features_by_id(ds);

    FeatureSubset result;
    result.evaluator = cfg.evaluator;
    std::vector<bool> used(ds.matrix.n_probesets(), false);
    double current_score = 0.0;

    while (true) {
        std::vector<std::size_t> candidates;
        for (std::size_t f : id_order)
            if (!used[f]) candidates.push_back(f);
        if (candidates.empty()) break;
        const auto scores = scorer.score_additions(result.feature_indices, candidates);
        std::size_t best = candidates.size();
        double best_score = current_score;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (scores[i] > best_score) {  // strict improvement; ID order breaks ties
                best_score = scores[i];
                best = i;
            }
        }
        if (best == candidates.size()) break;
        used[candidates[best]] = true;
        result.feature_indices.push_back(candidates[best]);
        result.feature_ids.push_back(ds.matrix.probeset_ids[candidates[best]]);
        current_score = best_score;
        result.trace.emplace_back(ds.matrix.probeset_ids[candidates[best]], best_score);
    }

    if (result.feature_indices.empty())
        throw AlgorithmError("no_informative_start", "no single feature has positive score");
    result.score = current_score;
    return result;
}

FeatureSubset best_first(const LabeledDataset& ds, const SubsetSearchConfig& cfg) {
    check_search_pre(ds, cfg);
    SubsetScorer scorer(ds, cfg);
    const auto id_order = features_by_id(ds);

    struct Node {
        double score;
        std::size_t order;  // insertion counter, earlier pops first on ties
        std::vector<std::size_t> subset;  // sorted
        bool operator<(const Node& other) const {
            if (score != other.score) return score < other.score;
            return order > other.order;
        }
    };

    std::priority_queue<Node> open;
    std::set<std::vector<std::size_t>> visited;
    std::size_t counter = 0;

    open.push(Node{0.0, counter++, {}});
    visited.insert({});

    std::vector<std::size_t> best_order;  // selection order for the trace
    double best_score = 0.0;
    std::map<std::vector<std::size_t>, std::vector<std::size_t>> path;  // subset -> add order
    path[{}] = {};
    int stale = 0;

    while (!open.empty()) {
        const Node node = open.top();
        open.pop();

        std::vector<std::size_t> candidates;
        for (std::size_t f : id_order)
            if (!std::binary_search(node.subset.begin(), node.subset.end(), f))
                candidates.push_back(f);

        bool improved = false;
        if (!candidates.empty()) {
            const auto parent_order = path.at(node.subset);
            const auto scores = scorer.score_additions(parent_order, candidates);
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                auto child = node.subset;
                child.insert(std::upper_bound(child.begin(), child.end(), candidates[i]),
                             candidates[i]);
                if (!visited.insert(child).second) continue;
                auto child_order = parent_order;
                child_order.push_back(candidates[i]);
                path[child] = child_order;
                open.push(Node{scores[i], counter++, std::move(child)});
                if (scores[i] > best_score) {
                    best_score = scores[i];
                    best_order = child_order;
                    improved = true;
                }
            }
        }
        if (improved) {
            stale = 0;
        } else {
            ++stale;
            if (stale > cfg.stale_limit) break;
        }
    }

    if (best_order.empty())
        throw AlgorithmError("no_informative_start", "no single feature has positive score");

    FeatureSubset result;
    result.evaluator = cfg.evaluator;
    result.feature_indices = best_order;
    result.score = best_score;
    for (std::size_t f : best_order) result.feature_ids.push_back(ds.matrix.probeset_ids[f]);
    // trace: re-scored prefixes of the selection order
    std::vector<std::size_t> prefix;
    for (std::size_t f : best_order) {
        prefix.push_back(f);
        result.trace.emplace_back(ds.matrix.probeset_ids[f], scorer.score(prefix));
    }
    return result;
}

FeatureRanking svm_rfe(const LabeledDataset& ds, int eliminate_per_iteration, double c,
                       double tol) {
    ds.validate();
    const std::size_t n_features = ds.matrix.n_probesets();
    if (ds.n_classes() < 2 || n_features < 2)
        throw DataError("rfe_preconditions", "svm_rfe needs >= 2 classes and >= 2 features");
    if (eliminate_per_iteration < 1)
        throw ConfigError("bad_elimination_step", "eliminate_per_iteration must be >= 1");

    const auto cls = ds.class_indices();
    const std::size_t n_samples = ds.matrix.n_samples();
    const int k = static_cast<int>(ds.n_classes());

    // sample-major copy of the full matrix
    std::vector<std::size_t> all_samples(n_samples), all_features(n_features);
    std::iota(all_samples.begin(), all_samples.end(), std::size_t{0});
    std::iota(all_features.begin(), all_features.end(), std::size_t{0});
    const SampleMatrix full = extract_samples(ds.matrix, all_samples, all_features);

    struct Pair {
        std::vector<double> x;     // pair samples x all features, row-major
        std::vector<double> y;
        std::vector<double> gram;  // downdated as features are eliminated
        std::vector<double> alpha; // warm start across rounds
        std::size_t m = 0;
    };
    std::vector<Pair> pairs;
    for (int a = 0; a < k; ++a) {
        for (int b = a + 1; b < k; ++b) {
            Pair p;
            for (std::size_t s = 0; s < n_samples; ++s) {
                if (cls[s] == a || cls[s] == b) {
                    const double* row = full.row(s);
                    p.x.insert(p.x.end(), row, row + n_features);
                    p.y.push_back(cls[s] == a ? 1.0 : -1.0);
                }
            }
            p.m = p.y.size();
            p.gram = linear_gram(p.x.data(), p.m, n_features);
            pairs.push_back(std::move(p));
        }
    }

    std::vector<std::size_t> surviving = all_features;
    std::vector<std::size_t> eliminated;  // worst first
    std::vector<double> elim_criterion;
    std::size_t rounds = 0;

    // elimination order on ties: larger probeset ID goes first, so earlier
    // IDs end up ranked better
    auto elim_before = [&](std::pair<double, std::size_t> lhs,
                           std::pair<double, std::size_t> rhs) {
        if (lhs.first != rhs.first) return lhs.first < rhs.first;
        return ds.matrix.probeset_ids[lhs.second] > ds.matrix.probeset_ids[rhs.second];
    };

    std::unordered_map<std::size_t, double> last_seen_criterion;
    while (surviving.size() > 1) {
        std::vector<double> criterion(surviving.size(), 0.0);
        for (auto& p : pairs) {
            BinarySvm solved =
                smo_train(p.gram, p.y, c, tol, p.alpha.empty() ? nullptr : &p.alpha);
            p.alpha = solved.alpha;
            const auto w =
                svm_primal_weights(p.x.data(), p.m, n_features, p.y, p.alpha, &surviving);
            for (std::size_t f = 0; f < surviving.size(); ++f) criterion[f] += w[f] * w[f];
        }
        ++rounds;
        for (std::size_t f = 0; f < surviving.size(); ++f)
            last_seen_criterion[surviving[f]] = criterion[f];

        std::vector<std::pair<double, std::size_t>> order;  // (criterion, feature)
        order.reserve(surviving.size());
        for (std::size_t f = 0; f < surviving.size(); ++f)
            order.emplace_back(criterion[f], surviving[f]);
        std::sort(order.begin(), order.end(), elim_before);

        const std::size_t step =
            std::min<std::size_t>(static_cast<std::size_t>(eliminate_per_iteration),
                                  surviving.size());
        std::vector<std::size_t> gone;
        for (std::size_t i = 0; i < step; ++i) {
            eliminated.push_back(order[i].second);
            elim_criterion.push_back(order[i].first);
            gone.push_back(order[i].second);
        }

        std::vector<std::size_t> next;
        next.reserve(surviving.size() - gone.size());
        for (std::size_t f : surviving)
            if (std::find(gone.begin(), gone.end(), f) == gone.end()) next.push_back(f);

        // rank-1 gram downdates for the dropped feature columns
        for (auto& p : pairs) {
            for (std::size_t f : gone) {
                for (std::size_t i = 0; i < p.m; ++i) {
                    const double xi = p.x[i * n_features + f];
                    if (xi == 0.0) continue;
                    for (std::size_t j = 0; j < p.m; ++j)
                        p.gram[i * p.m + j] -= xi * p.x[j * n_features + f];
                }
            }
        }
        surviving = std::move(next);
    }

    if (surviving.size() == 1) {
        // last survivor needs no extra training round; reuse its criterion
        // from the last round it took part in
        const auto it = last_seen_criterion.find(surviving[0]);
        eliminated.push_back(surviving[0]);
        elim_criterion.push_back(it != last_seen_criterion.end() ? it->second : 0.0);
    }

    FeatureRanking ranking;
    ranking.training_rounds = rounds;
    ranking.feature_indices.assign(eliminated.rbegin(), eliminated.rend());
    ranking.criterion.assign(elim_criterion.rbegin(), elim_criterion.rend());
    for (std::size_t f : ranking.feature_indices)
        ranking.feature_ids.push_back(ds.matrix.probeset_ids[f]);
    return ranking;
}

FeatureSubset select_top_k(const FeatureRanking& ranking, std::size_t k) {
    if (k < 1 || k > ranking.feature_indices.size())
        throw ConfigError("k_out_of_range",
                          "k must be in [1, " + std::to_string(ranking.feature_indices.size()) +
                              "], got " + std::to_string(k));
    FeatureSubset out;
    out.evaluator = EvaluatorKind::cfs;  // not produced by an evaluator; score unused
    out.feature_indices.assign(ranking.feature_indices.begin(),
                               ranking.feature_indices.begin() + static_cast<std::ptrdiff_t>(k));
    out.feature_ids.assign(ranking.feature_ids.begin(),
                           ranking.feature_ids.begin() + static_cast<std::ptrdiff_t>(k));
    out.score = 0.0;
    return out;
}

std::string format_subset(const FeatureSubset& s) {
    std::string out = "feature_id\tscore\n";
    for (const auto& [id, score] : s.trace) out += id + "\t" + format_value(score) + "\n";
    if (s.trace.empty())
        for (const auto& id : s.feature_ids) out += id + "\t" + format_value(s.score) + "\n";
    return out;
}

std::string format_ranking(const FeatureRanking& r) {
    std::string out = "feature_id\trank\tcriterion\n";
    for (std::size_t i = 0; i < r.feature_ids.size(); ++i)
        out += r.feature_ids[i] + "\t" + std::to_string(i + 1) + "\t" +
               format_value(r.criterion[i]) + "\n";
    return out;
}

}  // namespace biomark

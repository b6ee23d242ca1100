#include "biomark/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "biomark/error.hpp"
#include "biomark/rng.hpp"

namespace biomark {

using nlohmann::json;

namespace {

constexpr double kRawClamp = 0.01;

void check_spec(const SynthSpec& spec) {
    if (spec.genes == 0) throw ConfigError("bad_spec", "gene count must be >= 1");
    if (spec.class_sizes.size() < 2)
        throw ConfigError("bad_spec", "need at least 2 classes");
    for (std::size_t s : spec.class_sizes)
        if (s < 2) throw ConfigError("bad_spec", "every class needs >= 2 samples");
    if (!spec.class_names.empty() && spec.class_names.size() != spec.class_sizes.size())
        throw ConfigError("bad_spec", "class_names length must match class_sizes");
    for (const auto& g : spec.informative) {
        if (g.gene_index >= spec.genes)
            throw ConfigError("bad_spec", "informative gene index out of range");
        if (g.class_shifts.size() != spec.class_sizes.size())
            throw ConfigError("bad_spec", "informative shifts must list one value per class");
    }
    if (!(spec.log_mean_lo <= spec.log_mean_hi) || !(spec.log_std_lo <= spec.log_std_hi) ||
        spec.log_std_lo <= 0.0)
        throw ConfigError("bad_spec", "invalid log-mean/log-std ranges");
    if (spec.present_rate < 0.0 || spec.present_rate > 1.0 || spec.outlier_rate < 0.0 ||
        spec.outlier_rate > 1.0)
        throw ConfigError("bad_spec", "rates must lie in [0, 1]");
    if (spec.outlier_magnitude < 0.0)
        throw ConfigError("bad_spec", "outlier magnitude must be >= 0");
}

std::vector<std::string> default_class_names(std::size_t k) {
    if (k == 3) return {"HC", "ND", "PD"};
    std::vector<std::string> names;
    for (std::size_t c = 0; c < k; ++c) names.push_back("C" + std::to_string(c + 1));
    return names;
}

}  // namespace

SynthResult generate(const SynthSpec& spec) {
    check_spec(spec);
    const std::size_t k = spec.class_sizes.size();
    const auto names = spec.class_names.empty() ? default_class_names(k) : spec.class_names;

    std::size_t n_samples = 0;
    for (std::size_t s : spec.class_sizes) n_samples += s;

    SynthResult res;
    auto& m = res.dataset.matrix;
    m.stage = Stage::raw;
    res.dataset.class_set = names;

    std::vector<int> cls;  // class per sample, contiguous blocks
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < spec.class_sizes[c]; ++i) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "_%02zu", i + 1);
            m.sample_ids.push_back(names[c] + buf);
            res.dataset.labels.push_back(names[c]);
            cls.push_back(static_cast<int>(c));
        }
    }

    std::vector<const InformativeGene*> info_of(spec.genes, nullptr);
    for (const auto& g : spec.informative) {
        if (info_of[g.gene_index])
            throw ConfigError("bad_spec", "duplicate informative gene index");
        info_of[g.gene_index] = &g;
        res.truth.informative.push_back(g);
    }

    m.probeset_ids.reserve(spec.genes);
    m.values.resize(spec.genes * n_samples);
    res.calls.sample_ids = m.sample_ids;
    res.calls.calls.resize(spec.genes * n_samples);

    Rng rng(derive_seed(spec.seed, 0));
    std::vector<double> class_sum(k), class_ss(k);

    for (std::size_t g = 0; g < spec.genes; ++g) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "SYN%05zu_at", g + 1);
        m.probeset_ids.emplace_back(buf);

        const double log_mean = rng.uniform(spec.log_mean_lo, spec.log_mean_hi);
        const double log_std = rng.uniform(spec.log_std_lo, spec.log_std_hi);
        double* row = m.values.data() + g * n_samples;

        for (std::size_t s = 0; s < n_samples; ++s) {
            double lv = log_mean + log_std * rng.normal();
            if (info_of[g])
                lv += info_of[g]->class_shifts[static_cast<std::size_t>(cls[s])] * log_std;
            row[s] = std::max(std::exp2(lv), kRawClamp);
        }

        for (std::size_t s = 0; s < n_samples; ++s)
            res.calls.calls[g * n_samples + s] =
                rng.bernoulli(spec.present_rate) ? Call::Present : Call::Absent;

        if (spec.outlier_rate > 0.0) {
            // realized class moments of the clean values
            std::fill(class_sum.begin(), class_sum.end(), 0.0);
            std::fill(class_ss.begin(), class_ss.end(), 0.0);
            for (std::size_t s = 0; s < n_samples; ++s)
                class_sum[static_cast<std::size_t>(cls[s])] += row[s];
            std::vector<double> class_mean(k);
            for (std::size_t c = 0; c < k; ++c)
                class_mean[c] = class_sum[c] / static_cast<double>(spec.class_sizes[c]);
            for (std::size_t s = 0; s < n_samples; ++s) {
                const double d = row[s] - class_mean[static_cast<std::size_t>(cls[s])];
                class_ss[static_cast<std::size_t>(cls[s])] += d * d;
            }
            for (std::size_t s = 0; s < n_samples; ++s) {
                if (!rng.bernoulli(spec.outlier_rate)) continue;
                const auto c = static_cast<std::size_t>(cls[s]);
                const double sd =
                    std::sqrt(class_ss[c] / static_cast<double>(spec.class_sizes[c] - 1));
                const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
                const double injected =
                    std::max(class_mean[c] + sign * spec.outlier_magnitude * sd, kRawClamp);
                res.truth.outliers.push_back(OutlierInjection{g, s, row[s], injected});
                row[s] = injected;
            }
        }
    }

    res.calls.probeset_ids = m.probeset_ids;
    res.dataset.validate();
    return res;
}

std::string truth_to_json_string(const TruthRecord& truth) {
    json j;
    json info = json::array();
    for (const auto& g : truth.informative)
        info.push_back({{"gene_index", g.gene_index}, {"class_shifts", g.class_shifts}});
    j["informative"] = std::move(info);
    json outliers = json::array();
    for (const auto& o : truth.outliers)
        outliers.push_back({{"gene", o.gene},
                            {"sample", o.sample},
                            {"original", o.original},
                            {"injected", o.injected}});
    j["outliers"] = std::move(outliers);
    return j.dump(2);
}

TruthRecord truth_from_json_string(const std::string& text) {
    const json j = json::parse(text);
    TruthRecord truth;
    for (const auto& g : j.at("informative")) {
        InformativeGene ig;
        ig.gene_index = g.at("gene_index").get<std::size_t>();
        ig.class_shifts = g.at("class_shifts").get<std::vector<double>>();
        truth.informative.push_back(std::move(ig));
    }
    for (const auto& o : j.at("outliers")) {
        OutlierInjection oi;
        oi.gene = o.at("gene").get<std::size_t>();
        oi.sample = o.at("sample").get<std::size_t>();
        oi.original = o.at("original").get<double>();
        oi.injected = o.at("injected").get<double>();
        truth.outliers.push_back(oi);
    }
    return truth;
}

}  // namespace biomark

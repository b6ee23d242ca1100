#include "biomark/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "biomark/error.hpp"
#include "biomark/io.hpp"
#include "biomark/parallel.hpp"

namespace biomark {

namespace {

ExpressionMatrix keep_rows(const ExpressionMatrix& m, const std::vector<std::size_t>& rows) {
    ExpressionMatrix out;
    out.sample_ids = m.sample_ids;
    out.stage = m.stage;
    out.probeset_ids.reserve(rows.size());
    out.values.reserve(rows.size() * m.n_samples());
    for (std::size_t r : rows) {
        out.probeset_ids.push_back(m.probeset_ids[r]);
        const double* row = m.row(r);
        out.values.insert(out.values.end(), row, row + m.n_samples());
    }
    return out;
}

}  // namespace

std::string format_filter_report(const FilterReport& r) {
    std::string out;
    out += "input_count\t" + std::to_string(r.input_count) + "\n";
    out += "removed_by_calls\t" + std::to_string(r.removed_by_calls) + "\n";
    out += "removed_by_noise\t" + std::to_string(r.removed_by_noise) + "\n";
    out += "output_count\t" + std::to_string(r.output_count) + "\n";
    for (const auto& [id, reason] : r.removed_ids) out += "removed\t" + id + "\t" + reason + "\n";
    return out;
}

std::string format_outliers(const std::vector<OutlierRecord>& records) {
    std::string out = "probeset_id\tsample_id\tclass\tobserved\tclass_mean\tclass_std\tz\n";
    for (const auto& r : records) {
        out += r.probeset_id + "\t" + r.sample_id + "\t" + r.class_label + "\t" +
               format_value(r.observed_value) + "\t" + format_value(r.class_mean) + "\t" +
               format_value(r.class_std) + "\t" + format_value(r.z) + "\n";
    }
    return out;
}

CallMatrix surrogate_calls(const ExpressionMatrix& m, double floor) {
    if (m.stage != Stage::raw)
        throw DataError("wrong_stage", "surrogate_calls expects a raw-stage matrix");
    CallMatrix c;
    c.probeset_ids = m.probeset_ids;
    c.sample_ids = m.sample_ids;
    c.calls.resize(m.values.size());
    for (std::size_t i = 0; i < m.values.size(); ++i)
        c.calls[i] = m.values[i] >= floor ? Call::Present : Call::Absent;
    return c;
}

RowFilterResult filter_by_present_calls(const ExpressionMatrix& m, const CallMatrix& calls,
                                        double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ConfigError("fraction_out_of_range",
                          "present-call fraction must be in (0, 1], got " +
                              std::to_string(fraction));
    calls.validate_against(m);
    const std::size_t n = m.n_samples();
    std::vector<std::size_t> kept;
    RowFilterResult res;
    for (std::size_t p = 0; p < m.n_probesets(); ++p) {
        std::size_t present = 0;
        for (std::size_t s = 0; s < n; ++s)
            if (calls.at(p, s) == Call::Present) ++present;
        if (static_cast<double>(present) / static_cast<double>(n) >= fraction)
            kept.push_back(p);
        else
            res.removed_ids.push_back(m.probeset_ids[p]);
    }
    res.matrix = keep_rows(m, kept);
    return res;
}

RowFilterResult filter_noise_floor(const ExpressionMatrix& m, double floor) {
    if (m.stage != Stage::raw)
        throw DataError("wrong_stage", "filter_noise_floor expects a raw-stage matrix");
    std::vector<std::size_t> kept;
    RowFilterResult res;
    for (std::size_t p = 0; p < m.n_probesets(); ++p) {
        const double* row = m.row(p);
        double mx = -1.0;
        for (std::size_t s = 0; s < m.n_samples(); ++s) mx = std::max(mx, row[s]);
        if (mx < floor)
            res.removed_ids.push_back(m.probeset_ids[p]);
        else
            kept.push_back(p);
    }
    res.matrix = keep_rows(m, kept);
    return res;
}

ExpressionMatrix log_transform(const ExpressionMatrix& m, double base, double clamp) {
    if (m.stage != Stage::raw)
        throw DataError("wrong_stage", "log_transform expects a raw-stage matrix");
    if (!(base > 0.0) || base == 1.0)
        throw ConfigError("bad_log_base", "log base must be positive and != 1");
    if (!(clamp > 0.0)) throw ConfigError("bad_log_clamp", "log clamp must be positive");
    ExpressionMatrix out = m;
    const double inv_log_base = 1.0 / std::log(base);
    for (double& v : out.values) v = std::log(std::max(v, clamp)) * inv_log_base;
    out.stage = Stage::log;
    return out;
}

ZscoreResult zscore(const ExpressionMatrix& m) {
    ZscoreResult res;
    res.matrix = m;
    res.matrix.stage = Stage::zscore;
    const std::size_t n = m.n_samples();
    if (n < 2) throw DataError("too_few_samples", "zscore needs at least 2 samples");
    std::vector<std::uint8_t> degenerate(m.n_probesets(), 0);
    parallel_chunks(m.n_probesets(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            double* row = res.matrix.row(p);
            double mean = 0.0;
            for (std::size_t s = 0; s < n; ++s) mean += row[s];
            mean /= static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t s = 0; s < n; ++s) {
                const double d = row[s] - mean;
                ss += d * d;
            }
            const double sd = std::sqrt(ss / static_cast<double>(n - 1));
            if (sd <= 0.0) {
                for (std::size_t s = 0; s < n; ++s) row[s] = 0.0;
                degenerate[p] = 1;
            } else {
                for (std::size_t s = 0; s < n; ++s) row[s] = (row[s] - mean) / sd;
            }
        }
    });
    for (std::size_t p = 0; p < m.n_probesets(); ++p)
        if (degenerate[p]) res.degenerate_ids.push_back(m.probeset_ids[p]);
    return res;
}

std::vector<OutlierRecord> detect_outliers(const LabeledDataset& ds, double threshold) {
    ds.validate();
    const auto groups = ds.samples_by_class();
    for (std::size_t c = 0; c < groups.size(); ++c)
        if (groups[c].size() < 3)
            throw DataError("class_too_small", "class '" + ds.class_set[c] +
                                                   "' has fewer than 3 samples; within-class "
                                                   "outlier screening needs at least 3");
    const auto& m = ds.matrix;
    const std::size_t n_rows = m.n_probesets();

    std::vector<std::vector<OutlierRecord>> per_row(n_rows);
    parallel_chunks(n_rows, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            const double* row = m.row(p);
            for (std::size_t c = 0; c < groups.size(); ++c) {
                const auto& idx = groups[c];
                const double k = static_cast<double>(idx.size());
                double sum = 0.0;
                for (std::size_t s : idx) sum += row[s];
                const double cm = sum / k;
                double ss = 0.0;
                for (std::size_t s : idx) {
                    const double d = row[s] - cm;
                    ss += d * d;
                }
                for (std::size_t s : idx) {
                    // leave-one-out mean/std of the remaining class members
                    const double v = row[s];
                    const double dev = v - cm;
                    const double rest_mean = cm - dev / (k - 1.0);
                    double rest_ss = ss - dev * dev * k / (k - 1.0);
                    if (rest_ss < 0.0) rest_ss = 0.0;  // rounding guard
                    const double rest_sd = std::sqrt(rest_ss / (k - 2.0));
                    if (rest_sd <= 0.0) continue;
                    const double z = (v - rest_mean) / rest_sd;
                    if (std::abs(z) > threshold) {
                        per_row[p].push_back(OutlierRecord{m.probeset_ids[p], m.sample_ids[s],
                                                           ds.class_set[c], v, rest_mean, rest_sd,
                                                           z});
                    }
                }
            }
        }
    });
    std::vector<OutlierRecord> records;
    for (auto& v : per_row)
        for (auto& r : v) records.push_back(std::move(r));
    return records;
}

ExpressionMatrix impute_outliers(const LabeledDataset& ds,
                                 const std::vector<OutlierRecord>& records) {
    const auto& m = ds.matrix;
    ExpressionMatrix out = m;
    if (records.empty()) return out;

    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t p = 0; p < m.n_probesets(); ++p) row_of[m.probeset_ids[p]] = p;
    std::unordered_map<std::string, std::size_t> col_of;
    for (std::size_t s = 0; s < m.n_samples(); ++s) col_of[m.sample_ids[s]] = s;

    std::unordered_set<std::size_t> flagged;  // p * n_samples + s
    for (const auto& r : records) {
        auto pr = row_of.find(r.probeset_id);
        auto pc = col_of.find(r.sample_id);
        if (pr == row_of.end() || pc == col_of.end())
            throw DataError("unknown_record", "outlier record references unknown probeset '" +
                                                  r.probeset_id + "' or sample '" + r.sample_id +
                                                  "'");
        flagged.insert(pr->second * m.n_samples() + pc->second);
    }

    const auto groups = ds.samples_by_class();
    const auto cls = ds.class_indices();
    for (const auto& r : records) {
        const std::size_t p = row_of.at(r.probeset_id);
        const std::size_t s = col_of.at(r.sample_id);
        const auto& idx = groups[static_cast<std::size_t>(cls[s])];
        double sum = 0.0;
        std::size_t n_clean = 0;
        for (std::size_t j : idx) {
            if (flagged.count(p * m.n_samples() + j)) continue;
            sum += m.at(p, j);
            ++n_clean;
        }
        if (n_clean == 0)
            throw DataError("all_flagged",
                            "probeset '" + r.probeset_id + "', class '" + r.class_label +
                                "': every value is flagged, nothing to average");
        out.at(p, s) = sum / static_cast<double>(n_clean);
    }
    return out;
}

PreprocessResult run_preprocess(const LabeledDataset& ds, const CallMatrix* calls,
                                const PreprocessOptions& opt) {
    ds.validate();
    PreprocessResult res;
    res.report.input_count = ds.matrix.n_probesets();

    CallMatrix surrogate;
    const CallMatrix* effective_calls = calls;
    if (!effective_calls) {
        surrogate = surrogate_calls(ds.matrix, opt.surrogate_floor);
        effective_calls = &surrogate;
    }

    auto call_res = filter_by_present_calls(ds.matrix, *effective_calls, opt.present_fraction);
    res.report.removed_by_calls = call_res.removed_ids.size();
    for (auto& id : call_res.removed_ids) res.report.removed_ids.emplace_back(std::move(id), "calls");

    auto noise_res = filter_noise_floor(call_res.matrix, opt.noise_floor);
    res.report.removed_by_noise = noise_res.removed_ids.size();
    for (auto& id : noise_res.removed_ids)
        res.report.removed_ids.emplace_back(std::move(id), "noise");
    res.report.output_count = noise_res.matrix.n_probesets();

    LabeledDataset filtered;
    filtered.matrix = std::move(noise_res.matrix);
    filtered.labels = ds.labels;
    filtered.class_set = ds.class_set;

    res.outliers = detect_outliers(filtered, opt.z_threshold);
    ExpressionMatrix imputed = impute_outliers(filtered, res.outliers);

    ExpressionMatrix logged = log_transform(imputed, opt.log_base, opt.log_clamp);
    ZscoreResult z = zscore(logged);
    res.degenerate_ids = std::move(z.degenerate_ids);

    res.dataset.matrix = std::move(z.matrix);
    res.dataset.labels = ds.labels;
    res.dataset.class_set = ds.class_set;
    return res;
}

}  // namespace biomark

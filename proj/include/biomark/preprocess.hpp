#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "biomark/types.hpp"

namespace biomark {

// Accounting for the reliability filters. The call filter runs first, the
// noise filter on its survivors, so
// output_count = input_count - removed_by_calls - removed_by_noise.
struct FilterReport {
    std::size_t input_count = 0;
    std::size_t removed_by_calls = 0;
    std::size_t removed_by_noise = 0;
    std::size_t output_count = 0;
    // (probeset ID, reason) with reason "calls" or "noise"
    std::vector<std::pair<std::string, std::string>> removed_ids;
};

std::string format_filter_report(const FilterReport& r);

struct OutlierRecord {
    std::string probeset_id;
    std::string sample_id;
    std::string class_label;
    double observed_value = 0.0;
    double class_mean = 0.0;  // leave-one-out within-class mean
    double class_std = 0.0;   // leave-one-out within-class sample std
    double z = 0.0;
};

std::string format_outliers(const std::vector<OutlierRecord>& records);

// Fallback when MAS5 calls are unavailable: Present iff value >= floor.
CallMatrix surrogate_calls(const ExpressionMatrix& m, double floor);

struct RowFilterResult {
    ExpressionMatrix matrix;
    std::vector<std::string> removed_ids;
};

// Keeps a probeset iff (Present calls / samples) >= fraction. Marginal does
// not count as Present.
RowFilterResult filter_by_present_calls(const ExpressionMatrix& m, const CallMatrix& calls,
                                        double fraction = 0.25);

// Removes a probeset iff its maximum value across samples is < floor.
RowFilterResult filter_noise_floor(const ExpressionMatrix& m, double floor = 100.0);

// v -> log_base(max(v, clamp)); the clamp keeps near-zero MAS5 values finite.
ExpressionMatrix log_transform(const ExpressionMatrix& m, double base = 2.0, double clamp = 1.0);

struct ZscoreResult {
    ExpressionMatrix matrix;
    std::vector<std::string> degenerate_ids;  // zero-variance rows, emitted as all zeros
};

// Row-wise standardization by the row's own mean and sample std.
ZscoreResult zscore(const ExpressionMatrix& m);

// Within-class screening on raw-scale values: a cell is flagged when its
// |z| against the leave-one-out mean/std of its own class exceeds the
// threshold. Classes need >= 3 samples so the leave-one-out std exists.
std::vector<OutlierRecord> detect_outliers(const LabeledDataset& ds, double threshold = 5.0);

// Replaces each flagged cell with the mean of the non-flagged values of the
// same probeset within the same class; everything else is untouched.
ExpressionMatrix impute_outliers(const LabeledDataset& ds,
                                 const std::vector<OutlierRecord>& records);

struct PreprocessOptions {
    double present_fraction = 0.25;
    double noise_floor = 100.0;
    double z_threshold = 5.0;
    double log_base = 2.0;
    double log_clamp = 1.0;
    double surrogate_floor = 100.0;  // used when no call matrix is supplied
};

struct PreprocessResult {
    LabeledDataset dataset;  // filtered, imputed, log-transformed, z-scored
    FilterReport report;
    std::vector<OutlierRecord> outliers;
    std::vector<std::string> degenerate_ids;
};

// The full chain: call filter -> noise filter -> outlier detect/impute on raw
// values -> log transform -> z-score.
PreprocessResult run_preprocess(const LabeledDataset& ds, const CallMatrix* calls,
                                const PreprocessOptions& opt = {});

}  // namespace biomark

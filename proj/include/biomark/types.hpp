#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace biomark {

// Transform stage of an expression matrix. raw values are MAS5-scale
// nonnegative units; log and zscore record the applied transforms.
enum class Stage : std::uint8_t { raw, log, zscore };

enum class Call : std::uint8_t { Present, Marginal, Absent };

const char* stage_name(Stage s);
char call_symbol(Call c);

// Probesets x samples, row-major. Rows are probesets (genes), columns are
// samples; column order defines sample order everywhere, nothing is ever
// sorted implicitly.
struct ExpressionMatrix {
    std::vector<std::string> probeset_ids;
    std::vector<std::string> sample_ids;
    std::vector<double> values;
    Stage stage = Stage::raw;

    std::size_t n_probesets() const { return probeset_ids.size(); }
    std::size_t n_samples() const { return sample_ids.size(); }

    double at(std::size_t p, std::size_t s) const { return values[p * n_samples() + s]; }
    double& at(std::size_t p, std::size_t s) { return values[p * n_samples() + s]; }
    const double* row(std::size_t p) const { return values.data() + p * n_samples(); }
    double* row(std::size_t p) { return values.data() + p * n_samples(); }

    // Throws DataError when shape, ID uniqueness, or the stage=raw
    // nonnegativity invariant is violated.
    void validate() const;
};

struct CallMatrix {
    std::vector<std::string> probeset_ids;
    std::vector<std::string> sample_ids;
    std::vector<Call> calls;

    std::size_t n_probesets() const { return probeset_ids.size(); }
    std::size_t n_samples() const { return sample_ids.size(); }
    Call at(std::size_t p, std::size_t s) const { return calls[p * n_samples() + s]; }

    void validate() const;
    // Dimension/ID agreement with the companion expression matrix.
    void validate_against(const ExpressionMatrix& m) const;
};

struct LabeledDataset {
    ExpressionMatrix matrix;
    std::vector<std::string> labels;     // one per sample
    std::vector<std::string> class_set;  // distinct labels, first-appearance order

    std::size_t n_classes() const { return class_set.size(); }

    // Per-sample index into class_set.
    std::vector<int> class_indices() const;
    // Sample indices grouped by class, class_set order; sample order preserved.
    std::vector<std::vector<std::size_t>> samples_by_class() const;

    void validate() const;
};

// class_set in first-appearance order from a label vector.
std::vector<std::string> distinct_labels(const std::vector<std::string>& labels);

LabeledDataset make_labeled(ExpressionMatrix matrix, std::vector<std::string> labels);

}  // namespace biomark

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "biomark/types.hpp"

namespace biomark {

enum class ClassifierKind : std::uint8_t { naive_bayes, linear_svm, lvq, decision_table };

const char* classifier_name(ClassifierKind k);
ClassifierKind classifier_from_name(const std::string& name);  // nb, svm, lvq, dtable

struct ClassifierConfig {
    ClassifierKind kind = ClassifierKind::linear_svm;
    double svm_c = 1.0;
    double svm_tol = 1e-3;
    int lvq_prototypes_per_class = 4;
    double lvq_initial_rate = 0.3;
    int lvq_epochs = 1000;
    int dtable_bins = 10;
    double nb_variance_floor = 1e-6;
    std::uint64_t seed = 0;
};

// Training/prediction data: rows = samples, row-major.
struct SampleMatrix {
    std::vector<double> x;
    std::size_t n = 0, d = 0;
    const double* row(std::size_t i) const { return x.data() + i * d; }
    double* row(std::size_t i) { return x.data() + i * d; }
};

// samples x features slice of a probesets x samples matrix.
SampleMatrix extract_samples(const ExpressionMatrix& m,
                             const std::vector<std::size_t>& sample_idx,
                             const std::vector<std::size_t>& feature_idx);

struct SvmPairMachine {
    int class_a = 0, class_b = 0;  // indices into class_set, a < b; a maps to +1
    std::vector<double> w;
    double bias = 0.0;
    std::vector<double> alpha;          // aligned with samples
    std::vector<std::size_t> samples;   // training-row indices of this pair
    std::vector<double> dual_trace;
};

struct DecisionTableModel {
    std::vector<std::vector<double>> bin_edges;                       // per feature
    std::map<std::vector<std::uint8_t>, std::vector<double>> cells;   // cell -> class distribution
    std::vector<double> fallback;                                     // global class distribution
};

struct ClassifierModel {
    ClassifierKind kind = ClassifierKind::linear_svm;
    std::vector<std::string> class_set;
    std::size_t n_features = 0;
    ClassifierConfig config;

    // naive bayes, class-major [c * d + f]
    std::vector<double> nb_mean, nb_var, nb_log_prior;

    std::vector<SvmPairMachine> svm_pairs;

    // lvq prototypes, row-major [p * d]
    std::vector<double> lvq_prototypes;
    std::vector<int> lvq_proto_class;

    DecisionTableModel dtable;
};

// y holds class indices into class_set; every class must appear at least once.
ClassifierModel fit(const SampleMatrix& train, const std::vector<int>& y,
                    const std::vector<std::string>& class_set, const ClassifierConfig& cfg);

// Always a distribution: nonnegative, sums to 1.
std::vector<double> predict_proba(const ClassifierModel& model, const double* sample,
                                  std::size_t d);
// argmax of predict_proba; ties resolve to the earliest class in class_set.
int predict_index(const ClassifierModel& model, const double* sample, std::size_t d);
std::string predict(const ClassifierModel& model, const double* sample, std::size_t d);

struct PairWeights {
    std::string class_a, class_b;
    std::vector<double> w;
    double bias = 0.0;
};
// Primal weight vector and bias of each one-vs-one machine; model must be a
// linear SVM.
std::vector<PairWeights> svm_weights(const ClassifierModel& model);

// Versioned JSON document for reproducibility.
std::string model_to_json(const ClassifierModel& model);
ClassifierModel model_from_json(const std::string& text);

}  // namespace biomark

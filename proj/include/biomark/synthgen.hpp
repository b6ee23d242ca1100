#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biomark/types.hpp"

namespace biomark {

struct InformativeGene {
    std::size_t gene_index = 0;
    std::vector<double> class_shifts;  // per class, in within-gene log-std units
};

// MAS5-like generator: per-gene log-normal base (right-skewed raw values),
// per-class mean shifts for planted markers, Bernoulli Present calls, and
// injected outliers placed at class_mean +/- magnitude * class_std on the
// raw scale.
struct SynthSpec {
    std::size_t genes = 2000;
    std::vector<std::size_t> class_sizes = {22, 33, 50};
    std::vector<std::string> class_names;  // default HC/ND/PD for 3 classes, else C1..Ck
    std::vector<InformativeGene> informative;
    double log_mean_lo = 5.0, log_mean_hi = 10.0;  // base-2 log scale
    double log_std_lo = 0.5, log_std_hi = 1.5;
    double present_rate = 1.0;
    double outlier_rate = 0.0;
    double outlier_magnitude = 6.0;  // within-class std units
    std::uint64_t seed = 0;
};

struct OutlierInjection {
    std::size_t gene = 0;
    std::size_t sample = 0;
    double original = 0.0;
    double injected = 0.0;
};

struct TruthRecord {
    std::vector<InformativeGene> informative;
    std::vector<OutlierInjection> outliers;
};

struct SynthResult {
    LabeledDataset dataset;  // stage = raw
    CallMatrix calls;
    TruthRecord truth;
};

// Same spec + seed -> bit-identical output. Raw values are clamped at 0.01.
SynthResult generate(const SynthSpec& spec);

std::string truth_to_json_string(const TruthRecord& truth);
TruthRecord truth_from_json_string(const std::string& text);

}  // namespace biomark

#include "biomark/types.hpp"

#include <unordered_map>
#include <unordered_set>

#include "biomark/error.hpp"

namespace biomark {

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::raw: return "raw";
        case Stage::log: return "log";
        case Stage::zscore: return "zscore";
    }
    return "?";
}

char call_symbol(Call c) {
    switch (c) {
        case Call::Present: return 'P';
        case Call::Marginal: return 'M';
        case Call::Absent: return 'A';
    }
    return '?';
}

namespace {

void check_unique(const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string> seen;
    seen.reserve(ids.size());
    for (const auto& id : ids) {
        if (!seen.insert(id).second)
            throw DataError("duplicate_id", std::string("duplicate ") + what + " '" + id + "'");
    }
}

}  // namespace

void ExpressionMatrix::validate() const {
    if (values.size() != n_probesets() * n_samples())
        throw DataError("shape_mismatch", "value count does not match probesets x samples");
    check_unique(probeset_ids, "probeset ID");
    check_unique(sample_ids, "sample ID");
    if (stage == Stage::raw) {
        for (std::size_t p = 0; p < n_probesets(); ++p)
            for (std::size_t s = 0; s < n_samples(); ++s)
                if (at(p, s) < 0.0)
                    throw DataError("negative_raw_value",
                                    "negative value at probeset '" + probeset_ids[p] +
                                        "', sample '" + sample_ids[s] + "'");
    }
}

void CallMatrix::validate() const {
    if (calls.size() != n_probesets() * n_samples())
        throw DataError("shape_mismatch", "call count does not match probesets x samples");
    check_unique(probeset_ids, "probeset ID");
    check_unique(sample_ids, "sample ID");
}

void CallMatrix::validate_against(const ExpressionMatrix& m) const {
    if (n_probesets() != m.n_probesets() || n_samples() != m.n_samples())
        throw DataError("call_dimension_mismatch",
                        "call matrix is " + std::to_string(n_probesets()) + "x" +
                            std::to_string(n_samples()) + " but expression matrix is " +
                            std::to_string(m.n_probesets()) + "x" +
                            std::to_string(m.n_samples()));
    if (probeset_ids != m.probeset_ids)
        throw DataError("call_id_mismatch", "call matrix probeset IDs differ from companion");
    if (sample_ids != m.sample_ids)
        throw DataError("call_id_mismatch", "call matrix sample IDs differ from companion");
}

std::vector<int> LabeledDataset::class_indices() const {
    std::unordered_map<std::string, int> index;
    for (std::size_t c = 0; c < class_set.size(); ++c) index[class_set[c]] = static_cast<int>(c);
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
        auto it = index.find(l);
        if (it == index.end())
            throw DataError("unknown_label", "label '" + l + "' not in class set");
        out.push_back(it->second);
    }
    return out;
}

std::vector<std::vector<std::size_t>> LabeledDataset::samples_by_class() const {
    const auto idx = class_indices();
    std::vector<std::vector<std::size_t>> groups(class_set.size());
    for (std::size_t s = 0; s < idx.size(); ++s) groups[static_cast<std::size_t>(idx[s])].push_back(s);
    return groups;
}

void LabeledDataset::validate() const {
    matrix.validate();
    if (labels.size() != matrix.n_samples())
        throw DataError("label_count_mismatch", "label count does not match sample count");
    if (class_set.size() < 2)
        throw DataError("too_few_classes", "class set must contain at least 2 classes");
    class_indices();  // throws on labels outside class_set
}

std::vector<std::string> distinct_labels(const std::vector<std::string>& labels) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& l : labels)
        if (seen.insert(l).second) out.push_back(l);
    return out;
}

LabeledDataset make_labeled(ExpressionMatrix matrix, std::vector<std::string> labels) {
    LabeledDataset ds;
    ds.matrix = std::move(matrix);
    ds.class_set = distinct_labels(labels);
    ds.labels = std::move(labels);
    ds.validate();
    return ds;
}

}  // namespace biomark

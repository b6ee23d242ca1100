#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biomark/types.hpp"

namespace biomark {

// Tab-separated matrix format: header row is sample IDs (first header cell is
// a corner label, ignored on parse), each data row is probeset ID followed by
// one value per sample. UTF-8, '.' decimal separator, LF or CRLF.
ExpressionMatrix parse_expression_table(std::string_view text);

// Same layout with P/M/A cells.
CallMatrix parse_call_table(std::string_view text);

// Class label per sample from its ID prefix ("<prefix>_rest"). Returns
// (labels, class_set in first-appearance order); throws DataError listing
// every sample ID that matches no known prefix.
std::pair<std::vector<std::string>, std::vector<std::string>> infer_labels(
    const std::vector<std::string>& sample_ids,
    const std::vector<std::string>& prefixes = {"HC", "ND", "PD"});

LabeledDataset label_by_prefix(ExpressionMatrix matrix,
                               const std::vector<std::string>& prefixes = {"HC", "ND", "PD"});

// Values are rendered with 12 significant digits so parse(format(m)) returns
// IDs exactly and values to better than 1 part in 1e9.
std::string format_matrix(const ExpressionMatrix& m, const std::string& corner = "probeset_id");
std::string format_calls(const CallMatrix& m, const std::string& corner = "probeset_id");

std::string format_value(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace biomark

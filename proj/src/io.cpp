#include "biomark/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "biomark/error.hpp"

namespace biomark {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
        std::size_t tab = line.find('\t', pos);
        if (tab == std::string_view::npos) {
            cells.push_back(line.substr(pos));
            break;
        }
        cells.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
    return cells;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v))
        throw DataError("non_numeric_cell",
                        "cell at data row " + std::to_string(row + 1) + ", column " +
                            std::to_string(col + 1) + " is not a finite number: '" +
                            std::string(cell) + "'");
    return v;
}

struct TableShape {
    std::vector<std::string> sample_ids;
    std::vector<std::string_view> data_lines;
};

TableShape parse_header(std::string_view text) {
    auto lines = split_lines(text);
    if (lines.empty()) throw DataError("empty_table", "table has no header row");
    auto header = split_tabs(lines[0]);
    if (header.size() < 2) throw DataError("empty_table", "header row has no sample columns");
    TableShape shape;
    for (std::size_t i = 1; i < header.size(); ++i) shape.sample_ids.emplace_back(header[i]);
    shape.data_lines.assign(lines.begin() + 1, lines.end());
    return shape;
}

}  // namespace

ExpressionMatrix parse_expression_table(std::string_view text) {
    TableShape shape = parse_header(text);
    const std::size_t n_samples = shape.sample_ids.size();

    ExpressionMatrix m;
    m.sample_ids = std::move(shape.sample_ids);
    m.probeset_ids.reserve(shape.data_lines.size());
    m.values.reserve(shape.data_lines.size() * n_samples);
    m.stage = Stage::raw;

    for (std::size_t r = 0; r < shape.data_lines.size(); ++r) {
        auto cells = split_tabs(shape.data_lines[r]);
        if (cells.size() != n_samples + 1)
            throw DataError("ragged_row", "data row " + std::to_string(r + 1) + " has " +
                                              std::to_string(cells.size() - 1) +
                                              " value cells, expected " +
                                              std::to_string(n_samples));
        m.probeset_ids.emplace_back(cells[0]);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const double v = parse_cell(cells[c], r, c);
            if (v < 0.0)
                throw DataError("negative_raw_value",
                                "negative value at data row " + std::to_string(r + 1) +
                                    " (probeset '" + std::string(cells[0]) + "'), column " +
                                    std::to_string(c + 1));
            m.values.push_back(v);
        }
    }
    m.validate();
    return m;
}

CallMatrix parse_call_table(std::string_view text) {
    TableShape shape = parse_header(text);
    const std::size_t n_samples = shape.sample_ids.size();

    CallMatrix m;
    m.sample_ids = std::move(shape.sample_ids);
    m.probeset_ids.reserve(shape.data_lines.size());
    m.calls.reserve(shape.data_lines.size() * n_samples);

    for (std::size_t r = 0; r < shape.data_lines.size(); ++r) {
        auto cells = split_tabs(shape.data_lines[r]);
        if (cells.size() != n_samples + 1)
            throw DataError("ragged_row", "call row " + std::to_string(r + 1) + " has " +
                                              std::to_string(cells.size() - 1) +
                                              " cells, expected " + std::to_string(n_samples));
        m.probeset_ids.emplace_back(cells[0]);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            std::string_view cell = cells[c];
            Call call;
            if (cell == "P")
                call = Call::Present;
            else if (cell == "M")
                call = Call::Marginal;
            else if (cell == "A")
                call = Call::Absent;
            else
                throw DataError("unknown_call_symbol",
                                "unknown call symbol '" + std::string(cell) + "' at data row " +
                                    std::to_string(r + 1) + ", column " + std::to_string(c + 1));
            m.calls.push_back(call);
        }
    }
    m.validate();
    return m;
}

std::pair<std::vector<std::string>, std::vector<std::string>> infer_labels(
    const std::vector<std::string>& sample_ids, const std::vector<std::string>& prefixes) {
    std::vector<std::string> labels;
    labels.reserve(sample_ids.size());
    std::vector<std::string> offenders;
    for (const auto& id : sample_ids) {
        const std::string* best = nullptr;
        for (const auto& p : prefixes) {
            if (id.size() > p.size() + 1 && id.compare(0, p.size(), p) == 0 &&
                id[p.size()] == '_') {
                if (!best || p.size() > best->size()) best = &p;
            }
        }
        if (best)
            labels.push_back(*best);
        else
            offenders.push_back(id);
    }
    if (!offenders.empty()) {
        std::string msg = "sample IDs without a known class prefix:";
        for (const auto& id : offenders) msg += " '" + id + "'";
        throw DataError("unprefixed_sample_id", msg);
    }
    return {std::move(labels), distinct_labels(labels)};
}

LabeledDataset label_by_prefix(ExpressionMatrix matrix, const std::vector<std::string>& prefixes) {
    auto [labels, class_set] = infer_labels(matrix.sample_ids, prefixes);
    (void)class_set;
    return make_labeled(std::move(matrix), std::move(labels));
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string format_matrix(const ExpressionMatrix& m, const std::string& corner) {
    std::string out = corner;
    for (const auto& id : m.sample_ids) {
        out += '\t';
        out += id;
    }
    out += '\n';
    for (std::size_t p = 0; p < m.n_probesets(); ++p) {
        out += m.probeset_ids[p];
        const double* row = m.row(p);
        for (std::size_t s = 0; s < m.n_samples(); ++s) {
            out += '\t';
            out += format_value(row[s]);
        }
        out += '\n';
    }
    return out;
}

std::string format_calls(const CallMatrix& m, const std::string& corner) {
    std::string out = corner;
    for (const auto& id : m.sample_ids) {
        out += '\t';
        out += id;
    }
    out += '\n';
    for (std::size_t p = 0; p < m.n_probesets(); ++p) {
        out += m.probeset_ids[p];
        for (std::size_t s = 0; s < m.n_samples(); ++s) {
            out += '\t';
            out += call_symbol(m.at(p, s));
        }
        out += '\n';
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("file_open_failed", "cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw DataError("file_read_failed", "read error on '" + path + "'");
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("file_open_failed", "cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("file_write_failed", "write error on '" + path + "'");
}

}  // namespace biomark

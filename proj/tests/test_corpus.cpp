#include <doctest.h>

#include <random>

#include "biomark/error.hpp"
#include "biomark/io.hpp"
#include "biomark/types.hpp"

using namespace biomark;

TEST_CASE("expression table parses header and preserves order") {
    const std::string text =
        "ID\tHC_01\tND_01\tPD_01\n"
        "1007_s_at\t1.5\t2.25\t3\n"
        "1053_at\t0\t10.5\t99.25\n";
    const ExpressionMatrix m = parse_expression_table(text);
    CHECK(m.n_probesets() == 2);
    CHECK(m.n_samples() == 3);
    CHECK(m.sample_ids == std::vector<std::string>{"HC_01", "ND_01", "PD_01"});
    CHECK(m.probeset_ids == std::vector<std::string>{"1007_s_at", "1053_at"});
    CHECK(m.at(0, 1) == 2.25);
    CHECK(m.at(1, 2) == 99.25);
    CHECK(m.stage == Stage::raw);
}

TEST_CASE("empty and header-only tables") {
    CHECK_THROWS_AS(parse_expression_table(""), DataError);
    CHECK_THROWS_AS(parse_expression_table("justonecell\n"), DataError);
    const ExpressionMatrix headers_only = parse_expression_table("ID\tA_1\tB_1\n");
    CHECK(headers_only.n_probesets() == 0);
    CHECK(headers_only.n_samples() == 2);
}

TEST_CASE("oversized and non-finite literals are rejected") {
    CHECK_THROWS_AS(parse_expression_table("ID\tA_1\ng_at\t1e400\n"), DataError);
    CHECK_THROWS_AS(parse_expression_table("ID\tA_1\ng_at\tinf\n"), DataError);
    CHECK_THROWS_AS(parse_expression_table("ID\tA_1\ng_at\tnan\n"), DataError);
}

TEST_CASE("expression table accepts CRLF") {
    const ExpressionMatrix m = parse_expression_table("ID\tA_1\tB_1\r\ng_at\t1\t2\r\n");
    CHECK(m.n_probesets() == 1);
    CHECK(m.at(0, 1) == 2.0);
}

TEST_CASE("expression table rejects malformed input with coordinates") {
    CHECK_THROWS_WITH_AS(
        parse_expression_table("ID\tA_1\nx_at\t1\nx_at\t2\n"), doctest::Contains("x_at"),
        DataError);
    CHECK_THROWS_WITH_AS(parse_expression_table("ID\tA_1\tB_1\ng_at\t1\n"),
                         doctest::Contains("row 1"), DataError);
    CHECK_THROWS_WITH_AS(parse_expression_table("ID\tA_1\ng_at\tfoo\n"),
                         doctest::Contains("not a finite number"), DataError);
    CHECK_THROWS_AS(parse_expression_table("ID\tA_1\ng_at\t-3\n"), DataError);
    CHECK_THROWS_AS(parse_expression_table("ID\tA_1\tA_1\ng_at\t1\t2\n"), DataError);
}

TEST_CASE("call table maps P/M/A and flags bad symbols") {
    const CallMatrix c = parse_call_table("ID\tA_1\tB_1\tC_1\ng_at\tP\tM\tA\n");
    CHECK(c.at(0, 0) == Call::Present);
    CHECK(c.at(0, 1) == Call::Marginal);
    CHECK(c.at(0, 2) == Call::Absent);

    CHECK_THROWS_WITH_AS(parse_call_table("ID\tA_1\ng_at\tX\n"), doctest::Contains("'X'"),
                         DataError);
}

TEST_CASE("call matrix dimension mismatch against companion") {
    const ExpressionMatrix m =
        parse_expression_table("ID\tA_1\tB_1\tC_1\ng1\t1\t2\t3\ng2\t4\t5\t6\ng3\t7\t8\t9\n");
    const CallMatrix c = parse_call_table("ID\tA_1\tB_1\ng1\tP\tP\ng2\tA\tA\ng3\tP\tA\n");
    CHECK_THROWS_AS(c.validate_against(m), DataError);
}

TEST_CASE("infer_labels maps prefixes and reports offenders") {
    auto [labels, class_set] = infer_labels({"HC_01_log_z", "PD_50", "ND_07"});
    CHECK(labels == std::vector<std::string>{"HC", "PD", "ND"});
    CHECK(class_set == std::vector<std::string>{"HC", "PD", "ND"});

    CHECK_THROWS_WITH_AS(infer_labels({"HC_01", "SAMPLE_1"}), doctest::Contains("SAMPLE_1"),
                         DataError);
}

TEST_CASE("paper naming scheme yields the 22/33/50 split") {
    std::vector<std::string> ids;
    for (int i = 1; i <= 22; ++i) ids.push_back("HC_" + std::to_string(i));
    for (int i = 1; i <= 33; ++i) ids.push_back("ND_" + std::to_string(i));
    for (int i = 1; i <= 50; ++i) ids.push_back("PD_" + std::to_string(i));
    auto [labels, class_set] = infer_labels(ids);
    CHECK(class_set == std::vector<std::string>{"HC", "ND", "PD"});
    std::size_t hc = 0, nd = 0, pd = 0;
    for (const auto& l : labels) {
        if (l == "HC") ++hc;
        if (l == "ND") ++nd;
        if (l == "PD") ++pd;
    }
    CHECK(hc == 22);
    CHECK(nd == 33);
    CHECK(pd == 50);
}

TEST_CASE("write/parse round-trip is identity on IDs and values to 1e-9") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> mag(-6.0, 6.0);
    ExpressionMatrix m;
    m.stage = Stage::raw;
    m.sample_ids = {"HC_1", "HC_2", "ND_1", "PD_1"};
    for (int r = 0; r < 5; ++r) {
        m.probeset_ids.push_back("row" + std::to_string(r) + "_at");
        for (int c = 0; c < 4; ++c) m.values.push_back(std::pow(10.0, mag(gen)));
    }
    const ExpressionMatrix back = parse_expression_table(format_matrix(m));
    REQUIRE(back.probeset_ids == m.probeset_ids);
    REQUIRE(back.sample_ids == m.sample_ids);
    for (std::size_t i = 0; i < m.values.size(); ++i)
        CHECK(back.values[i] == doctest::Approx(m.values[i]).epsilon(1e-9));
}

TEST_CASE("matrix invariants") {
    ExpressionMatrix m;
    m.probeset_ids = {"a", "b"};
    m.sample_ids = {"X_1"};
    m.values = {1.0, -2.0};
    m.stage = Stage::raw;
    CHECK_THROWS_AS(m.validate(), DataError);  // negative raw value
    m.stage = Stage::log;
    CHECK_NOTHROW(m.validate());  // negatives fine after transform
    m.values.pop_back();
    CHECK_THROWS_AS(m.validate(), DataError);  // shape
}

TEST_CASE("labeled dataset validation") {
    ExpressionMatrix m = parse_expression_table("ID\tHC_1\tPD_1\ng\t1\t2\n");
    LabeledDataset ds = label_by_prefix(std::move(m));
    CHECK(ds.class_set == std::vector<std::string>{"HC", "PD"});
    CHECK(ds.class_indices() == std::vector<int>{0, 1});

    LabeledDataset bad = ds;
    bad.labels.pop_back();
    CHECK_THROWS_AS(bad.validate(), DataError);
}

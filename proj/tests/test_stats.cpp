#include <doctest.h>

#include <random>
#include <span>

#include "biomark/error.hpp"
#include "biomark/stats.hpp"
#include "oracles.hpp"

using namespace biomark;

namespace {
std::vector<double> random_values(std::mt19937& gen, std::size_t n, double lo = -5.0,
                                  double hi = 5.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> out(n);
    for (double& v : out) v = dist(gen);
    return out;
}
}  // namespace

TEST_CASE("welch_t frozen examples") {
    const std::vector<double> same{1, 2, 3};
    CHECK(stats::welch_t(same, same) == 0.0);

    // a=[4,6], b=[1,3]: mean diff 3, each variance 2 with n=2 -> 3/sqrt(2)
    const std::vector<double> a{4, 6}, b{1, 3};
    CHECK(stats::welch_t(a, b) == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(stats::welch_t(a, b) == doctest::Approx(2.1213203435596424).epsilon(1e-12));
    CHECK(stats::welch_t(b, a) == doctest::Approx(-stats::welch_t(a, b)).epsilon(1e-12));
}

TEST_CASE("welch_t degenerate groups") {
    const std::vector<double> ca{5, 5}, cb{5, 5}, cc{7, 7};
    CHECK(stats::welch_t(ca, cb) == 0.0);
    CHECK_THROWS_AS(stats::welch_t(ca, cc), AlgorithmError);
}

TEST_CASE("snr frozen examples") {
    // means 2 and 1, sample std 0.5 each
    const std::vector<double> a{1.5, 2.0, 2.5}, b{0.5, 1.0, 1.5};
    CHECK(stats::snr(a, b) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(stats::snr(a, a) == 0.0);
    CHECK_THROWS_AS(stats::snr(std::vector<double>{3, 3}, std::vector<double>{4, 4}),
                    AlgorithmError);
}

TEST_CASE("snr scale invariance") {
    std::mt19937 gen(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = random_values(gen, 6), b = random_values(gen, 9);
        const double base = stats::snr(a, b);
        const double c = std::uniform_real_distribution<double>(0.1, 40.0)(gen);
        auto sa = a, sb = b;
        for (double& v : sa) v *= c;
        for (double& v : sb) v *= c;
        CHECK(stats::snr(sa, sb) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("anova_f frozen examples") {
    CHECK(stats::anova_f({std::vector<double>{1, 2}, std::vector<double>{2, 1}}) == 0.0);

    // groups [0, 0.01], [1, 1.01]: MSB = 1.0, MSW = 5e-5 -> F = 20000
    const double f = stats::anova_f({std::vector<double>{0, 0.01}, std::vector<double>{1, 1.01}});
    CHECK(f == doctest::Approx(20000.0).epsilon(1e-9));

    CHECK_THROWS_AS(stats::anova_f({std::vector<double>{1, 1}, std::vector<double>{2, 2}}),
                    AlgorithmError);
}

TEST_CASE("anova_f equals pooled t squared on two groups") {
    std::mt19937 gen(23);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<std::size_t> size(2, 12);
        const auto a = random_values(gen, size(gen)), b = random_values(gen, size(gen));
        const double t = oracle::pooled_t(a, b);
        CHECK(stats::anova_f({a, b}) == doctest::Approx(t * t).epsilon(1e-9));
    }
}

TEST_CASE("anova_f invariant under group reordering") {
    std::mt19937 gen(29);
    const auto a = random_values(gen, 5), b = random_values(gen, 7), c = random_values(gen, 4);
    CHECK(stats::anova_f({a, b, c}) == doctest::Approx(stats::anova_f({c, a, b})).epsilon(1e-12));
}

TEST_CASE("statistics match independent formula oracles on random input") {
    std::mt19937 gen(37);
    std::uniform_int_distribution<std::size_t> size(2, 10);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto a = random_values(gen, size(gen)), b = random_values(gen, size(gen));
        CHECK(stats::welch_t(a, b) == doctest::Approx(oracle::welch_t(a, b)).epsilon(1e-12));
        CHECK(stats::snr(a, b) == doctest::Approx(oracle::snr(a, b)).epsilon(1e-12));
        const auto c = random_values(gen, size(gen));
        CHECK(stats::anova_f({a, b, c}) ==
              doctest::Approx(oracle::anova_f({a, b, c})).epsilon(1e-12));
        CHECK(stats::pearson(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("correlation ratio matches oracle and handles degenerate input") {
    std::mt19937 gen(41);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 12;
        const auto values = random_values(gen, n);
        std::vector<int> cls(n);
        std::uniform_int_distribution<int> pick(0, 2);
        for (int& c : cls) c = pick(gen);
        CHECK(stats::correlation_ratio(values, cls, 3) ==
              doctest::Approx(oracle::eta(values, cls, 3)).epsilon(1e-12));
    }
    const std::vector<double> flat(6, 2.5);
    const std::vector<int> cls{0, 0, 1, 1, 2, 2};
    CHECK(stats::correlation_ratio(flat, cls, 3) == 0.0);
}

TEST_CASE("skewness responds to asymmetry") {
    std::vector<double> right{1, 1, 1, 2, 2, 10};
    CHECK(stats::skewness(right) > 0.5);
    std::vector<double> sym{-2, -1, 0, 1, 2};
    CHECK(stats::skewness(sym) == doctest::Approx(0.0).epsilon(1e-12));
}

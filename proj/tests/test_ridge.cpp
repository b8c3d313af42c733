#include <doctest.h>

#include <cmath>
#include <random>

#include "rescast/errors.hpp"
#include "rescast/ridge.hpp"
#include "support/oracles.hpp"

using namespace rescast;
using namespace rescast::testsupport;

namespace {

FeatureMatrix matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    FeatureMatrix m;
    m.n_rows = rows;
    m.n_cols = cols;
    for (std::size_t c = 0; c < cols; ++c) m.col_names.push_back("c" + std::to_string(c));
    m.data.resize(rows * cols);
    for (auto& v : m.data) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 4.0 - 2.0;
    m.row_times.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) m.row_times[r] = UtcHour(static_cast<std::int64_t>(r));
    m.target.assign(rows, 0.0);
    return m;
}

}  // namespace

TEST_CASE("exact line through two points") {
    FeatureMatrix X;
    X.n_rows = 2;
    X.n_cols = 1;
    X.col_names = {"x"};
    X.data = {1.0, 2.0};
    const std::vector<double> y = {1.0, 2.0};
    const RidgeModel m = ridge_fit(X, y, 0.0);
    CHECK(m.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.intercept == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.predict(std::vector<double>{5.0}) == doctest::Approx(5.0));
}

TEST_CASE("huge lambda shrinks to the target mean") {
    std::mt19937_64 rng(31);
    auto X = matrix(50, 4, rng);
    std::vector<double> y(50);
    for (auto& v : y) v = static_cast<double>(rng() % 100);
    const double mean = [&] {
        double s = 0;
        for (double v : y) s += v;
        return s / 50.0;
    }();
    const RidgeModel m = ridge_fit(X, y, 1e12);
    for (double w : m.weights) CHECK(std::abs(w) < 1e-6);
    CHECK(m.predict(X.row(7)) == doctest::Approx(mean).epsilon(1e-6));
}

TEST_CASE("matches the hand-rolled normal-equations oracle") {
    std::mt19937_64 rng(37);
    for (int rep = 0; rep < 25; ++rep) {
        auto X = matrix(20, 5, rng);
        std::vector<double> y(20);
        for (auto& v : y) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 10.0;
        for (double lambda : {0.0, 0.3, 2.0}) {
            const RidgeModel m = ridge_fit(X, y, lambda);
            const OracleRidge o = ridge_normal_equations(X, y, lambda);
            for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(m.weights[j] - o.weights[j]) < 1e-8);
            CHECK(std::abs(m.intercept - o.intercept) < 1e-8);
        }
    }
}

TEST_CASE("lambda zero on a full-rank system reproduces OLS") {
    std::mt19937_64 rng(41);
    auto X = matrix(40, 6, rng);
    std::vector<double> y(40);
    for (auto& v : y) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 5.0 - 1.0;
    const RidgeModel m = ridge_fit(X, y, 0.0);
    const OracleRidge o = ols_with_intercept(X, y);
    for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(m.weights[j] - o.weights[j]) < 1e-8);
    CHECK(std::abs(m.intercept - o.intercept) < 1e-8);
}

TEST_CASE("singular system with lambda zero is rejected") {
    std::mt19937_64 rng(43);
    auto X = matrix(30, 2, rng);
    // Duplicate the first column.
    for (std::size_t r = 0; r < X.n_rows; ++r) X.data[r * 2 + 1] = X.data[r * 2];
    std::vector<double> y(30, 1.0);
    y[3] = 2.0;
    try {
        ridge_fit(X, y, 0.0);
        FAIL("expected SingularSystem");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::SingularSystem);
    }
    CHECK_NOTHROW(ridge_fit(X, y, 0.5));
}

TEST_CASE("rfe with k == width is the identity selection") {
    std::mt19937_64 rng(47);
    auto X = matrix(30, 5, rng);
    std::vector<double> y(30, 1.0);
    const SelectionResult s = rfe(X, y, 5, 2, 1.0);
    CHECK(s.kept_columns == X.col_names);
    CHECK(s.trace.empty());
}

TEST_CASE("rfe keeps a planted signal column") {
    std::mt19937_64 rng(53);
    auto X = matrix(300, 6, rng);
    std::vector<double> y(300);
    for (std::size_t r = 0; r < 300; ++r)
        y[r] = 2.0 * X.at(r, 0) + 0.01 * (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5);
    const SelectionResult s = rfe(X, y, 1, 1, 1.0);
    REQUIRE(s.kept_columns.size() == 1);
    CHECK(s.kept_columns[0] == "c0");
    CHECK(s.trace.size() == 5);
    for (const auto& step : s.trace) CHECK(step.val_mse >= 0.0);
}

TEST_CASE("rfe respects the step size and stops exactly at k") {
    std::mt19937_64 rng(59);
    auto X = matrix(60, 9, rng);
    std::vector<double> y(60);
    for (auto& v : y) v = static_cast<double>(rng() % 7);
    const SelectionResult s = rfe(X, y, 4, 2, 1.0);
    CHECK(s.kept_columns.size() == 4);
    // 9 -> 7 -> 5 -> 4: the last step drops only one column.
    REQUIRE(s.trace.size() == 3);
    CHECK(s.trace[0].dropped.size() == 2);
    CHECK(s.trace[2].dropped.size() == 1);
}

TEST_CASE("rfe is deterministic") {
    std::mt19937_64 rng(61);
    auto X = matrix(80, 7, rng);
    std::vector<double> y(80);
    for (auto& v : y) v = static_cast<double>(rng() % 13);
    const SelectionResult a = rfe(X, y, 3, 2, 1.0);
    const SelectionResult b = rfe(X, y, 3, 2, 1.0);
    CHECK(a.kept_columns == b.kept_columns);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].val_mse == b.trace[i].val_mse);
}

TEST_CASE("rfe rejects a bad k") {
    std::mt19937_64 rng(67);
    auto X = matrix(20, 3, rng);
    std::vector<double> y(20, 1.0);
    CHECK_THROWS_AS(rfe(X, y, 0, 1, 1.0), Error);
    CHECK_THROWS_AS(rfe(X, y, 4, 1, 1.0), Error);
}

TEST_CASE("selection JSON round trip") {
    SelectionResult s;
    s.kept_columns = {"a", "b"};
    s.trace = {{{"c", "d"}, 0.25}, {{"e"}, 0.125}};
    const SelectionResult back = selection_from_json(selection_to_json(s));
    CHECK(back.kept_columns == s.kept_columns);
    REQUIRE(back.trace.size() == 2);
    CHECK(back.trace[0].dropped == s.trace[0].dropped);
    CHECK(back.trace[1].val_mse == 0.125);
}

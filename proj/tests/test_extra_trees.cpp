#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "rescast/errors.hpp"
#include "rescast/extra_trees.hpp"
#include "support/oracles.hpp"

using namespace rescast;
using namespace rescast::testsupport;

namespace {

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    FeatureMatrix m;
    m.n_rows = rows;
    m.n_cols = cols;
    for (std::size_t c = 0; c < cols; ++c) m.col_names.push_back("f" + std::to_string(c));
    m.data.resize(rows * cols);
    for (auto& v : m.data) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    m.row_times.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) m.row_times[r] = UtcHour(static_cast<std::int64_t>(r));
    m.target.assign(rows, 0.0);
    return m;
}

std::string forest_bytes(const Forest& f) {
    std::ostringstream out(std::ios::binary);
    save_forest(out, f);
    return out.str();
}

}  // namespace

TEST_CASE("constant targets give single-leaf trees") {
    std::mt19937_64 rng(101);
    auto X = random_matrix(50, 4, rng);
    std::vector<double> y(50, 3.25);
    ExtParams p;
    p.n_estimators = 5;
    const Forest f = ext_fit(X, y, p);
    for (const Tree& t : f.trees) {
        REQUIRE(t.nodes.size() == 1);
        CHECK(t.nodes[0].value == 3.25);
        CHECK(t.nodes[0].count == 50);
    }
}

TEST_CASE("a depth-zero stump predicts the target mean everywhere") {
    std::mt19937_64 rng(103);
    auto X = random_matrix(64, 3, rng);
    std::vector<double> y(64);
    double sum = 0.0;
    for (auto& v : y) {
        v = static_cast<double>(rng() % 17);
        sum += v;
    }
    ExtParams p;
    p.n_estimators = 1;
    p.max_depth = 0;
    const Forest f = ext_fit(X, y, p);
    CHECK(f.predict_row(X.row(0)) == sum / 64.0);
    CHECK(f.predict_row(X.row(63)) == sum / 64.0);
}

TEST_CASE("learns a nonlinear signal well below the target variance") {
    std::mt19937_64 rng(107);
    auto X = random_matrix(200, 3, rng);
    std::vector<double> y(200);
    for (std::size_t r = 0; r < 200; ++r)
        y[r] = X.at(r, 0) * X.at(r, 0) +
               0.05 * (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5);

    auto Xtest = random_matrix(100, 3, rng);
    std::vector<double> ytest(100);
    for (std::size_t r = 0; r < 100; ++r) ytest[r] = Xtest.at(r, 0) * Xtest.at(r, 0);

    ExtParams p;
    p.n_estimators = 100;
    p.seed = 7;
    const Forest f = ext_fit(X, y, p);

    double mean = 0.0;
    for (double v : ytest) mean += v;
    mean /= 100.0;
    double var = 0.0, mse = 0.0;
    for (std::size_t r = 0; r < 100; ++r) {
        var += (ytest[r] - mean) * (ytest[r] - mean);
        const double e = f.predict_row(Xtest.row(r)) - ytest[r];
        mse += e * e;
    }
    CHECK(mse / 100.0 < 0.5 * var / 100.0);
}

TEST_CASE("predictions stay inside the training target envelope") {
    std::mt19937_64 rng(109);
    auto X = random_matrix(120, 5, rng);
    std::vector<double> y(120);
    for (auto& v : y) v = static_cast<double>(rng() % 1000) / 10.0;
    ExtParams p;
    p.n_estimators = 30;
    p.seed = 3;
    const Forest f = ext_fit(X, y, p);

    auto probes = random_matrix(200, 5, rng);
    for (std::size_t r = 0; r < probes.n_rows; ++r) {
        const double pred = f.predict_row(probes.row(r));
        CHECK(pred >= f.y_min);
        CHECK(pred <= f.y_max);
    }
}

TEST_CASE("forest predictions stay inside the per-tree envelope") {
    std::mt19937_64 rng(113);
    auto X = random_matrix(90, 4, rng);
    std::vector<double> y(90);
    for (auto& v : y) v = static_cast<double>(rng() % 31);
    ExtParams p;
    p.n_estimators = 9;
    p.seed = 11;
    const Forest f = ext_fit(X, y, p);
    for (std::size_t r = 0; r < 20; ++r) {
        double lo = 1e300, hi = -1e300, mean = 0.0;
        for (const Tree& t : f.trees) {
            const double v = t.predict(X.row(r));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            mean += v;
        }
        mean /= static_cast<double>(f.trees.size());
        const double pred = f.predict_row(X.row(r));
        CHECK(pred >= lo - 1e-12);
        CHECK(pred <= hi + 1e-12);
        CHECK(pred == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("a forest of two identical trees predicts like either tree") {
    std::mt19937_64 rng(127);
    auto X = random_matrix(60, 3, rng);
    std::vector<double> y(60);
    for (auto& v : y) v = static_cast<double>(rng() % 13);
    ExtParams p;
    p.n_estimators = 1;
    p.seed = 5;
    Forest one = ext_fit(X, y, p);
    Forest two = one;
    two.trees.push_back(one.trees[0]);
    two.params.n_estimators = 2;
    for (std::size_t r = 0; r < X.n_rows; ++r)
        CHECK(two.predict_row(X.row(r)) == one.trees[0].predict(X.row(r)));
}

TEST_CASE("double fits are bit-identical") {
    std::mt19937_64 rng(131);
    auto X = random_matrix(300, 8, rng);
    std::vector<double> y(300);
    for (auto& v : y) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 9.0;
    ExtParams p;
    p.n_estimators = 40;
    p.seed = 12345;
    const Forest a = ext_fit(X, y, p);
    const Forest b = ext_fit(X, y, p);
    CHECK(forest_bytes(a) == forest_bytes(b));

    ExtParams q = p;
    q.seed = 54321;
    CHECK(forest_bytes(ext_fit(X, y, q)) != forest_bytes(a));
}

TEST_CASE("subsampled candidate features still fit deterministically") {
    std::mt19937_64 rng(137);
    auto X = random_matrix(150, 10, rng);
    std::vector<double> y(150);
    for (auto& v : y) v = static_cast<double>(rng() % 29);
    ExtParams p;
    p.n_estimators = 15;
    p.k_features = 3;
    p.seed = 99;
    const Forest a = ext_fit(X, y, p);
    const Forest b = ext_fit(X, y, p);
    CHECK(forest_bytes(a) == forest_bytes(b));
}

TEST_CASE("unlimited depth fits the training set at least as well as depth one") {
    std::mt19937_64 rng(139);
    for (int rep = 0; rep < 10; ++rep) {
        auto X = random_matrix(80, 4, rng);
        std::vector<double> y(80);
        for (auto& v : y) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 3.0;

        auto train_mse = [&](int depth) {
            ExtParams p;
            p.n_estimators = 10;
            p.max_depth = depth;
            p.seed = static_cast<std::uint64_t>(rep);
            const Forest f = ext_fit(X, y, p);
            double sse = 0.0;
            for (std::size_t r = 0; r < X.n_rows; ++r) {
                const double e = f.predict_row(X.row(r)) - y[r];
                sse += e * e;
            }
            return sse;
        };
        CHECK(train_mse(-1) <= train_mse(1) + 1e-12);
    }
}

TEST_CASE("exhaustive midpoint mode equals the brute-force greedy oracle") {
    std::mt19937_64 rng(149);
    for (int rep = 0; rep < 8; ++rep) {
        const std::size_t rows = 20 + rng() % 31;  // <= 50
        auto X = random_matrix(rows, 3, rng);
        std::vector<double> y(rows);
        for (auto& v : y) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 5.0 - 1.0;

        ExtParams p;
        p.n_estimators = 1;
        p.split_mode = SplitMode::exhaustive_midpoint;
        const Forest f = ext_fit(X, y, p);

        std::vector<std::size_t> all(rows);
        for (std::size_t r = 0; r < rows; ++r) all[r] = r;
        const auto oracle = greedy_tree(X, y, all, 0, -1, 2);
        CHECK(trees_equal(f.trees[0], 0, *oracle));
    }
}

TEST_CASE("grid search explores the whole Cartesian grid") {
    std::mt19937_64 rng(151);
    auto X = random_matrix(120, 4, rng);
    std::vector<double> y(120);
    for (std::size_t r = 0; r < 120; ++r)
        y[r] = std::sin(3.0 * X.at(r, 0)) + 0.3 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);

    ExtGrid grid;
    grid.n_estimators = {1, 100};
    grid.max_depth = {-1};
    grid.min_samples_split = {2};
    const GridResult g = grid_search(grid, X, y, 0.25, 21);
    CHECK(g.table.size() == 2);
    CHECK(g.best.n_estimators == 100);  // more trees denoise the estimate
    CHECK(g.table[1].val_mse <= g.table[0].val_mse);

    ExtGrid single;
    single.n_estimators = {7};
    single.max_depth = {4};
    single.min_samples_split = {5};
    const GridResult s = grid_search(single, X, y, 0.25, 21);
    CHECK(s.table.size() == 1);
    CHECK(s.best.n_estimators == 7);
    CHECK(s.best.max_depth == 4);
    CHECK(s.table[0].val_mse == s.table[0].val_mse);  // finite

    ExtGrid empty;
    empty.n_estimators = {};
    CHECK_THROWS_AS(grid_search(empty, X, y, 0.25, 21), Error);
}

TEST_CASE("save and load round trip, byte for byte") {
    std::mt19937_64 rng(157);
    auto X = random_matrix(100, 5, rng);
    std::vector<double> y(100);
    for (auto& v : y) v = static_cast<double>(rng() % 41);
    ExtParams p;
    p.n_estimators = 12;
    p.seed = 2024;
    const Forest f = ext_fit(X, y, p);

    const std::string bytes = forest_bytes(f);
    std::istringstream in(bytes, std::ios::binary);
    const Forest back = load_forest(in);
    CHECK(forest_bytes(back) == bytes);
    for (std::size_t r = 0; r < 10; ++r)
        CHECK(back.predict_row(X.row(r)) == f.predict_row(X.row(r)));
}

TEST_CASE("width mismatches are rejected") {
    std::mt19937_64 rng(163);
    auto X = random_matrix(40, 4, rng);
    std::vector<double> y(40, 1.0);
    y[0] = 2.0;
    ExtParams p;
    p.n_estimators = 2;
    const Forest f = ext_fit(X, y, p);
    auto wrong = random_matrix(5, 3, rng);
    CHECK_THROWS_AS(ext_predict(f, wrong), Error);
}

TEST_CASE("empty training is rejected") {
    FeatureMatrix X;
    X.n_cols = 2;
    X.col_names = {"a", "b"};
    std::vector<double> y;
    CHECK_THROWS_AS(ext_fit(X, y, ExtParams{}), Error);
}

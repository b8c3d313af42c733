#pragma once

// Independent reference implementations the production code is checked
// against. They deliberately share no code with the library paths they
// validate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "rescast/extra_trees.hpp"
#include "rescast/features.hpp"

namespace rescast::testsupport {

/// Ridge solution on standardized columns via Gauss-Jordan elimination with
/// partial pivoting in long double. Mirrors the contract, not the code:
/// population mean/std per column, unpenalized intercept, weights mapped
/// back to the original scale.
struct OracleRidge {
    std::vector<double> weights;
    double intercept = 0.0;
};

inline OracleRidge ridge_normal_equations(const FeatureMatrix& X, const std::vector<double>& y,
                                          double lambda) {
    const std::size_t n = X.n_rows, p = X.n_cols;
    std::vector<long double> mean(p, 0.0L), sd(p, 0.0L);
    for (std::size_t c = 0; c < p; ++c) {
        for (std::size_t r = 0; r < n; ++r) mean[c] += X.at(r, c);
        mean[c] /= n;
        for (std::size_t r = 0; r < n; ++r) {
            const long double d = X.at(r, c) - mean[c];
            sd[c] += d * d;
        }
        sd[c] = std::sqrt(sd[c] / n);
    }
    long double ybar = 0.0L;
    for (double v : y) ybar += v;
    ybar /= n;

    // Normal equations on the standardized system.
    std::vector<std::vector<long double>> A(p, std::vector<long double>(p + 1, 0.0L));
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            long double acc = 0.0L;
            for (std::size_t r = 0; r < n; ++r)
                acc += (X.at(r, i) - mean[i]) / sd[i] * (X.at(r, j) - mean[j]) / sd[j];
            A[i][j] = acc + (i == j ? lambda : 0.0L);
        }
        long double rhs = 0.0L;
        for (std::size_t r = 0; r < n; ++r)
            rhs += (X.at(r, i) - mean[i]) / sd[i] * (y[r] - ybar);
        A[i][p] = rhs;
    }

    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r)
            if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
        std::swap(A[col], A[pivot]);
        const long double diag = A[col][col];
        for (std::size_t j = col; j <= p; ++j) A[col][j] /= diag;
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) continue;
            const long double factor = A[r][col];
            for (std::size_t j = col; j <= p; ++j) A[r][j] -= factor * A[col][j];
        }
    }

    OracleRidge out;
    out.weights.resize(p);
    long double b0 = ybar;
    for (std::size_t j = 0; j < p; ++j) {
        out.weights[j] = static_cast<double>(A[j][p] / sd[j]);
        b0 -= A[j][p] * mean[j] / sd[j];
    }
    out.intercept = static_cast<double>(b0);
    return out;
}

/// Plain OLS with an explicit intercept column, solved the same way.
inline OracleRidge ols_with_intercept(const FeatureMatrix& X, const std::vector<double>& y) {
    const std::size_t n = X.n_rows, p = X.n_cols + 1;
    std::vector<std::vector<long double>> A(p, std::vector<long double>(p + 1, 0.0L));
    auto cell = [&](std::size_t r, std::size_t c) -> long double {
        return c == 0 ? 1.0L : static_cast<long double>(X.at(r, c - 1));
    };
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            long double acc = 0.0L;
            for (std::size_t r = 0; r < n; ++r) acc += cell(r, i) * cell(r, j);
            A[i][j] = acc;
        }
        long double rhs = 0.0L;
        for (std::size_t r = 0; r < n; ++r) rhs += cell(r, i) * y[r];
        A[i][p] = rhs;
    }
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r)
            if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
        std::swap(A[col], A[pivot]);
        const long double diag = A[col][col];
        for (std::size_t j = col; j <= p; ++j) A[col][j] /= diag;
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) continue;
            const long double factor = A[r][col];
            for (std::size_t j = col; j <= p; ++j) A[r][j] -= factor * A[col][j];
        }
    }
    OracleRidge out;
    out.intercept = static_cast<double>(A[0][p]);
    out.weights.resize(X.n_cols);
    for (std::size_t j = 0; j < X.n_cols; ++j) out.weights[j] = static_cast<double>(A[j + 1][p]);
    return out;
}

/// Clean-room greedy regression tree: every feature, every midpoint between
/// consecutive distinct sorted values, best variance reduction wins, ties to
/// the earliest feature and smallest threshold. Leaf means accumulate in
/// ascending row order.
struct OracleNode {
    int feature = -1;
    double threshold = 0.0;
    double value = 0.0;
    std::size_t count = 0;
    std::unique_ptr<OracleNode> left, right;
};

inline std::unique_ptr<OracleNode> greedy_tree(const FeatureMatrix& X,
                                               const std::vector<double>& y,
                                               std::vector<std::size_t> rows, int depth,
                                               int max_depth, int min_samples_split) {
    auto node = std::make_unique<OracleNode>();
    std::sort(rows.begin(), rows.end());
    node->count = rows.size();

    double sum = 0.0, lo = y[rows[0]], hi = y[rows[0]];
    for (std::size_t r : rows) {
        sum += y[r];
        lo = std::min(lo, y[r]);
        hi = std::max(hi, y[r]);
    }

    const bool capped = max_depth >= 0 && depth >= max_depth;
    if (rows.size() < static_cast<std::size_t>(std::max(2, min_samples_split)) || capped ||
        lo == hi) {
        node->value = sum / static_cast<double>(rows.size());
        return node;
    }

    double best_score = -std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, double>> xy(rows.size());
    for (std::size_t f = 0; f < X.n_cols; ++f) {
        for (std::size_t i = 0; i < rows.size(); ++i) xy[i] = {X.at(rows[i], f), y[rows[i]]};
        std::stable_sort(xy.begin(), xy.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        double left_sum = 0.0;
        for (std::size_t i = 0; i + 1 < xy.size(); ++i) {
            left_sum += xy[i].second;
            if (xy[i].first == xy[i + 1].first) continue;
            const double thr = (xy[i].first + xy[i + 1].first) / 2.0;
            if (!(thr > xy[i].first)) continue;
            const double right_sum = sum - left_sum;
            const double score =
                left_sum * left_sum / static_cast<double>(i + 1) +
                right_sum * right_sum / static_cast<double>(xy.size() - i - 1);
            if (score > best_score) {
                best_score = score;
                best_feature = static_cast<int>(f);
                best_threshold = thr;
            }
        }
    }
    if (best_feature < 0) {
        node->value = sum / static_cast<double>(rows.size());
        return node;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows)
        (X.at(r, static_cast<std::size_t>(best_feature)) < best_threshold ? left_rows
                                                                          : right_rows)
            .push_back(r);
    node->feature = best_feature;
    node->threshold = best_threshold;
    node->left = greedy_tree(X, y, std::move(left_rows), depth + 1, max_depth, min_samples_split);
    node->right =
        greedy_tree(X, y, std::move(right_rows), depth + 1, max_depth, min_samples_split);
    return node;
}

/// Structural equality between a library tree and the oracle tree.
inline bool trees_equal(const Tree& tree, std::int32_t at, const OracleNode& oracle) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(at)];
    if ((n.feature < 0) != (oracle.feature < 0)) return false;
    if (n.count != oracle.count) return false;
    if (n.feature < 0) return n.value == oracle.value;
    if (n.feature != oracle.feature || n.threshold != oracle.threshold) return false;
    return trees_equal(tree, n.left, *oracle.left) && trees_equal(tree, n.right, *oracle.right);
}

}  // namespace rescast::testsupport

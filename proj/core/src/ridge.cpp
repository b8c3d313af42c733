#include "rescast/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rescast/errors.hpp"

namespace rescast {

double RidgeModel::predict(std::span<const double> row) const {
    if (row.size() != weights.size())
        throw Error(Errc::WidthMismatch, "row width " + std::to_string(row.size()) +
                                             " vs model width " + std::to_string(weights.size()));
    double acc = intercept;
    for (std::size_t j = 0; j < row.size(); ++j) acc += weights[j] * row[j];
    return acc;
}

namespace {

struct Standardized {
    Eigen::MatrixXd Z;            // zero-mean, unit-variance columns; constant columns zeroed
    Eigen::VectorXd mean, stddev; // population form over the fit rows
    std::vector<bool> active;     // stddev > 0
};

Standardized standardize(const FeatureMatrix& X, std::size_t row_begin, std::size_t row_end) {
    const std::size_t n = row_end - row_begin;
    const std::size_t p = X.n_cols;
    Standardized s;
    s.Z.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    s.mean.resize(static_cast<Eigen::Index>(p));
    s.stddev.resize(static_cast<Eigen::Index>(p));
    s.active.assign(p, true);

    for (std::size_t c = 0; c < p; ++c) {
        double sum = 0.0;
        for (std::size_t r = row_begin; r < row_end; ++r) sum += X.at(r, c);
        const double mean = sum / static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = row_begin; r < row_end; ++r) {
            const double d = X.at(r, c) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        const double sd = std::sqrt(var);
        s.mean[static_cast<Eigen::Index>(c)] = mean;
        s.stddev[static_cast<Eigen::Index>(c)] = sd;
        if (sd > 0.0) {
            for (std::size_t r = row_begin; r < row_end; ++r)
                s.Z(static_cast<Eigen::Index>(r - row_begin), static_cast<Eigen::Index>(c)) =
                    (X.at(r, c) - mean) / sd;
        } else {
            s.active[c] = false;
            s.Z.col(static_cast<Eigen::Index>(c)).setZero();
        }
    }
    return s;
}

/// Solves (G + lambda I) a = c on the active subset, leaving inactive
/// coordinates at zero. Throws SingularSystem when lambda == 0 and the
/// Gram matrix is rank deficient.
Eigen::VectorXd solve_gram(const Eigen::MatrixXd& G, const Eigen::VectorXd& c, double lambda,
                           const std::vector<bool>& active) {
    std::vector<Eigen::Index> idx;
    for (std::size_t j = 0; j < active.size(); ++j)
        if (active[j]) idx.push_back(static_cast<Eigen::Index>(j));
    const Eigen::Index m = static_cast<Eigen::Index>(idx.size());

    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        b[i] = c[idx[static_cast<std::size_t>(i)]];
        for (Eigen::Index j = 0; j < m; ++j)
            A(i, j) = G(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    A.diagonal().array() += lambda;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (lambda == 0.0) {
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-12)
            throw Error(Errc::SingularSystem,
                        "Gram matrix is rank deficient and lambda is zero");
    }
    const Eigen::VectorXd sub = ldlt.solve(b);

    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(active.size()));
    for (Eigen::Index i = 0; i < m; ++i) full[idx[static_cast<std::size_t>(i)]] = sub[i];
    return full;
}

}  // namespace

RidgeModel ridge_fit(const FeatureMatrix& X, std::span<const double> y, double lambda) {
    if (X.n_rows == 0) throw Error(Errc::EmptyMatrix, "ridge_fit on empty matrix");
    if (y.size() != X.n_rows)
        throw Error(Errc::WidthMismatch, "target length does not match row count");
    if (lambda < 0.0) throw Error(Errc::Config, "ridge lambda must be >= 0");

    const std::size_t n = X.n_rows;
    Standardized s = standardize(X, 0, n);
    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    Eigen::VectorXd yc(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) yc[static_cast<Eigen::Index>(r)] = y[r] - y_mean;

    const Eigen::MatrixXd G = s.Z.transpose() * s.Z;
    const Eigen::VectorXd c = s.Z.transpose() * yc;
    const Eigen::VectorXd a = solve_gram(G, c, lambda, s.active);

    RidgeModel model;
    model.lambda = lambda;
    model.weights.resize(X.n_cols);
    model.intercept = y_mean;
    for (std::size_t j = 0; j < X.n_cols; ++j) {
        const auto je = static_cast<Eigen::Index>(j);
        if (!s.active[j]) {
            model.weights[j] = 0.0;
            continue;
        }
        model.weights[j] = a[je] / s.stddev[je];
        model.intercept -= a[je] * s.mean[je] / s.stddev[je];
    }
    return model;
}

SelectionResult rfe(const FeatureMatrix& X, std::span<const double> y, std::size_t k,
                    std::size_t step, double lambda) {
    if (k < 1 || k > X.n_cols)
        throw Error(Errc::InvalidK, "k = " + std::to_string(k) + " outside [1, " +
                                        std::to_string(X.n_cols) + "]");
    if (step < 1) throw Error(Errc::InvalidK, "step must be >= 1");
    if (y.size() != X.n_rows)
        throw Error(Errc::WidthMismatch, "target length does not match row count");

    SelectionResult result;
    if (k == X.n_cols) {
        result.kept_columns = X.col_names;
        return result;
    }

    // Chronological holdout: last 20% of rows score each elimination step.
    const std::size_t n = X.n_rows;
    std::size_t n_val = n / 5;
    if (n_val == 0) n_val = 1;
    if (n_val >= n) throw Error(Errc::EmptyMatrix, "not enough rows for an RFE holdout");
    const std::size_t n_fit = n - n_val;

    Standardized s = standardize(X, 0, n_fit);
    const double y_mean =
        std::accumulate(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_fit), 0.0) /
        static_cast<double>(n_fit);
    Eigen::VectorXd yc(static_cast<Eigen::Index>(n_fit));
    for (std::size_t r = 0; r < n_fit; ++r) yc[static_cast<Eigen::Index>(r)] = y[r] - y_mean;

    // One Gram matrix serves every step; elimination just masks coordinates.
    const Eigen::MatrixXd G = s.Z.transpose() * s.Z;
    const Eigen::VectorXd c = s.Z.transpose() * yc;

    // Standardized validation rows, using fit-set statistics.
    Eigen::MatrixXd Zval(static_cast<Eigen::Index>(n_val), static_cast<Eigen::Index>(X.n_cols));
    for (std::size_t r = 0; r < n_val; ++r)
        for (std::size_t j = 0; j < X.n_cols; ++j) {
            const auto je = static_cast<Eigen::Index>(j);
            Zval(static_cast<Eigen::Index>(r), je) =
                s.active[j] ? (X.at(n_fit + r, j) - s.mean[je]) / s.stddev[je] : 0.0;
        }

    std::vector<bool> alive(X.n_cols, true);
    std::size_t remaining = X.n_cols;
    while (remaining > k) {
        std::vector<bool> active = alive;
        for (std::size_t j = 0; j < X.n_cols; ++j)
            if (!s.active[j]) active[j] = false;
        const Eigen::VectorXd a = solve_gram(G, c, lambda, active);

        double val_sse = 0.0;
        for (std::size_t r = 0; r < n_val; ++r) {
            double pred = y_mean;
            for (std::size_t j = 0; j < X.n_cols; ++j)
                if (alive[j])
                    pred += Zval(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) *
                            a[static_cast<Eigen::Index>(j)];
            const double e = pred - y[n_fit + r];
            val_sse += e * e;
        }
        const double val_mse = val_sse / static_cast<double>(n_val);

        // Drop the weakest |standardized weight| columns (ties: lowest index).
        const std::size_t to_drop = std::min(step, remaining - k);
        std::vector<std::size_t> order;
        for (std::size_t j = 0; j < X.n_cols; ++j)
            if (alive[j]) order.push_back(j);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            return std::abs(a[static_cast<Eigen::Index>(i)]) <
                   std::abs(a[static_cast<Eigen::Index>(j)]);
        });

        RfeStep record;
        record.val_mse = val_mse;
        for (std::size_t d = 0; d < to_drop; ++d) {
            alive[order[d]] = false;
            record.dropped.push_back(X.col_names[order[d]]);
        }
        remaining -= to_drop;
        result.trace.push_back(std::move(record));
    }

    for (std::size_t j = 0; j < X.n_cols; ++j)
        if (alive[j]) result.kept_columns.push_back(X.col_names[j]);
    return result;
}

std::string selection_to_json(const SelectionResult& s) {
    nlohmann::json j;
    j["kept"] = s.kept_columns;
    auto& trace = j["trace"] = nlohmann::json::array();
    for (const auto& st : s.trace)
        trace.push_back({{"dropped", st.dropped}, {"val_mse", st.val_mse}});
    return j.dump(2);
}

SelectionResult selection_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    SelectionResult s;
    s.kept_columns = j.at("kept").get<std::vector<std::string>>();
    for (const auto& st : j.at("trace"))
        s.trace.push_back(
            {st.at("dropped").get<std::vector<std::string>>(), st.at("val_mse").get<double>()});
    return s;
}

}  // namespace rescast

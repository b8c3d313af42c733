#pragma once

#include <span>
#include <string>
#include <vector>

#include "rescast/features.hpp"

namespace rescast {

/// Linear model on original-scale columns. Fitting standardizes columns
/// internally (zero mean, unit variance over the fit rows, population form)
/// and leaves the intercept unpenalized; the stored weights are mapped back.
struct RidgeModel {
    std::vector<double> weights;
    double intercept = 0.0;
    double lambda = 0.0;

    double predict(std::span<const double> row) const;
};

RidgeModel ridge_fit(const FeatureMatrix& X, std::span<const double> y, double lambda);

/// One elimination step: the columns dropped together and the validation
/// MSE of the fit they were dropped from.
struct RfeStep {
    std::vector<std::string> dropped;
    double val_mse = 0.0;
};

struct SelectionResult {
    std::vector<std::string> kept_columns;
    std::vector<RfeStep> trace;
};

/// Ridge-driven recursive feature elimination. Fits on the chronological
/// first 80% of rows, scores MSE on the last 20%, and repeatedly drops the
/// `step` columns with the smallest |standardized weight| until k remain.
SelectionResult rfe(const FeatureMatrix& X, std::span<const double> y, std::size_t k,
                    std::size_t step, double lambda);

std::string selection_to_json(const SelectionResult& s);
SelectionResult selection_from_json(const std::string& text);

}  // namespace rescast

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rescast/features.hpp"

namespace rescast {

enum class SplitMode : std::uint8_t {
    /// Classical extremely randomized splits: one uniform threshold per
    /// candidate feature, best variance reduction wins.
    random_threshold,
    /// Exhaustive midpoint search over every feature, for validation against
    /// reference greedy trees. Not intended for production fitting.
    exhaustive_midpoint,
};

struct ExtParams {
    int n_estimators = 300;
    int k_features = 0;  // candidates per split; 0 = the whole feature space
    int min_samples_split = 2;
    int max_depth = -1;  // -1 = unlimited; 0 makes every tree a single leaf
    std::uint64_t seed = 0;
    SplitMode split_mode = SplitMode::random_threshold;
};

/// Flat binary tree; node 0 is the root. Internal nodes route x[feature] <
/// threshold to `left`; leaves have feature == -1 and predict `value`.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
    std::uint32_t count = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> row) const;
};

struct Forest {
    std::vector<Tree> trees;
    ExtParams params;
    std::uint32_t width = 0;
    double y_min = 0.0;
    double y_max = 0.0;

    double predict_row(std::span<const double> row) const;
};

/// Grows the ensemble: every tree sees the full sample (no bootstrap), each
/// split draws k candidate features and one uniform threshold per candidate,
/// and the split with the greatest variance reduction wins. Tree j consumes
/// a deterministic stream seeded from (params.seed, j), so fits are
/// reproducible and may run across threads.
Forest ext_fit(const FeatureMatrix& X, std::span<const double> y, const ExtParams& params);

std::vector<double> ext_predict(const Forest& forest, const FeatureMatrix& X);

struct ExtGrid {
    std::vector<int> n_estimators = {100, 300, 500};
    std::vector<int> max_depth = {-1, 10, 20};
    std::vector<int> min_samples_split = {2, 5};
};

struct GridEntry {
    ExtParams params;
    double val_mse = 0.0;
};

struct GridResult {
    ExtParams best;
    std::vector<GridEntry> table;
};

/// Exhaustive search over the parameter grid with a chronological holdout
/// (the last val_fraction of rows). Ties break toward the earliest grid
/// combination; iteration order is n_estimators, then max_depth, then
/// min_samples_split.
GridResult grid_search(const ExtGrid& grid, const FeatureMatrix& X, std::span<const double> y,
                       double val_fraction, std::uint64_t seed);

/// Versioned little-endian binary dump; byte-identical for identical fits.
void save_forest(std::ostream& out, const Forest& forest);
Forest load_forest(std::istream& in);

std::string grid_result_to_json(const GridResult& g);

}  // namespace rescast

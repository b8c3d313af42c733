#include "rescast/extra_trees.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "rescast/errors.hpp"

namespace rescast {

double Tree::predict(std::span<const double> row) const {
    std::int32_t at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
        const TreeNode& n = nodes[static_cast<std::size_t>(at)];
        at = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(at)].value;
}

double Forest::predict_row(std::span<const double> row) const {
    if (row.size() != width)
        throw Error(Errc::WidthMismatch, "row width " + std::to_string(row.size()) +
                                             " vs training width " + std::to_string(width));
    double sum = 0.0;
    for (const Tree& t : trees) sum += t.predict(row);
    return sum / static_cast<double>(trees.size());
}

namespace {

/// Column-major snapshot of the training matrix shared by all trees.
struct ColumnData {
    std::size_t n = 0, p = 0;
    std::vector<double> cols;  // p blocks of n values

    const double* col(std::size_t f) const { return cols.data() + f * n; }
};

ColumnData to_columns(const FeatureMatrix& X) {
    ColumnData cd;
    cd.n = X.n_rows;
    cd.p = X.n_cols;
    cd.cols.resize(cd.n * cd.p);
    for (std::size_t r = 0; r < cd.n; ++r)
        for (std::size_t c = 0; c < cd.p; ++c) cd.cols[c * cd.n + r] = X.at(r, c);
    return cd;
}

double uniform_unit(std::mt19937_64& rng) {
    // 53-bit mantissa draw in [0, 1); bumped off zero so thresholds stay
    // inside the open interval.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
}

struct WorkItem {
    std::int32_t node;
    std::size_t begin, end;
    int depth;
    double sum;
    double ymin, ymax;
};

struct BestSplit {
    double score = -std::numeric_limits<double>::infinity();
    std::size_t feature = 0;
    double threshold = 0.0;
    bool found = false;
};

class TreeBuilder {
public:
    TreeBuilder(const ColumnData& cd, std::span<const double> y, const ExtParams& params)
        : cd_(cd), y_(y), params_(params) {}

    Tree build(std::uint64_t tree_index) {
        std::seed_seq seq{static_cast<std::uint32_t>(params_.seed),
                          static_cast<std::uint32_t>(params_.seed >> 32),
                          static_cast<std::uint32_t>(tree_index),
                          static_cast<std::uint32_t>(tree_index >> 32)};
        std::mt19937_64 rng(seq);

        idx_.resize(cd_.n);
        for (std::size_t i = 0; i < cd_.n; ++i) idx_[i] = i;

        Tree tree;
        double sum = 0.0, ymin = y_[0], ymax = y_[0];
        for (double v : y_) {
            sum += v;
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }

        tree.nodes.emplace_back();
        std::vector<WorkItem> stack;
        stack.push_back({0, 0, cd_.n, 0, sum, ymin, ymax});

        while (!stack.empty()) {
            const WorkItem item = stack.back();
            stack.pop_back();
            grow(tree, item, stack, rng);
        }
        return tree;
    }

private:
    void make_leaf(Tree& tree, const WorkItem& item) {
        TreeNode& node = tree.nodes[static_cast<std::size_t>(item.node)];
        const std::size_t n = item.end - item.begin;
        node.feature = -1;
        node.count = static_cast<std::uint32_t>(n);
        if (params_.split_mode == SplitMode::exhaustive_midpoint) {
            // Ascending row order keeps leaf means bit-comparable with
            // reference greedy trees.
            std::sort(idx_.begin() + static_cast<std::ptrdiff_t>(item.begin),
                      idx_.begin() + static_cast<std::ptrdiff_t>(item.end));
            double sum = 0.0;
            for (std::size_t i = item.begin; i < item.end; ++i) sum += y_[idx_[i]];
            node.value = sum / static_cast<double>(n);
        } else {
            node.value = item.sum / static_cast<double>(n);
        }
    }

    BestSplit random_split(const WorkItem& item, std::mt19937_64& rng) {
        const std::size_t n = item.end - item.begin;
        const std::size_t width = cd_.p;
        std::size_t k = params_.k_features <= 0 ? width
                                                : std::min<std::size_t>(
                                                      static_cast<std::size_t>(params_.k_features),
                                                      width);
        // k == width uses every feature in index order with no draw, so the
        // stream only advances for genuine subsampling.
        candidates_.resize(width);
        for (std::size_t f = 0; f < width; ++f) candidates_[f] = f;
        if (k < width) {
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t pick = j + static_cast<std::size_t>(rng() % (width - j));
                std::swap(candidates_[j], candidates_[pick]);
            }
        }

        BestSplit best;
        for (std::size_t cj = 0; cj < k; ++cj) {
            const std::size_t f = candidates_[cj];
            const double* col = cd_.col(f);

            double lo = col[idx_[item.begin]], hi = lo;
            for (std::size_t i = item.begin + 1; i < item.end; ++i) {
                const double v = col[idx_[i]];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (!(lo < hi)) continue;  // constant candidate, nothing to split

            const double thr = lo + uniform_unit(rng) * (hi - lo);
            if (!(thr > lo) || !(thr < hi)) continue;

            double left_sum = 0.0;
            std::size_t left_n = 0;
            for (std::size_t i = item.begin; i < item.end; ++i) {
                if (col[idx_[i]] < thr) {
                    left_sum += y_[idx_[i]];
                    ++left_n;
                }
            }
            if (left_n == 0 || left_n == n) continue;

            const double right_sum = item.sum - left_sum;
            const double score = left_sum * left_sum / static_cast<double>(left_n) +
                                 right_sum * right_sum / static_cast<double>(n - left_n);
            if (score > best.score) {
                best = {score, f, thr, true};
            }
        }
        return best;
    }

    BestSplit exhaustive_split(const WorkItem& item) {
        const std::size_t n = item.end - item.begin;
        std::sort(idx_.begin() + static_cast<std::ptrdiff_t>(item.begin),
                  idx_.begin() + static_cast<std::ptrdiff_t>(item.end));

        BestSplit best;
        std::vector<std::pair<double, double>> xy(n);
        for (std::size_t f = 0; f < cd_.p; ++f) {
            const double* col = cd_.col(f);
            for (std::size_t i = 0; i < n; ++i) {
                xy[i] = {col[idx_[item.begin + i]], y_[idx_[item.begin + i]]};
            }
            std::stable_sort(xy.begin(), xy.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });

            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += xy[i].second;
                if (xy[i].first == xy[i + 1].first) continue;
                const double thr = (xy[i].first + xy[i + 1].first) / 2.0;
                if (!(thr > xy[i].first)) continue;  // midpoint collapsed
                const double right_sum = item.sum - left_sum;
                const double score = left_sum * left_sum / static_cast<double>(i + 1) +
                                     right_sum * right_sum / static_cast<double>(n - i - 1);
                if (score > best.score) {
                    best = {score, f, thr, true};
                }
            }
        }
        return best;
    }

    void grow(Tree& tree, const WorkItem& item, std::vector<WorkItem>& stack,
              std::mt19937_64& rng) {
        const std::size_t n = item.end - item.begin;
        const bool depth_capped = params_.max_depth >= 0 && item.depth >= params_.max_depth;
        if (n < static_cast<std::size_t>(std::max(2, params_.min_samples_split)) || depth_capped ||
            item.ymin == item.ymax) {
            make_leaf(tree, item);
            return;
        }

        const BestSplit best = params_.split_mode == SplitMode::exhaustive_midpoint
                                   ? exhaustive_split(item)
                                   : random_split(item, rng);
        if (!best.found) {
            make_leaf(tree, item);  // every candidate was constant
            return;
        }

        const double* col = cd_.col(best.feature);
        auto first = idx_.begin() + static_cast<std::ptrdiff_t>(item.begin);
        auto last = idx_.begin() + static_cast<std::ptrdiff_t>(item.end);
        auto mid = params_.split_mode == SplitMode::exhaustive_midpoint
                       ? std::stable_partition(first, last,
                                               [&](std::size_t i) { return col[i] < best.threshold; })
                       : std::partition(first, last,
                                        [&](std::size_t i) { return col[i] < best.threshold; });
        const std::size_t split_at = item.begin + static_cast<std::size_t>(mid - first);

        WorkItem left{0, item.begin, split_at, item.depth + 1, 0.0, 0.0, 0.0};
        WorkItem right{0, split_at, item.end, item.depth + 1, 0.0, 0.0, 0.0};
        node_stats(left);
        node_stats(right);

        const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        const auto right_id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();

        TreeNode& node = tree.nodes[static_cast<std::size_t>(item.node)];
        node.feature = static_cast<std::int32_t>(best.feature);
        node.threshold = best.threshold;
        node.left = left_id;
        node.right = right_id;
        node.count = static_cast<std::uint32_t>(n);

        left.node = left_id;
        right.node = right_id;
        // Right child grows first so the left subtree lays out contiguously.
        stack.push_back(right);
        stack.push_back(left);
    }

    void node_stats(WorkItem& item) {
        double sum = 0.0, lo = y_[idx_[item.begin]], hi = lo;
        for (std::size_t i = item.begin; i < item.end; ++i) {
            const double v = y_[idx_[i]];
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        item.sum = sum;
        item.ymin = lo;
        item.ymax = hi;
    }

    const ColumnData& cd_;
    std::span<const double> y_;
    const ExtParams& params_;
    std::vector<std::size_t> idx_;
    std::vector<std::size_t> candidates_;
};

}  // namespace

Forest ext_fit(const FeatureMatrix& X, std::span<const double> y, const ExtParams& params) {
    if (X.n_rows == 0) throw Error(Errc::EmptyTraining, "ext_fit on empty matrix");
    if (y.size() != X.n_rows)
        throw Error(Errc::WidthMismatch, "target length does not match row count");
    if (params.n_estimators < 1) throw Error(Errc::Config, "n_estimators must be >= 1");
    if (X.n_cols == 0) throw Error(Errc::EmptyTraining, "ext_fit needs at least one feature");

    const ColumnData cd = to_columns(X);

    Forest forest;
    forest.params = params;
    forest.width = static_cast<std::uint32_t>(X.n_cols);
    forest.y_min = *std::min_element(y.begin(), y.end());
    forest.y_max = *std::max_element(y.begin(), y.end());
    forest.trees.resize(static_cast<std::size_t>(params.n_estimators));

    const std::size_t n_trees = forest.trees.size();
    std::size_t n_workers = std::min<std::size_t>(std::thread::hardware_concurrency(), n_trees);
    if (n_workers <= 1) {
        TreeBuilder builder(cd, y, params);
        for (std::size_t j = 0; j < n_trees; ++j) forest.trees[j] = builder.build(j);
    } else {
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        for (std::size_t w = 0; w < n_workers; ++w) {
            workers.emplace_back([&] {
                TreeBuilder builder(cd, y, params);
                while (true) {
                    const std::size_t j = next.fetch_add(1);
                    if (j >= n_trees) break;
                    forest.trees[j] = builder.build(j);
                }
            });
        }
        for (auto& t : workers) t.join();
    }
    return forest;
}

std::vector<double> ext_predict(const Forest& forest, const FeatureMatrix& X) {
    if (X.n_cols != forest.width)
        throw Error(Errc::WidthMismatch, "matrix width " + std::to_string(X.n_cols) +
                                             " vs training width " + std::to_string(forest.width));
    std::vector<double> out(X.n_rows);
    for (std::size_t r = 0; r < X.n_rows; ++r) out[r] = forest.predict_row(X.row(r));
    return out;
}

GridResult grid_search(const ExtGrid& grid, const FeatureMatrix& X, std::span<const double> y,
                       double val_fraction, std::uint64_t seed) {
    if (grid.n_estimators.empty() || grid.max_depth.empty() || grid.min_samples_split.empty())
        throw Error(Errc::EmptyGrid, "every grid axis needs at least one value");
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw Error(Errc::Config, "val_fraction must lie in (0, 1)");
    if (X.n_rows < 2) throw Error(Errc::EmptyTraining, "grid_search needs at least two rows");
    if (y.size() != X.n_rows)
        throw Error(Errc::WidthMismatch, "target length does not match row count");

    std::size_t n_val = static_cast<std::size_t>(static_cast<double>(X.n_rows) * val_fraction);
    n_val = std::clamp<std::size_t>(n_val, 1, X.n_rows - 1);
    const std::size_t n_fit = X.n_rows - n_val;

    FeatureMatrix fit = X;
    fit.n_rows = n_fit;
    fit.data.resize(n_fit * X.n_cols);
    fit.target.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_fit));
    fit.row_times.assign(X.row_times.begin(),
                         X.row_times.begin() + static_cast<std::ptrdiff_t>(n_fit));

    GridResult result;
    double best_mse = std::numeric_limits<double>::infinity();
    for (int ne : grid.n_estimators) {
        for (int md : grid.max_depth) {
            for (int mss : grid.min_samples_split) {
                ExtParams p;
                p.n_estimators = ne;
                p.max_depth = md;
                p.min_samples_split = mss;
                p.seed = seed;
                const Forest f = ext_fit(fit, {fit.target.data(), n_fit}, p);

                double sse = 0.0;
                for (std::size_t r = n_fit; r < X.n_rows; ++r) {
                    const double e = f.predict_row(X.row(r)) - y[r];
                    sse += e * e;
                }
                const double mse = sse / static_cast<double>(n_val);
                result.table.push_back({p, mse});
                if (mse < best_mse) {
                    best_mse = mse;
                    result.best = p;
                }
            }
        }
    }
    return result;
}

namespace {

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw Error(Errc::Parse, "truncated forest artifact");
    return v;
}

constexpr std::uint32_t kForestMagic = 0x52455346;  // "RESF"
constexpr std::uint32_t kForestVersion = 1;

}  // namespace

void save_forest(std::ostream& out, const Forest& forest) {
    put(out, kForestMagic);
    put(out, kForestVersion);
    put(out, static_cast<std::int32_t>(forest.params.n_estimators));
    put(out, static_cast<std::int32_t>(forest.params.k_features));
    put(out, static_cast<std::int32_t>(forest.params.min_samples_split));
    put(out, static_cast<std::int32_t>(forest.params.max_depth));
    put(out, static_cast<std::uint64_t>(forest.params.seed));
    put(out, static_cast<std::uint8_t>(forest.params.split_mode));
    put(out, forest.width);
    put(out, forest.y_min);
    put(out, forest.y_max);
    put(out, static_cast<std::uint32_t>(forest.trees.size()));
    for (const Tree& t : forest.trees) {
        put(out, static_cast<std::uint32_t>(t.nodes.size()));
        for (const TreeNode& n : t.nodes) {
            put(out, n.feature);
            put(out, n.threshold);
            put(out, n.left);
            put(out, n.right);
            put(out, n.value);
            put(out, n.count);
        }
    }
}

Forest load_forest(std::istream& in) {
    if (get<std::uint32_t>(in) != kForestMagic)
        throw Error(Errc::Parse, "not a forest artifact");
    if (get<std::uint32_t>(in) != kForestVersion)
        throw Error(Errc::Parse, "unsupported forest artifact version");
    Forest f;
    f.params.n_estimators = get<std::int32_t>(in);
    f.params.k_features = get<std::int32_t>(in);
    f.params.min_samples_split = get<std::int32_t>(in);
    f.params.max_depth = get<std::int32_t>(in);
    f.params.seed = get<std::uint64_t>(in);
    f.params.split_mode = static_cast<SplitMode>(get<std::uint8_t>(in));
    f.width = get<std::uint32_t>(in);
    f.y_min = get<double>(in);
    f.y_max = get<double>(in);
    const auto n_trees = get<std::uint32_t>(in);
    f.trees.resize(n_trees);
    for (Tree& t : f.trees) {
        const auto n_nodes = get<std::uint32_t>(in);
        t.nodes.resize(n_nodes);
        for (TreeNode& n : t.nodes) {
            n.feature = get<std::int32_t>(in);
            n.threshold = get<double>(in);
            n.left = get<std::int32_t>(in);
            n.right = get<std::int32_t>(in);
            n.value = get<double>(in);
            n.count = get<std::uint32_t>(in);
        }
    }
    return f;
}

namespace {
nlohmann::json params_to_json(const ExtParams& p) {
    return {{"n_estimators", p.n_estimators},
            {"k_features", p.k_features},
            {"min_samples_split", p.min_samples_split},
            {"max_depth", p.max_depth},
            {"seed", p.seed}};
}
}  // namespace

std::string grid_result_to_json(const GridResult& g) {
    nlohmann::json j;
    j["best"] = params_to_json(g.best);
    auto& table = j["table"] = nlohmann::json::array();
    for (const auto& e : g.table)
        table.push_back({{"params", params_to_json(e.params)}, {"val_mse", e.val_mse}});
    return j.dump(2);
}

}  // namespace rescast

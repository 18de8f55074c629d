#include "ctgml/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctgml/errors.hpp"
#include "ctgml/rng.hpp"

namespace ctgml {

double gini_impurity(const std::array<std::int64_t, 3>& counts) {
    std::int64_t total = 0;
    for (std::int64_t c : counts) total += c;
    if (total < 1) throw ArgumentError("gini_impurity: empty counts");
    double sum_sq = 0.0;
    for (std::int64_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

namespace {

struct NodeView {
    const Matrix& x;
    const std::vector<ClassLabel>& y;
    std::span<const std::size_t> rows;
};

std::array<std::int64_t, 3> count_classes(const NodeView& node) {
    std::array<std::int64_t, 3> counts{};
    for (std::size_t r : node.rows) ++counts[class_index(node.y[r])];
    return counts;
}

// Scans one feature in sorted order, tracking the best midpoint threshold.
// Gini gain computed incrementally from left/right class counts.
void scan_feature(const NodeView& node, std::size_t feature, double parent_gini,
                  std::vector<std::size_t>& order, std::optional<SplitChoice>& best) {
    order.assign(node.rows.begin(), node.rows.end());
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return node.x(a, feature) < node.x(b, feature);
    });

    const auto n = static_cast<double>(order.size());
    std::array<std::int64_t, 3> left{};
    auto right = count_classes(node);

    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const int cls = class_index(node.y[order[i]]);
        ++left[cls];
        --right[cls];
        const double v = node.x(order[i], feature);
        const double next = node.x(order[i + 1], feature);
        if (v == next) continue;

        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double gain = parent_gini - (nl * gini_impurity(left) + nr * gini_impurity(right)) / n;
        if (!(gain > 0.0)) continue;
        const double threshold = v + 0.5 * (next - v);
        if (!best || gain > best->gain) best = SplitChoice{feature, threshold, gain};
    }
}

std::optional<SplitChoice> best_split_rows(const NodeView& node, std::span<const std::size_t> subset) {
    if (node.rows.size() < 2) return std::nullopt;
    const double parent_gini = gini_impurity(count_classes(node));
    if (parent_gini == 0.0) return std::nullopt;

    std::vector<std::size_t> features(subset.begin(), subset.end());
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()), features.end());

    std::optional<SplitChoice> best;
    std::vector<std::size_t> order;
    for (std::size_t f : features) scan_feature(node, f, parent_gini, order, best);
    return best;
}

struct TreeGrower {
    const Matrix& x;
    const std::vector<ClassLabel>& y;
    std::size_t max_features;
    std::size_t min_samples_split;
    Rng& rng;
    std::vector<std::size_t> all_features;

    std::vector<std::size_t> draw_subset() {
        if (max_features >= all_features.size()) return all_features;
        // partial Fisher-Yates over a scratch copy
        std::vector<std::size_t> pool = all_features;
        std::vector<std::size_t> picked;
        picked.reserve(max_features);
        for (std::size_t i = 0; i < max_features; ++i) {
            const std::size_t j = i + rng.below(pool.size() - i);
            std::swap(pool[i], pool[j]);
            picked.push_back(pool[i]);
        }
        return picked;
    }

    std::unique_ptr<TreeNode> grow(std::vector<std::size_t>& rows) {
        auto node = std::make_unique<TreeNode>();
        node->counts = count_classes({x, y, rows});

        const bool pure = std::count(node->counts.begin(), node->counts.end(), 0) == 2;
        if (pure || rows.size() < min_samples_split) return node;

        const auto subset = draw_subset();
        const auto split = best_split_rows({x, y, rows}, subset);
        if (!split) return node;

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows) {
            if (x(r, split->feature) <= split->threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        node->feature = static_cast<int>(split->feature);
        node->threshold = split->threshold;
        node->left = grow(left_rows);
        node->right = grow(right_rows);
        return node;
    }
};

}  // namespace

std::optional<SplitChoice> best_split(const Matrix& x, const std::vector<ClassLabel>& y,
                                      std::span<const std::size_t> subset) {
    if (x.rows() != y.size()) throw ArgumentError("best_split: row/label mismatch");
    if (x.rows() < 2) return std::nullopt;
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return best_split_rows({x, y, rows}, subset);
}

ForestModel forest_fit(const Matrix& x, const std::vector<ClassLabel>& y, const ForestOptions& opt) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n == 0 || y.size() != n) throw ArgumentError("forest_fit: row/label mismatch");
    if (opt.trees < 1) throw ArgumentError("forest_fit: need at least one tree");
    std::size_t max_features = opt.max_features;
    if (max_features == 0) max_features = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    if (max_features > d) throw ArgumentError("forest_fit: max_features exceeds feature count");
    if (opt.min_samples_split < 2) throw ArgumentError("forest_fit: min_samples_split must be >= 2");

    ForestModel model;
    model.max_features = max_features;
    model.seed = opt.seed;
    model.trees.reserve(opt.trees);

    std::vector<std::size_t> all_features(d);
    std::iota(all_features.begin(), all_features.end(), std::size_t{0});

    for (std::size_t t = 0; t < opt.trees; ++t) {
        Rng rng(opt.seed + t);
        std::vector<std::size_t> rows(n);
        if (opt.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) rows[i] = rng.below(n);
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        TreeGrower grower{x, y, max_features, opt.min_samples_split, rng, all_features};
        model.trees.push_back(grower.grow(rows));
    }
    return model;
}

ForestModel forest_fit(const Matrix& x, const std::vector<ClassLabel>& y, std::size_t trees,
                       std::size_t max_features, std::uint64_t seed) {
    ForestOptions opt;
    opt.trees = trees;
    opt.max_features = max_features;
    opt.seed = seed;
    return forest_fit(x, y, opt);
}

ClassLabel tree_predict(const TreeNode& root, std::span<const double> row) {
    const TreeNode* node = &root;
    while (!node->is_leaf())
        node = row[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left.get()
                                                                               : node->right.get();
    int best = 0;
    for (int c = 1; c < kClassCount; ++c)
        if (node->counts[c] > node->counts[best]) best = c;
    return class_from_index(best);
}

std::vector<ClassLabel> forest_predict(const ForestModel& m, const Matrix& x) {
    std::vector<ClassLabel> out;
    out.reserve(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::array<int, 3> votes{};
        for (const auto& tree : m.trees) ++votes[class_index(tree_predict(*tree, x.row(r)))];
        int best = 0;
        for (int c = 1; c < kClassCount; ++c)
            if (votes[c] > votes[best]) best = c;
        out.push_back(class_from_index(best));
    }
    return out;
}

}  // namespace ctgml

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ctgml/dataset.hpp"
#include "ctgml/matrix.hpp"

namespace ctgml {

// 1 - sum((n_c / n)^2). Throws ArgumentError when all counts are zero.
double gini_impurity(const std::array<std::int64_t, 3>& counts);

struct SplitChoice {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

// Best Gini-gain split over midpoint thresholds of the features in `subset`.
// Ties break toward the lower feature index, then the lower threshold.
// Empty result when no split has positive gain.
std::optional<SplitChoice> best_split(const Matrix& x, const std::vector<ClassLabel>& y,
                                      std::span<const std::size_t> subset);

struct TreeNode {
    int feature = -1;  // negative marks a leaf
    double threshold = 0.0;
    std::array<std::int64_t, 3> counts{};  // leaf class counts
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;

    bool is_leaf() const { return feature < 0; }
};

struct ForestOptions {
    std::size_t trees = 200;
    std::size_t max_features = 0;  // 0 means ceil(sqrt(feature count))
    std::size_t min_samples_split = 2;
    std::uint64_t seed = 1;
    bool bootstrap = true;  // test hook; disabling gives plain CART on the data
};

struct ForestModel {
    std::vector<std::unique_ptr<TreeNode>> trees;
    std::size_t max_features = 0;
    std::uint64_t seed = 0;
};

// Each tree grows on an n-sample bootstrap from Rng(seed + tree_index) to
// purity or min_samples_split, choosing splits over a fresh random feature
// subset per node.
ForestModel forest_fit(const Matrix& x, const std::vector<ClassLabel>& y, const ForestOptions& opt);
ForestModel forest_fit(const Matrix& x, const std::vector<ClassLabel>& y, std::size_t trees,
                       std::size_t max_features, std::uint64_t seed);

ClassLabel tree_predict(const TreeNode& root, std::span<const double> row);
std::vector<ClassLabel> forest_predict(const ForestModel& m, const Matrix& x);

}  // namespace ctgml

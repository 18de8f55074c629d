#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "ctgml/dataset.hpp"
#include "ctgml/errors.hpp"
#include "ctgml/forest.hpp"
#include "ctgml/matrix.hpp"
#include "ctgml/rng.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace ctgml;

TEST_CASE("gini impurity closed forms") {
    CHECK(gini_impurity({10, 0, 0}) == 0.0);
    CHECK(gini_impurity({5, 5, 0}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(gini_impurity({1, 1, 1}) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(gini_impurity({0, 0, 0}), ArgumentError);
}

TEST_CASE("one-dimensional split lands between the clusters") {
    const Matrix x = Matrix::from_rows({{0.0}, {1.0}, {10.0}, {11.0}});
    const std::vector<ClassLabel> y{ClassLabel::Normal, ClassLabel::Normal, ClassLabel::Suspect,
                                    ClassLabel::Suspect};
    const std::vector<std::size_t> subset{0};
    const auto s = best_split(x, y, subset);
    REQUIRE(s.has_value());
    CHECK(s->feature == 0);
    CHECK(s->threshold == doctest::Approx(5.5).epsilon(1e-15));
    CHECK(s->gain == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("pure nodes admit no split") {
    const Matrix x = Matrix::from_rows({{0.0}, {1.0}, {2.0}});
    const std::vector<ClassLabel> y(3, ClassLabel::Pathological);
    const std::vector<std::size_t> subset{0};
    CHECK_FALSE(best_split(x, y, subset).has_value());

    // constant feature: no candidate thresholds either
    const Matrix c = Matrix::from_rows({{5.0}, {5.0}, {5.0}});
    const std::vector<ClassLabel> mixed{ClassLabel::Normal, ClassLabel::Suspect,
                                        ClassLabel::Normal};
    CHECK_FALSE(best_split(c, mixed, subset).has_value());
}

TEST_CASE("best split matches the exhaustive oracle on random fixtures") {
    Rng rng(101);
    for (int fixture = 0; fixture < 40; ++fixture) {
        const std::size_t n = 2 + rng.below(49);
        const std::size_t d = 1 + rng.below(5);
        Matrix x(n, d);
        std::vector<ClassLabel> y;
        for (std::size_t i = 0; i < n; ++i) {
            // coarse grid values force plenty of exact ties
            for (std::size_t j = 0; j < d; ++j) x(i, j) = static_cast<double>(rng.below(8));
            y.push_back(class_from_index(static_cast<int>(rng.below(3))));
        }
        std::vector<std::size_t> subset(d);
        std::iota(subset.begin(), subset.end(), std::size_t{0});

        const auto got = best_split(x, y, subset);
        const auto want = testing::brute_force_best_split(x, y, subset);
        REQUIRE(got.has_value() == want.has_value());
        if (got) {
            CHECK(got->feature == want->feature);
            CHECK(got->threshold == doctest::Approx(want->threshold).epsilon(1e-12));
            CHECK(got->gain == doctest::Approx(want->gain).epsilon(1e-9));
        }
    }
}

TEST_CASE("tree prediction routes values through thresholds") {
    // manual stump: feature 0 <= 1.5 goes left
    TreeNode root;
    root.feature = 0;
    root.threshold = 1.5;
    root.left = std::make_unique<TreeNode>();
    root.left->counts = {5, 0, 0};
    root.right = std::make_unique<TreeNode>();
    root.right->counts = {0, 0, 7};

    const std::vector<double> lo{1.5};  // boundary value goes left
    const std::vector<double> hi{1.6};
    CHECK(tree_predict(root, lo) == ClassLabel::Normal);
    CHECK(tree_predict(root, hi) == ClassLabel::Pathological);
}

TEST_CASE("leaf ties resolve to the lowest class") {
    TreeNode leaf;
    leaf.counts = {3, 3, 1};
    const std::vector<double> any{0.0};
    CHECK(tree_predict(leaf, any) == ClassLabel::Normal);
    leaf.counts = {1, 4, 4};
    CHECK(tree_predict(leaf, any) == ClassLabel::Suspect);
}

TEST_CASE("a forest memorizes separable training data") {
    Rng rng(17);
    Matrix x(90, 3);
    std::vector<ClassLabel> y;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const int c = static_cast<int>(i % 3);
        for (std::size_t j = 0; j < 3; ++j) x(i, j) = 4.0 * c + rng.normal();
        y.push_back(class_from_index(c));
    }
    const ForestModel m = forest_fit(x, y, 25, 0, 5);
    REQUIRE(m.trees.size() == 25);
    const auto pred = forest_predict(m, x);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i) hits += pred[i] == y[i];
    CHECK(static_cast<double>(hits) / static_cast<double>(y.size()) > 0.95);
}

TEST_CASE("forest training is seed deterministic") {
    Rng rng(19);
    Matrix x(60, 4);
    std::vector<ClassLabel> y;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < 4; ++j) x(i, j) = rng.normal();
        y.push_back(class_from_index(static_cast<int>(rng.below(3))));
    }
    const auto a = forest_predict(forest_fit(x, y, 10, 2, 42), x);
    const auto b = forest_predict(forest_fit(x, y, 10, 2, 42), x);
    CHECK(a == b);
    const auto c = forest_predict(forest_fit(x, y, 10, 2, 43), x);
    CHECK(a != c);  // different bootstrap draws should disagree somewhere
}

TEST_CASE("forest option validation") {
    const Matrix x = Matrix::from_rows({{0.0}, {1.0}});
    const std::vector<ClassLabel> y{ClassLabel::Normal, ClassLabel::Suspect};
    ForestOptions opt;
    opt.trees = 0;
    CHECK_THROWS_AS(forest_fit(x, y, opt), ArgumentError);
    opt.trees = 1;
    opt.max_features = 2;
    CHECK_THROWS_AS(forest_fit(x, y, opt), ArgumentError);
    opt.max_features = 0;
    opt.min_samples_split = 1;
    CHECK_THROWS_AS(forest_fit(x, y, opt), ArgumentError);
}

TEST_CASE("without bootstrap a deep tree reproduces its training labels") {
    Rng rng(23);
    Matrix x(40, 2);
    std::vector<ClassLabel> y;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        y.push_back(class_from_index(static_cast<int>(rng.below(3))));
    }
    ForestOptions opt;
    opt.trees = 1;
    opt.max_features = 2;
    opt.bootstrap = false;
    const ForestModel m = forest_fit(x, y, opt);
    CHECK(forest_predict(m, x) == y);  // random labels, but pure leaves memorize them
}

#pragma once

// Independent reference implementations used to cross-check the library.
// They deliberately use brute force instead of the library's algorithms so
// a shared bug cannot hide.

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ctgml/dataset.hpp"
#include "ctgml/forest.hpp"
#include "ctgml/matrix.hpp"

namespace ctgml::testing {

inline double oracle_gini(const std::array<std::int64_t, 3>& counts) {
    const double n = static_cast<double>(counts[0] + counts[1] + counts[2]);
    double s = 0.0;
    for (const auto c : counts) {
        const double p = static_cast<double>(c) / n;
        s += p * p;
    }
    return 1.0 - s;
}

// Exhaustive best split: every feature in `subset`, every midpoint between
// consecutive distinct sorted values, gain computed by explicit partition.
inline std::optional<SplitChoice> brute_force_best_split(const Matrix& x,
                                                         const std::vector<ClassLabel>& y,
                                                         std::span<const std::size_t> subset) {
    const std::size_t n = x.rows();
    std::array<std::int64_t, 3> total{};
    for (const auto label : y) total[static_cast<std::size_t>(class_index(label))]++;
    const double parent = oracle_gini(total);

    std::optional<SplitChoice> best;
    for (const std::size_t f : subset) {
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = x(i, f);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t v = 0; v + 1 < values.size(); ++v) {
            const double threshold = values[v] + 0.5 * (values[v + 1] - values[v]);
            std::array<std::int64_t, 3> left{};
            std::array<std::int64_t, 3> right{};
            for (std::size_t i = 0; i < n; ++i) {
                auto& side = x(i, f) <= threshold ? left : right;
                side[static_cast<std::size_t>(class_index(y[i]))]++;
            }
            const double nl = static_cast<double>(left[0] + left[1] + left[2]);
            const double nr = static_cast<double>(right[0] + right[1] + right[2]);
            if (nl == 0.0 || nr == 0.0) continue;
            const double gain = parent - (nl / static_cast<double>(n)) * oracle_gini(left) -
                                (nr / static_cast<double>(n)) * oracle_gini(right);
            if (gain <= 0.0) continue;
            const bool wins = !best || gain > best->gain ||
                              (gain == best->gain && (f < best->feature ||
                                                      (f == best->feature && threshold < best->threshold)));
            if (wins) best = SplitChoice{f, threshold, gain};
        }
    }
    return best;
}

// Exact simplex projection by exhausting every candidate support set. For
// each subset S: tau = (sum_S z - 1)/|S|, p_i = z_i - tau on S and 0 off it.
// Every candidate with p >= 0 sums to 1, so it is a simplex point, and the
// true projection appears as the candidate for its own support; taking the
// distance minimum therefore returns the exact projection.
inline std::vector<double> sparsemax_qp_oracle(std::span<const double> z) {
    const std::size_t d = z.size();
    std::vector<double> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t mask = 1; mask < (std::size_t{1} << d); ++mask) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < d; ++i) {
            if (mask & (std::size_t{1} << i)) {
                sum += z[i];
                ++count;
            }
        }
        const double tau = (sum - 1.0) / static_cast<double>(count);
        std::vector<double> p(d, 0.0);
        bool feasible = true;
        for (std::size_t i = 0; i < d && feasible; ++i) {
            if (mask & (std::size_t{1} << i)) {
                p[i] = z[i] - tau;
                if (p[i] < 0.0) feasible = false;
            }
        }
        if (!feasible) continue;
        double dist = 0.0;
        for (std::size_t i = 0; i < d; ++i) dist += (p[i] - z[i]) * (p[i] - z[i]);
        if (dist < best_dist) {
            best_dist = dist;
            best = p;
        }
    }
    return best;
}

}  // namespace ctgml::testing

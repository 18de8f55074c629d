#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ctgml/dataset.hpp"
#include "ctgml/matrix.hpp"

namespace ctgml {

// Correlation heatmap: blue-white-red ramp over [-1, 1], coefficient printed
// in each cell, feature labels on both axes.
void write_heatmap_svg(const Matrix& correlation, const std::vector<std::string>& names,
                       const std::filesystem::path& path);

// rgb() fill for a coefficient; exposed so tests can pin the ramp endpoints.
std::string heatmap_color(double coefficient);

struct AccuracySeries {
    std::string label;                // e.g. "svm+lda"
    std::vector<double> accuracies;   // one per fraction, NaN for missing cells
};

// Grouped bar chart of accuracy against train fraction, one bar per series
// within each fraction group, with y grid lines and a legend.
void write_accuracy_bars_svg(const std::vector<double>& fractions,
                             const std::vector<AccuracySeries>& series,
                             const std::filesystem::path& path);

}  // namespace ctgml

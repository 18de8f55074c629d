#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ctgml/dataset.hpp"

namespace ctgml {

// Rows are true classes, columns predicted classes, both in 1/2/3 order.
struct ConfusionMatrix {
    std::array<std::array<std::int64_t, 3>, 3> counts{};

    std::int64_t total() const;
    std::int64_t trace() const;
};

ConfusionMatrix confusion(const std::vector<ClassLabel>& truth, const std::vector<ClassLabel>& predicted);

// trace/total as a percentage. Throws ArgumentError on an empty matrix.
double accuracy_percent(const ConfusionMatrix& cm);

// Recall per class; NaN for classes absent from the evaluation set.
std::array<double, 3> per_class_recall(const ConfusionMatrix& cm);

// Half-up rounding used for every reported percentage.
double round_half_up(double value, int decimals);

void write_confusion_csv(const ConfusionMatrix& cm, std::ostream& out);
void write_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path);

}  // namespace ctgml

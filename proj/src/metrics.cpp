#include "ctgml/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "ctgml/errors.hpp"

namespace ctgml {

std::int64_t ConfusionMatrix::total() const {
    std::int64_t t = 0;
    for (const auto& row : counts)
        for (std::int64_t v : row) t += v;
    return t;
}

std::int64_t ConfusionMatrix::trace() const {
    return counts[0][0] + counts[1][1] + counts[2][2];
}

ConfusionMatrix confusion(const std::vector<ClassLabel>& truth, const std::vector<ClassLabel>& predicted) {
    if (truth.size() != predicted.size()) throw ArgumentError("confusion: label vectors differ in length");
    if (truth.empty()) throw ArgumentError("confusion: no samples");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++cm.counts[class_index(truth[i])][class_index(predicted[i])];
    return cm;
}

double accuracy_percent(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total < 1) throw ArgumentError("accuracy: empty confusion matrix");
    return 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);
}

std::array<double, 3> per_class_recall(const ConfusionMatrix& cm) {
    std::array<double, 3> recall{};
    for (int c = 0; c < kClassCount; ++c) {
        std::int64_t row = 0;
        for (std::int64_t v : cm.counts[c]) row += v;
        recall[c] = row > 0 ? static_cast<double>(cm.counts[c][c]) / static_cast<double>(row)
                            : std::numeric_limits<double>::quiet_NaN();
    }
    return recall;
}

double round_half_up(double value, int decimals) {
    const double f = std::pow(10.0, decimals);
    return std::floor(value * f + 0.5) / f;
}

void write_confusion_csv(const ConfusionMatrix& cm, std::ostream& out) {
    out << "true\\predicted";
    for (int c = 0; c < kClassCount; ++c) out << "," << class_name(class_from_index(c));
    out << "\n";
    for (int r = 0; r < kClassCount; ++r) {
        out << class_name(class_from_index(r));
        for (int c = 0; c < kClassCount; ++c) out << "," << cm.counts[r][c];
        out << "\n";
    }
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_confusion_csv(cm, out);
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace ctgml

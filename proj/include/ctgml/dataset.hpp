#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ctgml/matrix.hpp"

namespace ctgml {

// Fetal-state classes with their fixed 1/2/3 encoding.
enum class ClassLabel : int { Normal = 1, Suspect = 2, Pathological = 3 };

inline constexpr std::size_t kFeatureCount = 21;
inline constexpr int kClassCount = 3;

inline int class_index(ClassLabel c) { return static_cast<int>(c) - 1; }
ClassLabel class_from_index(int index);
ClassLabel class_from_code(int code);  // throws LabelError outside {1,2,3}
std::string_view class_name(ClassLabel c);

// Canonical feature order used everywhere in the toolkit.
const std::array<std::string, kFeatureCount>& canonical_feature_names();

struct Dataset {
    Matrix features;                         // n x 21
    std::vector<ClassLabel> labels;          // size n
    std::vector<std::string> feature_names;  // canonical order

    std::size_t size() const { return labels.size(); }
    std::array<std::size_t, 3> class_counts() const;
};

// Loads the CTG CSV: one header row, the 21 feature columns plus a
// `fetal_health` label column, in any order. Header names are matched
// case-insensitively with spaces and underscores interchangeable.
Dataset load_csv(const std::filesystem::path& path);
Dataset load_csv(std::istream& in, const std::string& origin);

void write_csv(const Dataset& d, const std::filesystem::path& path);
void write_csv(const Dataset& d, std::ostream& out);

struct SplitResult {
    Dataset train;
    Dataset test;
};

// Per class, train receives floor(train_fraction * n_c) rows chosen by a
// seeded shuffle; the remainder goes to test. Deterministic given
// (d, train_fraction, seed).
SplitResult stratified_split(const Dataset& d, double train_fraction, std::uint64_t seed);

struct Scaler {
    std::vector<double> means;
    std::vector<double> std_devs;          // population convention (divide by n)
    std::vector<std::uint8_t> zero_variance;  // flagged columns get std 1
};

Scaler fit_scaler(const Dataset& train);
Matrix apply_scaler(const Scaler& s, const Matrix& x);
Dataset apply_scaler(const Scaler& s, const Dataset& d);

struct CorrelationMatrix {
    Matrix values;  // 21 x 21, symmetric, unit diagonal
};

// Pearson coefficients over all feature pairs. Zero-variance columns get
// zero off-diagonal entries and a warning instead of a failure.
CorrelationMatrix pearson_correlation(const Dataset& d,
                                      std::vector<std::string>* warnings = nullptr);

void write_correlation_csv(const CorrelationMatrix& corr,
                           const std::vector<std::string>& feature_names, std::ostream& out);

}  // namespace ctgml

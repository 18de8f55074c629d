#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ctgml/dataset.hpp"
#include "ctgml/matrix.hpp"

namespace ctgml {

enum class KernelKind { Linear, Rbf };

struct KernelSpec {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 1.0;  // rbf only, must be positive
};

double kernel_eval(const KernelSpec& k, std::span<const double> a, std::span<const double> b);

// The "scale" heuristic: 1 / (d * mean feature variance), with a floor for
// constant data.
double scale_gamma(const Matrix& x);

// One margin classifier trained on +/-1 labels. decision(x) >= 0 means +1.
struct BinarySvm {
    Matrix support_vectors;
    std::vector<double> dual_coefficients;  // alpha_i * y_i per support vector
    double bias = 0.0;
    KernelSpec kernel;
    bool converged = true;
    std::size_t violation_count = 0;  // KKT violators when the pass cap was hit

    double decision(std::span<const double> x) const;
};

// Sequential minimal optimization (two-heuristic working-set selection,
// full-pass / non-bound alternation). Caps at 10000 outer passes; on cap the
// machine is returned with converged = false and the violator count.
BinarySvm smo_train_binary(const Matrix& x, const std::vector<int>& y, const KernelSpec& k,
                           double c, double tol);

// One-vs-one multiclass reduction with majority vote, ties to the lowest
// class index. Pairs are ordered by (lower, higher) class code and the
// binary +1 label is the lower class.
struct SvmModel {
    std::vector<std::pair<ClassLabel, ClassLabel>> pairs;
    std::vector<BinarySvm> machines;
    std::vector<ClassLabel> classes;
};

SvmModel svm_fit(const Matrix& x, const std::vector<ClassLabel>& y, const KernelSpec& k,
                 double c, double tol = 1e-3);
std::vector<ClassLabel> svm_predict(const SvmModel& m, const Matrix& x);

}  // namespace ctgml

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ctgml/dataset.hpp"
#include "ctgml/matrix.hpp"

namespace ctgml {

enum class ProjectionKind { Pca, Lda };

// Linear projection fitted on training data. `components` holds one unit
// direction per column, eigenvalue-descending; `explained` carries variance
// fractions for PCA and discriminant eigenvalues for LDA.
struct Projection {
    ProjectionKind kind = ProjectionKind::Pca;
    std::vector<double> mean;  // feature means at fit time
    Matrix components;         // d x k, columns are directions
    std::vector<double> explained;

    std::size_t input_dim() const { return mean.size(); }
    std::size_t output_dim() const { return components.cols(); }
};

// Top-k eigenvectors of the sample covariance (divide by n-1).
Projection pca_fit(const Matrix& x, std::size_t k);

// Smallest k whose cumulative explained variance reaches `target` in (0, 1].
Projection pca_fit_variance(const Matrix& x, double target);

// Directions maximizing between-class over within-class scatter, via
// Cholesky whitening of S_w (ridge 1e-6 * trace(S_w)/d) and a symmetric
// eigendecomposition. k is capped at (#classes - 1).
Projection lda_fit(const Matrix& x, const std::vector<ClassLabel>& y, std::size_t k);

// (x - mean) * components; throws SchemaError on column mismatch.
Matrix project(const Projection& p, const Matrix& x);

// Plain-text round-trip for reproducibility audits.
void save_projection(const Projection& p, const std::filesystem::path& path);
Projection load_projection(const std::filesystem::path& path);

}  // namespace ctgml

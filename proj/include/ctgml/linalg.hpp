#pragma once

#include <span>
#include <vector>

#include "ctgml/matrix.hpp"

namespace ctgml {

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // sorted non-increasing
    Matrix eigenvectors;              // unit-norm columns aligned with eigenvalues
};

// Symmetric eigendecomposition by cyclic Jacobi rotations.
//
// Sweeps until the largest off-diagonal magnitude falls below an internal
// threshold derived from `tol`, capped at 100 sweeps. On return every pair
// (lambda, v) satisfies max|a v - lambda v| <= tol * max|a|. Eigenvector
// sign convention: the largest-magnitude entry of each column is made
// non-negative so results are deterministic.
//
// Throws SchemaError for non-square or asymmetric input (symmetry checked
// within 1e-10 relative), ArgumentError for tol <= 0 and ConvergenceError
// (carrying the residual) if the sweep cap is hit.
EigenDecomposition sym_eigen(const Matrix& a, double tol);

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
// Throws NotPositiveDefiniteError when a pivot is not strictly positive.
Matrix cholesky(const Matrix& a);

// Solves a x = b for symmetric positive-definite a via Cholesky.
std::vector<double> spd_solve(const Matrix& a, std::span<const double> b);

// Forward/back substitution against a lower-triangular factor.
std::vector<double> solve_lower(const Matrix& l, std::span<const double> b);
std::vector<double> solve_lower_transposed(const Matrix& l, std::span<const double> b);

}  // namespace ctgml

#include "ctgml/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ctgml/errors.hpp"

namespace ctgml {

namespace {

void require_symmetric(const Matrix& a, const char* who) {
    if (a.rows() != a.cols()) throw SchemaError(std::string(who) + ": matrix is not square");
    const double scale = a.max_abs();
    const double limit = 1e-10 * std::max(scale, 1e-300);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (std::abs(a(i, j) - a(j, i)) > limit)
                throw SchemaError(std::string(who) + ": matrix is not symmetric");
}

double max_off_diagonal(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j)));
    return m;
}

// Residual max|a v - lambda v| over all eigenpairs.
double eigen_residual(const Matrix& a, const EigenDecomposition& d) {
    double worst = 0.0;
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            double av = 0.0;
            for (std::size_t j = 0; j < n; ++j) av += a(i, j) * d.eigenvectors(j, k);
            worst = std::max(worst, std::abs(av - d.eigenvalues[k] * d.eigenvectors(i, k)));
        }
    }
    return worst;
}

void fix_column_signs(Matrix& v) {
    for (std::size_t j = 0; j < v.cols(); ++j) {
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < v.rows(); ++i) {
            const double mag = std::abs(v(i, j));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (v(arg, j) < 0.0)
            for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
    }
}

}  // namespace

EigenDecomposition sym_eigen(const Matrix& a, double tol) {
    require_symmetric(a, "sym_eigen");
    if (!(tol > 0.0)) throw ArgumentError("sym_eigen: tol must be positive");

    const std::size_t n = a.rows();
    Matrix w = a;
    Matrix v = Matrix::identity(n);
    const double scale = std::max(a.max_abs(), 1e-300);
    // Push off-diagonals well below the requested residual; Jacobi converges
    // quadratically so the extra margin costs little.
    const double target = std::max(tol * scale * 1e-2, 1e-15 * scale);

    constexpr int kMaxSweeps = 100;
    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        if (max_off_diagonal(w) <= target) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = w(p, q);
                if (std::abs(apq) <= target * 1e-3) continue;
                const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = w(p, p), aqq = w(q, q);
                w(p, p) = app - t * apq;
                w(q, q) = aqq + t * apq;
                w(p, q) = 0.0;
                w(q, p) = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = w(i, p), aiq = w(i, q);
                    w(i, p) = aip - s * (aiq + tau * aip);
                    w(p, i) = w(i, p);
                    w(i, q) = aiq + s * (aip - tau * aiq);
                    w(q, i) = w(i, q);
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = vip - s * (viq + tau * vip);
                    v(i, q) = viq + s * (vip - tau * viq);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return w(i, i) > w(j, j); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = w(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
    }
    fix_column_signs(out.eigenvectors);

    const double residual = eigen_residual(a, out);
    if (residual > tol * scale)
        throw ConvergenceError("sym_eigen: no convergence after " + std::to_string(sweep) +
                                   " sweeps, residual " + std::to_string(residual),
                               residual);
    return out;
}

Matrix cholesky(const Matrix& a) {
    require_symmetric(a, "cholesky");
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (!(diag > 0.0))
            throw NotPositiveDefiniteError("cholesky: non-positive pivot at index " +
                                           std::to_string(j));
        l(j, j) = std::sqrt(diag);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

std::vector<double> solve_lower(const Matrix& l, std::span<const double> b) {
    const std::size_t n = l.rows();
    if (b.size() != n) throw SchemaError("solve_lower: length mismatch");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    return y;
}

std::vector<double> solve_lower_transposed(const Matrix& l, std::span<const double> b) {
    const std::size_t n = l.rows();
    if (b.size() != n) throw SchemaError("solve_lower_transposed: length mismatch");
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

std::vector<double> spd_solve(const Matrix& a, std::span<const double> b) {
    if (a.rows() != b.size()) throw SchemaError("spd_solve: length mismatch");
    const Matrix l = cholesky(a);
    const auto y = solve_lower(l, b);
    return solve_lower_transposed(l, y);
}

}  // namespace ctgml

#include "ctgml/dimred.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "ctgml/errors.hpp"
#include "ctgml/linalg.hpp"

namespace ctgml {

namespace {

constexpr double kEigenTol = 1e-9;

Matrix centered(const Matrix& x, const std::vector<double>& mean) {
    Matrix c = x;
    for (std::size_t r = 0; r < c.rows(); ++r)
        for (std::size_t j = 0; j < c.cols(); ++j) c(r, j) -= mean[j];
    return c;
}

Matrix sample_covariance(const Matrix& x, const std::vector<double>& mean) {
    const Matrix c = centered(x, mean);
    Matrix cov = multiply_at_b(c, c);
    cov.scale(1.0 / static_cast<double>(x.rows() - 1));
    return cov;
}

Projection build_pca(const Matrix& x, const EigenDecomposition& eig, std::size_t k,
                     const std::vector<double>& mean) {
    double total = 0.0;
    for (double v : eig.eigenvalues) total += std::max(v, 0.0);

    Projection p;
    p.kind = ProjectionKind::Pca;
    p.mean = mean;
    p.components = Matrix(x.cols(), k);
    p.explained.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < x.cols(); ++i) p.components(i, j) = eig.eigenvectors(i, j);
        p.explained[j] = total > 0.0 ? std::max(eig.eigenvalues[j], 0.0) / total : 0.0;
    }
    return p;
}

}  // namespace

Projection pca_fit(const Matrix& x, std::size_t k) {
    if (x.rows() < 2) throw ArgumentError("pca_fit: need at least 2 samples");
    if (k < 1 || k > x.cols()) throw ArgumentError("pca_fit: k out of range");
    const auto mean = column_means(x);
    const auto eig = sym_eigen(sample_covariance(x, mean), kEigenTol);
    return build_pca(x, eig, k, mean);
}

Projection pca_fit_variance(const Matrix& x, double target) {
    if (x.rows() < 2) throw ArgumentError("pca_fit: need at least 2 samples");
    if (!(target > 0.0) || target > 1.0) throw ArgumentError("pca_fit: variance target outside (0, 1]");
    const auto mean = column_means(x);
    const auto eig = sym_eigen(sample_covariance(x, mean), kEigenTol);

    double total = 0.0;
    for (double v : eig.eigenvalues) total += std::max(v, 0.0);
    std::size_t k = x.cols();
    double cum = 0.0;
    for (std::size_t j = 0; j < eig.eigenvalues.size(); ++j) {
        cum += std::max(eig.eigenvalues[j], 0.0);
        if (total == 0.0 || cum >= target * total) {
            k = j + 1;
            break;
        }
    }
    return build_pca(x, eig, k, mean);
}

Projection lda_fit(const Matrix& x, const std::vector<ClassLabel>& y, std::size_t k) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != n) throw ArgumentError("lda_fit: feature/label row mismatch");

    std::array<std::size_t, 3> counts{};
    for (ClassLabel c : y) ++counts[class_index(c)];
    std::vector<int> present;
    for (int c = 0; c < kClassCount; ++c) {
        if (counts[c] == 1) throw DegenerateClassError("lda_fit: class " + std::string(class_name(class_from_index(c))) + " has a single sample");
        if (counts[c] > 0) present.push_back(c);
    }
    if (present.size() < 2) throw DegenerateClassError("lda_fit: need at least 2 classes");
    if (n <= present.size()) throw ArgumentError("lda_fit: need more samples than classes");
    const std::size_t max_k = present.size() - 1;
    if (k < 1) throw ArgumentError("lda_fit: k must be positive");
    k = std::min(k, max_k);

    const auto grand_mean = column_means(x);
    std::array<std::vector<double>, 3> class_mean;
    for (int c : present) class_mean[c].assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        auto& m = class_mean[class_index(y[r])];
        for (std::size_t j = 0; j < d; ++j) m[j] += x(r, j);
    }
    for (int c : present)
        for (double& v : class_mean[c]) v /= static_cast<double>(counts[c]);

    // Scatters divided by n: generalized eigenpairs are scale-invariant and
    // this keeps residual checks meaningful in absolute terms.
    Matrix sw(d, d);
    Matrix sb(d, d);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& m = class_mean[class_index(y[r])];
        for (std::size_t i = 0; i < d; ++i) {
            const double di = x(r, i) - m[i];
            for (std::size_t j = i; j < d; ++j) sw(i, j) += di * (x(r, j) - m[j]);
        }
    }
    for (int c : present) {
        const double w = static_cast<double>(counts[c]);
        for (std::size_t i = 0; i < d; ++i) {
            const double di = class_mean[c][i] - grand_mean[i];
            for (std::size_t j = i; j < d; ++j) sb(i, j) += w * di * (class_mean[c][j] - grand_mean[j]);
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            sw(j, i) = sw(i, j) *= inv_n;
            sb(j, i) = sb(i, j) *= inv_n;
        }

    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += sw(i, i);
    const double ridge = 1e-6 * trace / static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i) sw(i, i) += ridge;

    Matrix l;
    try {
        l = cholesky(sw);
    } catch (const NotPositiveDefiniteError& e) {
        throw NumericError(std::string("lda_fit: within-class scatter not invertible after ridge: ") + e.what());
    }

    // m = l^-1 sb l^-T, symmetric with the same eigenvalues as sw^-1 sb.
    Matrix m(d, d);
    std::vector<double> col(d);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < d; ++i) col[i] = sb(i, j);
        const auto v = solve_lower(l, col);
        for (std::size_t i = 0; i < d; ++i) m(i, j) = v[i];
    }
    Matrix whitened(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) col[j] = m(i, j);
        const auto v = solve_lower(l, col);
        for (std::size_t j = 0; j < d; ++j) whitened(i, j) = v[j];
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double avg = 0.5 * (whitened(i, j) + whitened(j, i));
            whitened(i, j) = whitened(j, i) = avg;
        }

    const auto eig = sym_eigen(whitened, kEigenTol);

    Projection p;
    p.kind = ProjectionKind::Lda;
    p.mean = grand_mean;
    p.components = Matrix(d, k);
    p.explained.resize(k);
    std::vector<double> u(d);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < d; ++i) u[i] = eig.eigenvectors(i, j);
        auto w = solve_lower_transposed(l, u);
        double norm = 0.0;
        for (double v : w) norm += v * v;
        norm = std::sqrt(norm);
        if (norm <= 0.0) throw NumericError("lda_fit: zero-norm discriminant direction");
        double peak = 0.0;
        for (double v : w) peak = std::max(peak, std::abs(v));
        double sign = 1.0;
        for (double v : w)
            if (std::abs(v) == peak) {
                sign = v < 0.0 ? -1.0 : 1.0;
                break;
            }
        for (std::size_t i = 0; i < d; ++i) p.components(i, j) = w[i] * sign / norm;
        p.explained[j] = eig.eigenvalues[j];
    }
    return p;
}

Matrix project(const Projection& p, const Matrix& x) {
    if (x.cols() != p.input_dim()) throw SchemaError("project: column count does not match projection");
    return multiply(centered(x, p.mean), p.components);
}

void save_projection(const Projection& p, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    const std::size_t d = p.input_dim();
    const std::size_t k = p.output_dim();
    out << "projection " << (p.kind == ProjectionKind::Pca ? "pca" : "lda") << "\n";
    out << "dims " << d << " " << k << "\n";
    char buf[32];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    out << "mean";
    for (double v : p.mean) {
        out << " ";
        emit(v);
    }
    out << "\nexplained";
    for (double v : p.explained) {
        out << " ";
        emit(v);
    }
    out << "\n";
    for (std::size_t j = 0; j < k; ++j) {
        out << "component";
        for (std::size_t i = 0; i < d; ++i) {
            out << " ";
            emit(p.components(i, j));
        }
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());
}

Projection load_projection(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string tag, kind;
    if (!(in >> tag >> kind) || tag != "projection") throw ParseError(path.string() + ": not a projection file");
    Projection p;
    if (kind == "pca")
        p.kind = ProjectionKind::Pca;
    else if (kind == "lda")
        p.kind = ProjectionKind::Lda;
    else
        throw ParseError(path.string() + ": unknown projection kind '" + kind + "'");
    std::size_t d = 0, k = 0;
    if (!(in >> tag >> d >> k) || tag != "dims" || d == 0 || k == 0)
        throw ParseError(path.string() + ": bad dims line");
    p.mean.resize(d);
    if (!(in >> tag) || tag != "mean") throw ParseError(path.string() + ": missing mean");
    for (double& v : p.mean)
        if (!(in >> v)) throw ParseError(path.string() + ": truncated mean");
    p.explained.resize(k);
    if (!(in >> tag) || tag != "explained") throw ParseError(path.string() + ": missing explained");
    for (double& v : p.explained)
        if (!(in >> v)) throw ParseError(path.string() + ": truncated explained");
    p.components = Matrix(d, k);
    for (std::size_t j = 0; j < k; ++j) {
        if (!(in >> tag) || tag != "component") throw ParseError(path.string() + ": missing component row");
        for (std::size_t i = 0; i < d; ++i)
            if (!(in >> p.components(i, j))) throw ParseError(path.string() + ": truncated component");
    }
    return p;
}

}  // namespace ctgml

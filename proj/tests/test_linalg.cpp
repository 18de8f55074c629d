#include <algorithm>
#include <cmath>
#include <vector>

#include "ctgml/errors.hpp"
#include "ctgml/linalg.hpp"
#include "ctgml/matrix.hpp"
#include "ctgml/rng.hpp"
#include "doctest.h"

using namespace ctgml;

namespace {

Matrix random_symmetric(std::size_t n, Rng& rng) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = rng.normal();
            a(i, j) = v;
            a(j, i) = v;
        }
    return a;
}

double eigen_residual(const Matrix& a, const EigenDecomposition& e) {
    double worst = 0.0;
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            double av = 0.0;
            for (std::size_t j = 0; j < n; ++j) av += a(i, j) * e.eigenvectors(j, k);
            worst = std::max(worst, std::abs(av - e.eigenvalues[k] * e.eigenvectors(i, k)));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("matrix products agree with the transpose-free variants") {
    Rng rng(11);
    Matrix a(4, 6);
    Matrix b(4, 3);
    for (auto& v : a.data()) v = rng.normal();
    for (auto& v : b.data()) v = rng.normal();

    const Matrix atb = multiply_at_b(a, b);
    const Matrix ref = multiply(a.transposed(), b);
    REQUIRE(atb.rows() == 6);
    REQUIRE(atb.cols() == 3);
    for (std::size_t i = 0; i < atb.rows(); ++i)
        for (std::size_t j = 0; j < atb.cols(); ++j)
            CHECK(atb(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-12));

    const Matrix abt = multiply_a_bt(a, a);
    const Matrix ref2 = multiply(a, a.transposed());
    for (std::size_t i = 0; i < abt.rows(); ++i)
        for (std::size_t j = 0; j < abt.cols(); ++j)
            CHECK(abt(i, j) == doctest::Approx(ref2(i, j)).epsilon(1e-12));
}

TEST_CASE("2x2 eigendecomposition matches the closed form") {
    const Matrix a = Matrix::from_rows({{2, 1}, {1, 2}});
    const auto e = sym_eigen(a, 1e-12);
    REQUIRE(e.eigenvalues.size() == 2);
    CHECK(e.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(e.eigenvectors(0, 0) == doctest::Approx(r));
    CHECK(e.eigenvectors(1, 0) == doctest::Approx(r));
    // sign convention: largest-magnitude entry non-negative
    CHECK(std::abs(e.eigenvectors(0, 1)) == doctest::Approx(r));
    CHECK(std::max(e.eigenvectors(0, 1), e.eigenvectors(1, 1)) > 0.0);
    CHECK(e.eigenvectors(0, 1) * e.eigenvectors(1, 1) < 0.0);
}

TEST_CASE("random symmetric eigendecompositions satisfy the residual bound") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.below(9);
        const Matrix a = random_symmetric(n, rng);
        const double tol = 1e-10;
        const auto e = sym_eigen(a, tol);

        CHECK(eigen_residual(a, e) <= tol * a.max_abs());
        CHECK(std::is_sorted(e.eigenvalues.rbegin(), e.eigenvalues.rend()));

        // columns orthonormal
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p; q < n; ++q) {
                double d = 0.0;
                for (std::size_t i = 0; i < n; ++i) d += e.eigenvectors(i, p) * e.eigenvectors(i, q);
                CHECK(d == doctest::Approx(p == q ? 1.0 : 0.0).epsilon(1e-9).scale(1.0));
            }

        // trace preserved
        double trace = 0.0;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) trace += a(i, i);
        for (const double v : e.eigenvalues) sum += v;
        CHECK(sum == doctest::Approx(trace).epsilon(1e-9));
    }
}

TEST_CASE("eigendecomposition input validation") {
    CHECK_THROWS_AS(sym_eigen(Matrix(2, 3), 1e-10), SchemaError);
    CHECK_THROWS_AS(sym_eigen(Matrix::from_rows({{1, 2}, {0, 1}}), 1e-10), SchemaError);
    CHECK_THROWS_AS(sym_eigen(Matrix::identity(2), 0.0), ArgumentError);
    CHECK_THROWS_AS(sym_eigen(Matrix::identity(2), -1.0), ArgumentError);
}

TEST_CASE("cholesky factors and solves a small spd system") {
    const Matrix a = Matrix::from_rows({{4, 1}, {1, 3}});
    const Matrix l = cholesky(a);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < 2; ++k) v += l(i, k) * l(j, k);
            CHECK(v == doctest::Approx(a(i, j)).epsilon(1e-14));
        }
    CHECK(l(0, 1) == 0.0);

    const std::vector<double> b{1.0, 2.0};
    const auto x = spd_solve(a, b);
    CHECK(x[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(7.0 / 11.0).epsilon(1e-14));
}

TEST_CASE("cholesky rejects indefinite input") {
    CHECK_THROWS_AS(cholesky(Matrix::from_rows({{1, 2}, {2, 1}})), NotPositiveDefiniteError);
    CHECK_THROWS_AS(cholesky(Matrix::from_rows({{0, 0}, {0, 1}})), NotPositiveDefiniteError);
}

TEST_CASE("triangular solves invert each other") {
    Rng rng(3);
    const Matrix a = [&] {
        Matrix m = random_symmetric(5, rng);
        for (std::size_t i = 0; i < 5; ++i) m(i, i) += 6.0;  // make spd
        return m;
    }();
    const Matrix l = cholesky(a);
    std::vector<double> b(5);
    for (auto& v : b) v = rng.normal();

    const auto y = solve_lower(l, b);
    const auto x = solve_lower_transposed(l, y);
    const auto back = multiply(a, x);
    for (std::size_t i = 0; i < 5; ++i) CHECK(back[i] == doctest::Approx(b[i]).epsilon(1e-10));
}

TEST_CASE("rng streams are deterministic and well ranged") {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng r(5);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r.below(7) < 7);
    }
    CHECK(r.below(1) == 0);

    std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
    auto sorted = v;
    r.shuffle(v);
    std::sort(v.begin(), v.end());
    CHECK(v == sorted);
}

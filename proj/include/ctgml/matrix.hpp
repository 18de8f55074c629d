#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ctgml {

// Dense row-major matrix of doubles. All numeric work in the toolkit is
// done in 64-bit floating point.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    Matrix transposed() const;
    bool all_finite() const noexcept;
    double max_abs() const noexcept;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& scale(double s) noexcept;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);

// a (r x k) times b (k x c).
Matrix multiply(const Matrix& a, const Matrix& b);
// transpose(a) times b without forming the transpose.
Matrix multiply_at_b(const Matrix& a, const Matrix& b);
// a times transpose(b) without forming the transpose.
Matrix multiply_a_bt(const Matrix& a, const Matrix& b);
// a (r x c) times column vector x (size c).
std::vector<double> multiply(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

std::vector<double> column_means(const Matrix& x);
// Population variance (divide by n) per column.
std::vector<double> column_variances(const Matrix& x);

}  // namespace ctgml

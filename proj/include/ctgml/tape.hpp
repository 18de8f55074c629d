#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ctgml/matrix.hpp"

namespace ctgml {

// Minimal reverse-mode tape over Matrix values. A graph is built per batch,
// backward() runs the recorded closures in reverse creation order, and
// gradients accumulate into every node (leaves included).
class Tape {
public:
    using Id = std::size_t;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Id leaf(Matrix value);

    const Matrix& value(Id v) const { return nodes_[v].value; }
    const Matrix& grad(Id v) const { return nodes_[v].grad; }

    // Root must be 1x1; its gradient is seeded with 1.
    void backward(Id root);

    Id matmul(Id a, Id b);
    Id add(Id a, Id b);
    Id sub(Id a, Id b);
    Id hadamard(Id a, Id b);
    // mul * x + shift, elementwise
    Id linear_const(Id a, double mul, double shift);
    // row is 1 x cols, broadcast down the rows of a
    Id add_row(Id a, Id row);
    Id mul_row(Id a, Id row);
    Id sigmoid(Id a);
    Id relu(Id a);
    Id slice_cols(Id a, std::size_t begin, std::size_t count);

    // Row-wise Euclidean projection onto the probability simplex.
    Id sparsemax_rows(Id a);

    // Column-wise batch normalization without affine terms. Train mode uses
    // batch statistics and reports them through the out-parameters; eval mode
    // normalizes with the statistics given.
    Id batchnorm_train(Id a, double eps, std::vector<double>* batch_mean, std::vector<double>* batch_var);
    Id batchnorm_eval(Id a, double eps, const std::vector<double>& mean, const std::vector<double>& var);

    // Mean cross-entropy of softmax(logits) against class indices; 1x1.
    Id softmax_cross_entropy(Id logits, const std::vector<int>& targets);

    // Sum of -m * log(m + eps) over all entries; 1x1.
    Id entropy_sum(Id m, double eps);

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::function<void()> back;  // empty for leaves
    };

    Id push(Matrix value, std::function<void()> back = {});
    Matrix& grad_mut(Id v) { return nodes_[v].grad; }

    std::vector<Node> nodes_;
};

}  // namespace ctgml

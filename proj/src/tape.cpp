#include "ctgml/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctgml/errors.hpp"

namespace ctgml {

namespace {

void add_into(Matrix& dst, const Matrix& src) {
    for (std::size_t i = 0; i < dst.data().size(); ++i) dst.data()[i] += src.data()[i];
}

}  // namespace

Tape::Id Tape::push(Matrix value, std::function<void()> back) {
    Node node;
    node.grad = Matrix(value.rows(), value.cols());
    node.value = std::move(value);
    node.back = std::move(back);
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
}

Tape::Id Tape::leaf(Matrix value) { return push(std::move(value)); }

void Tape::backward(Id root) {
    if (value(root).rows() != 1 || value(root).cols() != 1)
        throw ArgumentError("Tape::backward: root must be a scalar");
    grad_mut(root)(0, 0) = 1.0;
    for (std::size_t i = root + 1; i-- > 0;)
        if (nodes_[i].back) nodes_[i].back();
}

Tape::Id Tape::matmul(Id a, Id b) {
    Id out = push(multiply(value(a), value(b)));
    nodes_[out].back = [this, a, b, out] {
        const Matrix& g = grad(out);
        add_into(grad_mut(a), multiply_a_bt(g, value(b)));
        add_into(grad_mut(b), multiply_at_b(value(a), g));
    };
    return out;
}

Tape::Id Tape::add(Id a, Id b) {
    Matrix v = value(a);
    v += value(b);
    Id out = push(std::move(v));
    nodes_[out].back = [this, a, b, out] {
        add_into(grad_mut(a), grad(out));
        add_into(grad_mut(b), grad(out));
    };
    return out;
}

Tape::Id Tape::sub(Id a, Id b) {
    Matrix v = value(a);
    v -= value(b);
    Id out = push(std::move(v));
    nodes_[out].back = [this, a, b, out] {
        add_into(grad_mut(a), grad(out));
        const Matrix& g = grad(out);
        Matrix& gb = grad_mut(b);
        for (std::size_t i = 0; i < gb.data().size(); ++i) gb.data()[i] -= g.data()[i];
    };
    return out;
}

Tape::Id Tape::hadamard(Id a, Id b) {
    const Matrix& va = value(a);
    const Matrix& vb = value(b);
    if (va.rows() != vb.rows() || va.cols() != vb.cols())
        throw SchemaError("Tape::hadamard: shape mismatch");
    Matrix v = va;
    for (std::size_t i = 0; i < v.data().size(); ++i) v.data()[i] *= vb.data()[i];
    Id out = push(std::move(v));
    nodes_[out].back = [this, a, b, out] {
        const Matrix& g = grad(out);
        Matrix& ga = grad_mut(a);
        Matrix& gb = grad_mut(b);
        const Matrix& va = value(a);
        const Matrix& vb = value(b);
        for (std::size_t i = 0; i < g.data().size(); ++i) {
            ga.data()[i] += g.data()[i] * vb.data()[i];
            gb.data()[i] += g.data()[i] * va.data()[i];
        }
    };
    return out;
}

Tape::Id Tape::linear_const(Id a, double mul, double shift) {
    Matrix v = value(a);
    for (double& x : v.data()) x = mul * x + shift;
    Id out = push(std::move(v));
    nodes_[out].back = [this, a, mul, out] {
        const Matrix& g = grad(out);
        Matrix& ga = grad_mut(a);
        for (std::size_t i = 0; i < ga.data().size(); ++i) ga.data()[i] += mul * g.data()[i];
    };
    return out;
}

Tape::Id Tape::add_row(Id a, Id row) {
    const Matrix& va = value(a);
    const Matrix& vr = value(row);
    if (vr.rows() != 1 || vr.cols() != va.cols()) throw SchemaError("Tape::add_row: shape mismatch");
    Matrix v = va;
    for (std::size_t r = 0; r < v.rows(); ++r)
        for (std::size_t j = 0; j < v.cols(); ++j) v(r, j) += vr(0, j);
    Id out = push(std::move(v));
    nodes_[out].back = [this, a, row, out] {
        const Matrix& g = grad(out);
        add_into(grad_mut(a), g);
        Matrix& gr = grad_mut(row);
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t j = 0; j < g.cols(); ++j) gr(0, j) += g(r, j);
    };
    return out;
}

Tape::Id Tape::mul_row(Id a, Id row) {
    const Matrix& va = value(a);
    const Matrix& vr = value(row);
    if (vr.rows() != 1 || vr.cols() != va.cols()) throw SchemaError("Tape::mul_row: shape mismatch");
    Matrix v = va;
    for (std::size_t r = 0; r < v.rows(); ++r)
        for (std::size_t j = 0; j < v.cols(); ++j) v(r, j) *= vr(0, j);
    Id out = push(std::move(v));
    nodes_[out].back = [this, a, row, out] {
        const Matrix& g = grad(out);
        const Matrix& va = value(a);
        const Matrix& vr = value(row);
        Matrix& ga = grad_mut(a);
        Matrix& gr = grad_mut(row);
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t j = 0; j < g.cols(); ++j) {
                ga(r, j) += g(r, j) * vr(0, j);
                gr(0, j) += g(r, j) * va(r, j);
            }
    };
    return out;
}

Tape::Id Tape::sigmoid(Id a) {
    Matrix v = value(a);
    for (double& x : v.data()) {
        if (x >= 0.0) {
            x = 1.0 / (1.0 + std::exp(-x));
        } else {
            const double e = std::exp(x);
            x = e / (1.0 + e);
        }
    }
    Id out = push(std::move(v));
    nodes_[out].back = [this, a, out] {
        const Matrix& g = grad(out);
        const Matrix& s = value(out);
        Matrix& ga = grad_mut(a);
        for (std::size_t i = 0; i < g.data().size(); ++i) {
            const double sv = s.data()[i];
            ga.data()[i] += g.data()[i] * sv * (1.0 - sv);
        }
    };
    return out;
}

Tape::Id Tape::relu(Id a) {
    Matrix v = value(a);
    for (double& x : v.data()) x = std::max(0.0, x);
    Id out = push(std::move(v));
    nodes_[out].back = [this, a, out] {
        const Matrix& g = grad(out);
        const Matrix& va = value(a);
        Matrix& ga = grad_mut(a);
        for (std::size_t i = 0; i < g.data().size(); ++i)
            if (va.data()[i] > 0.0) ga.data()[i] += g.data()[i];
    };
    return out;
}

Tape::Id Tape::slice_cols(Id a, std::size_t begin, std::size_t count) {
    const Matrix& va = value(a);
    if (begin + count > va.cols()) throw ArgumentError("Tape::slice_cols: range out of bounds");
    Matrix v(va.rows(), count);
    for (std::size_t r = 0; r < va.rows(); ++r)
        for (std::size_t j = 0; j < count; ++j) v(r, j) = va(r, begin + j);
    Id out = push(std::move(v));
    nodes_[out].back = [this, a, begin, count, out] {
        const Matrix& g = grad(out);
        Matrix& ga = grad_mut(a);
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t j = 0; j < count; ++j) ga(r, begin + j) += g(r, j);
    };
    return out;
}

namespace {

// Sorted cumulative-sum threshold. Returns tau; support is z_i > tau.
double sparsemax_tau(std::span<const double> z, std::vector<double>& scratch) {
    scratch.assign(z.begin(), z.end());
    std::sort(scratch.begin(), scratch.end(), std::greater<>());
    double cumulative = 0.0;
    double tau = 0.0;
    std::size_t support = 0;
    for (std::size_t k = 0; k < scratch.size(); ++k) {
        cumulative += scratch[k];
        const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (scratch[k] > candidate) {
            tau = candidate;
            support = k + 1;
        }
    }
    (void)support;
    return tau;
}

}  // namespace

Tape::Id Tape::sparsemax_rows(Id a) {
    const Matrix& va = value(a);
    if (!va.all_finite()) throw NumericError("sparsemax: non-finite input");
    Matrix v(va.rows(), va.cols());
    std::vector<double> scratch;
    for (std::size_t r = 0; r < va.rows(); ++r) {
        const double tau = sparsemax_tau(va.row(r), scratch);
        for (std::size_t j = 0; j < va.cols(); ++j) v(r, j) = std::max(va(r, j) - tau, 0.0);
    }
    Id out = push(std::move(v));
    nodes_[out].back = [this, a, out] {
        const Matrix& g = grad(out);
        const Matrix& p = value(out);
        Matrix& ga = grad_mut(a);
        for (std::size_t r = 0; r < g.rows(); ++r) {
            double sum = 0.0;
            std::size_t support = 0;
            for (std::size_t j = 0; j < g.cols(); ++j)
                if (p(r, j) > 0.0) {
                    sum += g(r, j);
                    ++support;
                }
            if (support == 0) continue;
            const double mean = sum / static_cast<double>(support);
            for (std::size_t j = 0; j < g.cols(); ++j)
                if (p(r, j) > 0.0) ga(r, j) += g(r, j) - mean;
        }
    };
    return out;
}

Tape::Id Tape::batchnorm_train(Id a, double eps, std::vector<double>* batch_mean,
                               std::vector<double>* batch_var) {
    const Matrix& va = value(a);
    const std::size_t n = va.rows();
    const std::size_t d = va.cols();
    const auto mean = column_means(va);
    const auto var = column_variances(va);
    if (batch_mean) *batch_mean = mean;
    if (batch_var) *batch_var = var;

    Matrix v(n, d);
    std::vector<double> inv_sd(d);
    for (std::size_t j = 0; j < d; ++j) inv_sd[j] = 1.0 / std::sqrt(var[j] + eps);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < d; ++j) v(r, j) = (va(r, j) - mean[j]) * inv_sd[j];

    Id out = push(std::move(v));
    nodes_[out].back = [this, a, out, inv_sd = std::move(inv_sd)] {
        const Matrix& g = grad(out);
        const Matrix& xhat = value(out);
        Matrix& ga = grad_mut(a);
        const auto n = static_cast<double>(g.rows());
        for (std::size_t j = 0; j < g.cols(); ++j) {
            double g_mean = 0.0;
            double gx_mean = 0.0;
            for (std::size_t r = 0; r < g.rows(); ++r) {
                g_mean += g(r, j);
                gx_mean += g(r, j) * xhat(r, j);
            }
            g_mean /= n;
            gx_mean /= n;
            for (std::size_t r = 0; r < g.rows(); ++r)
                ga(r, j) += inv_sd[j] * (g(r, j) - g_mean - xhat(r, j) * gx_mean);
        }
    };
    return out;
}

Tape::Id Tape::batchnorm_eval(Id a, double eps, const std::vector<double>& mean,
                              const std::vector<double>& var) {
    const Matrix& va = value(a);
    if (mean.size() != va.cols() || var.size() != va.cols())
        throw SchemaError("Tape::batchnorm_eval: statistics width mismatch");
    Matrix v(va.rows(), va.cols());
    std::vector<double> inv_sd(va.cols());
    for (std::size_t j = 0; j < va.cols(); ++j) inv_sd[j] = 1.0 / std::sqrt(var[j] + eps);
    for (std::size_t r = 0; r < va.rows(); ++r)
        for (std::size_t j = 0; j < va.cols(); ++j) v(r, j) = (va(r, j) - mean[j]) * inv_sd[j];
    Id out = push(std::move(v));
    nodes_[out].back = [this, a, out, inv_sd = std::move(inv_sd)] {
        const Matrix& g = grad(out);
        Matrix& ga = grad_mut(a);
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t j = 0; j < g.cols(); ++j) ga(r, j) += g(r, j) * inv_sd[j];
    };
    return out;
}

Tape::Id Tape::softmax_cross_entropy(Id logits, const std::vector<int>& targets) {
    const Matrix& z = value(logits);
    if (targets.size() != z.rows()) throw ArgumentError("softmax_cross_entropy: target count mismatch");
    const auto n = static_cast<double>(z.rows());

    Matrix probs(z.rows(), z.cols());
    double total = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) {
        double zmax = z(r, 0);
        for (std::size_t j = 1; j < z.cols(); ++j) zmax = std::max(zmax, z(r, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < z.cols(); ++j) {
            probs(r, j) = std::exp(z(r, j) - zmax);
            sum += probs(r, j);
        }
        for (std::size_t j = 0; j < z.cols(); ++j) probs(r, j) /= sum;
        total += std::log(sum) + zmax - z(r, static_cast<std::size_t>(targets[r]));
    }

    Matrix v(1, 1);
    v(0, 0) = total / n;
    Id out = push(std::move(v));
    nodes_[out].back = [this, logits, out, targets, probs = std::move(probs), n] {
        const double g = grad(out)(0, 0);
        Matrix& gz = grad_mut(logits);
        for (std::size_t r = 0; r < gz.rows(); ++r)
            for (std::size_t j = 0; j < gz.cols(); ++j) {
                const double onehot = j == static_cast<std::size_t>(targets[r]) ? 1.0 : 0.0;
                gz(r, j) += g * (probs(r, j) - onehot) / n;
            }
    };
    return out;
}

Tape::Id Tape::entropy_sum(Id m, double eps) {
    const Matrix& vm = value(m);
    double total = 0.0;
    for (double x : vm.data()) total -= x * std::log(x + eps);
    Matrix v(1, 1);
    v(0, 0) = total;
    Id out = push(std::move(v));
    nodes_[out].back = [this, m, out, eps] {
        const double g = grad(out)(0, 0);
        const Matrix& vm = value(m);
        Matrix& gm = grad_mut(m);
        for (std::size_t i = 0; i < vm.data().size(); ++i) {
            const double x = vm.data()[i];
            gm.data()[i] += g * (-std::log(x + eps) - x / (x + eps));
        }
    };
    return out;
}

}  // namespace ctgml

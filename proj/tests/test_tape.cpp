#include <cmath>
#include <functional>
#include <vector>

#include "ctgml/matrix.hpp"
#include "ctgml/rng.hpp"
#include "ctgml/tape.hpp"
#include "doctest.h"

using namespace ctgml;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (auto& v : m.data()) v = rng.normal();
    return m;
}

// Builds op(inputs...) and reduces it to u * out * v so the root is 1x1;
// the rank-1 weights still reach every output entry.
struct ScalarGraph {
    std::function<Tape::Id(Tape&, const std::vector<Tape::Id>&)> op;
    Matrix u;  // 1 x out_rows
    Matrix v;  // out_cols x 1

    double value_and_grads(const std::vector<Matrix>& inputs, std::vector<Matrix>* grads) const {
        Tape tape;
        std::vector<Tape::Id> ids;
        for (const auto& m : inputs) ids.push_back(tape.leaf(m));
        const Tape::Id out = op(tape, ids);
        const Tape::Id root = tape.matmul(tape.matmul(tape.leaf(u), out), tape.leaf(v));
        if (grads) {
            tape.backward(root);
            grads->clear();
            for (const Tape::Id id : ids) grads->push_back(tape.grad(id));
        }
        return tape.value(root)(0, 0);
    }
};

// Central finite differences against the analytic gradient on every input.
void check_gradients(const ScalarGraph& g, std::vector<Matrix> inputs, double h = 1e-6,
                     double tol = 1e-5) {
    std::vector<Matrix> grads;
    g.value_and_grads(inputs, &grads);
    for (std::size_t m = 0; m < inputs.size(); ++m) {
        for (std::size_t i = 0; i < inputs[m].data().size(); ++i) {
            const double keep = inputs[m].data()[i];
            inputs[m].data()[i] = keep + h;
            const double fp = g.value_and_grads(inputs, nullptr);
            inputs[m].data()[i] = keep - h;
            const double fm = g.value_and_grads(inputs, nullptr);
            inputs[m].data()[i] = keep;
            const double fd = (fp - fm) / (2.0 * h);
            const double an = grads[m].data()[i];
            CHECK(std::abs(an - fd) <= tol * std::max({1.0, std::abs(an), std::abs(fd)}));
        }
    }
}

ScalarGraph graph(std::size_t out_rows, std::size_t out_cols, Rng& rng,
                  std::function<Tape::Id(Tape&, const std::vector<Tape::Id>&)> op) {
    return {std::move(op), random_matrix(1, out_rows, rng), random_matrix(out_cols, 1, rng)};
}

}  // namespace

TEST_CASE("elementwise and matrix op gradients match finite differences") {
    Rng rng(31);
    const Matrix a = random_matrix(3, 4, rng);
    const Matrix b = random_matrix(4, 2, rng);
    const Matrix c = random_matrix(3, 4, rng);
    const Matrix row = random_matrix(1, 4, rng);

    check_gradients(graph(3, 2, rng, [](Tape& t, const auto& in) { return t.matmul(in[0], in[1]); }),
                    {a, b});
    check_gradients(graph(3, 4, rng, [](Tape& t, const auto& in) { return t.add(in[0], in[1]); }),
                    {a, c});
    check_gradients(graph(3, 4, rng, [](Tape& t, const auto& in) { return t.sub(in[0], in[1]); }),
                    {a, c});
    check_gradients(
        graph(3, 4, rng, [](Tape& t, const auto& in) { return t.hadamard(in[0], in[1]); }), {a, c});
    check_gradients(
        graph(3, 4, rng, [](Tape& t, const auto& in) { return t.linear_const(in[0], -1.7, 0.4); }),
        {a});
    check_gradients(
        graph(3, 4, rng, [](Tape& t, const auto& in) { return t.add_row(in[0], in[1]); }),
        {a, row});
    check_gradients(
        graph(3, 4, rng, [](Tape& t, const auto& in) { return t.mul_row(in[0], in[1]); }),
        {a, row});
    check_gradients(graph(3, 4, rng, [](Tape& t, const auto& in) { return t.sigmoid(in[0]); }),
                    {a});
    check_gradients(graph(3, 4, rng, [](Tape& t, const auto& in) { return t.relu(in[0]); }), {a});
    check_gradients(
        graph(3, 2, rng, [](Tape& t, const auto& in) { return t.slice_cols(in[0], 1, 2); }), {a});
}

TEST_CASE("reused nodes accumulate gradient from every consumer") {
    Rng rng(33);
    const Matrix a = random_matrix(2, 3, rng);
    // a appears twice: hadamard(a, a) has gradient 2a through both paths
    check_gradients(
        graph(2, 3, rng, [](Tape& t, const auto& in) { return t.hadamard(in[0], in[0]); }), {a});
}

TEST_CASE("sparsemax gradient matches finite differences off the boundary") {
    Rng rng(37);
    const Matrix z = random_matrix(4, 5, rng);
    check_gradients(
        graph(4, 5, rng, [](Tape& t, const auto& in) { return t.sparsemax_rows(in[0]); }), {z});
}

TEST_CASE("batchnorm gradients flow through the batch statistics") {
    Rng rng(41);
    Matrix x = random_matrix(6, 3, rng);
    for (auto& v : x.data()) v = 2.0 * v + 0.5;
    std::vector<double> mean, var;
    check_gradients(graph(6, 3, rng,
                          [&](Tape& t, const auto& in) {
                              return t.batchnorm_train(in[0], 1e-5, &mean, &var);
                          }),
                    {x});
    REQUIRE(mean.size() == 3);
    REQUIRE(var.size() == 3);

    // eval mode with the captured statistics reproduces the train output
    Tape t1;
    const Tape::Id id1 = t1.leaf(x);
    const Matrix train_out = t1.value(t1.batchnorm_train(id1, 1e-5, &mean, &var));
    Tape t2;
    const Tape::Id id2 = t2.leaf(x);
    const Matrix eval_out = t2.value(t2.batchnorm_eval(id2, 1e-5, mean, var));
    for (std::size_t i = 0; i < train_out.data().size(); ++i)
        CHECK(eval_out.data()[i] == doctest::Approx(train_out.data()[i]).epsilon(1e-12));
}

TEST_CASE("batchnorm eval gradient treats the statistics as constants") {
    Rng rng(43);
    const Matrix x = random_matrix(5, 2, rng);
    const std::vector<double> mean{0.2, -0.4};
    const std::vector<double> var{1.3, 0.8};
    check_gradients(graph(5, 2, rng,
                          [&](Tape& t, const auto& in) {
                              return t.batchnorm_eval(in[0], 1e-5, mean, var);
                          }),
                    {x});
}

TEST_CASE("cross entropy and entropy gradients match finite differences") {
    Rng rng(47);
    const Matrix logits = random_matrix(6, 3, rng);
    const std::vector<int> targets{0, 2, 1, 1, 0, 2};

    // already scalar: bypass the rank-1 reduction
    Tape tape;
    const Tape::Id id = tape.leaf(logits);
    const Tape::Id loss = tape.softmax_cross_entropy(id, targets);
    tape.backward(loss);
    const Matrix grad = tape.grad(id);

    Matrix pert = logits;
    const double h = 1e-6;
    for (std::size_t i = 0; i < pert.data().size(); ++i) {
        const double keep = pert.data()[i];
        auto eval = [&](double v) {
            pert.data()[i] = v;
            Tape t;
            return t.value(t.softmax_cross_entropy(t.leaf(pert), targets))(0, 0);
        };
        const double fd = (eval(keep + h) - eval(keep - h)) / (2.0 * h);
        pert.data()[i] = keep;
        CHECK(std::abs(grad.data()[i] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }

    // entropy over a positive matrix (masks live in [0, 1])
    Matrix m(3, 4);
    for (auto& v : m.data()) v = 0.05 + 0.9 * rng.uniform();
    Tape te;
    const Tape::Id mid = te.leaf(m);
    const Tape::Id ent = te.entropy_sum(mid, 1e-15);
    te.backward(ent);
    const Matrix egrad = te.grad(mid);
    for (std::size_t i = 0; i < m.data().size(); ++i) {
        const double keep = m.data()[i];
        auto eval = [&](double v) {
            Matrix p = m;
            p.data()[i] = v;
            Tape t;
            return t.value(t.entropy_sum(t.leaf(p), 1e-15))(0, 0);
        };
        const double fd = (eval(keep + h) - eval(keep - h)) / (2.0 * h);
        CHECK(std::abs(egrad.data()[i] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("uniform logits give cross entropy ln 3") {
    const Matrix logits(4, 3, 0.0);
    const std::vector<int> targets{0, 1, 2, 1};
    Tape t;
    const double loss = t.value(t.softmax_cross_entropy(t.leaf(logits), targets))(0, 0);
    CHECK(loss == doctest::Approx(std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("sparsemax values hit the pinned cases") {
    auto eval = [](std::initializer_list<double> z) {
        Matrix m(1, z.size());
        std::size_t i = 0;
        for (const double v : z) m(0, i++) = v;
        Tape t;
        return t.value(t.sparsemax_rows(t.leaf(m)));
    };
    const Matrix uniform = eval({1.0, 1.0, 1.0});
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(uniform(0, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    const Matrix peaked = eval({10.0, 0.0, 0.0});
    CHECK(peaked(0, 0) == 1.0);
    CHECK(peaked(0, 1) == 0.0);
    CHECK(peaked(0, 2) == 0.0);

    const Matrix split = eval({0.5, 0.1});
    CHECK(split(0, 0) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(split(0, 1) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("sparsemax approaches uniform as the temperature grows") {
    Rng rng(53);
    Matrix z(1, 6);
    for (auto& v : z.data()) v = rng.normal();
    for (auto& v : z.data()) v /= 1e6;
    Tape t;
    const Matrix p = t.value(t.sparsemax_rows(t.leaf(z)));
    for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(p(0, j) - 1.0 / 6.0) < 1e-3);
}

#include "ctgml/svm.hpp"

#include <algorithm>
#include <cmath>

#include "ctgml/errors.hpp"

namespace ctgml {

double kernel_eval(const KernelSpec& k, std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw SchemaError("kernel_eval: dimension mismatch");
    if (k.kind == KernelKind::Linear) return dot(a, b);
    if (!(k.gamma > 0.0)) throw ArgumentError("kernel_eval: rbf gamma must be positive");
    return std::exp(-k.gamma * squared_distance(a, b));
}

double scale_gamma(const Matrix& x) {
    const auto vars = column_variances(x);
    double mean_var = 0.0;
    for (double v : vars) mean_var += v;
    mean_var /= static_cast<double>(vars.size());
    const double d = static_cast<double>(x.cols());
    return mean_var > 0.0 ? 1.0 / (d * mean_var) : 1.0 / d;
}

double BinarySvm::decision(std::span<const double> x) const {
    double f = -bias;
    for (std::size_t i = 0; i < support_vectors.rows(); ++i)
        f += dual_coefficients[i] * kernel_eval(kernel, support_vectors.row(i), x);
    return f;
}

namespace {

constexpr std::size_t kMaxPasses = 10000;
constexpr double kStepEps = 1e-12;

struct SmoState {
    const Matrix& x;
    const std::vector<int>& y;
    const KernelSpec& kernel;
    const double c;
    const double tol;
    std::size_t n;
    Matrix gram;
    std::vector<double> alpha;
    std::vector<double> error;  // f(x_i) - y_i, maintained for every point
    double bias = 0.0;

    SmoState(const Matrix& x_, const std::vector<int>& y_, const KernelSpec& k_, double c_, double tol_)
        : x(x_), y(y_), kernel(k_), c(c_), tol(tol_), n(x_.rows()), gram(n, n), alpha(n, 0.0), error(n) {
        for (std::size_t i = 0; i < n; ++i) {
            gram(i, i) = kernel_eval(kernel, x.row(i), x.row(i));
            for (std::size_t j = i + 1; j < n; ++j)
                gram(i, j) = gram(j, i) = kernel_eval(kernel, x.row(i), x.row(j));
            error[i] = -static_cast<double>(y[i]);
        }
    }

    bool non_bound(std::size_t i) const { return alpha[i] > 0.0 && alpha[i] < c; }

    bool violates_kkt(std::size_t i) const {
        const double r = error[i] * y[i];
        return (r < -tol && alpha[i] < c) || (r > tol && alpha[i] > 0.0);
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double a1_old = alpha[i1], a2_old = alpha[i2];
        const int y1 = y[i1], y2 = y[i2];
        const double e1 = error[i1], e2 = error[i2];
        const double s = static_cast<double>(y1 * y2);

        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2_old - a1_old);
            hi = std::min(c, c + a2_old - a1_old);
        } else {
            lo = std::max(0.0, a2_old + a1_old - c);
            hi = std::min(c, a2_old + a1_old);
        }
        if (lo >= hi) return false;

        const double k11 = gram(i1, i1), k12 = gram(i1, i2), k22 = gram(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;
        double a2;
        if (eta > 0.0) {
            a2 = std::clamp(a2_old + y2 * (e1 - e2) / eta, lo, hi);
        } else {
            // flat or concave direction: test both interval endpoints
            const double f1 = y1 * (e1 + bias) - a1_old * k11 - s * a2_old * k12;
            const double f2 = y2 * (e2 + bias) - s * a1_old * k12 - a2_old * k22;
            const double l1 = a1_old + s * (a2_old - lo);
            const double h1 = a1_old + s * (a2_old - hi);
            const double lo_obj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
            const double hi_obj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (lo_obj < hi_obj - kStepEps)
                a2 = lo;
            else if (lo_obj > hi_obj + kStepEps)
                a2 = hi;
            else
                a2 = a2_old;
        }
        if (std::abs(a2 - a2_old) < kStepEps * (a2 + a2_old + kStepEps)) return false;

        double a1 = a1_old + s * (a2_old - a2);
        if (a1 < 0.0) a1 = 0.0;
        if (a1 > c) a1 = c;

        const double d1 = y1 * (a1 - a1_old);
        const double d2 = y2 * (a2 - a2_old);
        const double b1 = e1 + d1 * k11 + d2 * k12 + bias;
        const double b2 = e2 + d1 * k12 + d2 * k22 + bias;
        double b_new;
        if (a1 > 0.0 && a1 < c)
            b_new = b1;
        else if (a2 > 0.0 && a2 < c)
            b_new = b2;
        else
            b_new = 0.5 * (b1 + b2);
        const double db = b_new - bias;

        for (std::size_t i = 0; i < n; ++i) error[i] += d1 * gram(i1, i) + d2 * gram(i2, i) - db;
        alpha[i1] = a1;
        alpha[i2] = a2;
        bias = b_new;
        return true;
    }

    bool examine(std::size_t i2) {
        if (!violates_kkt(i2)) return false;
        const double e2 = error[i2];

        // largest |E1 - E2| among non-bound points first
        std::size_t best = n;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!non_bound(i)) continue;
            const double gap = std::abs(error[i] - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < n && take_step(best, i2)) return true;
        for (std::size_t i = 0; i < n; ++i)
            if (non_bound(i) && take_step(i, i2)) return true;
        for (std::size_t i = 0; i < n; ++i)
            if (take_step(i, i2)) return true;
        return false;
    }
};

}  // namespace

BinarySvm smo_train_binary(const Matrix& x, const std::vector<int>& y, const KernelSpec& k,
                           double c, double tol) {
    if (x.rows() != y.size() || x.rows() == 0) throw ArgumentError("smo_train_binary: row/label mismatch");
    if (!(c > 0.0)) throw ArgumentError("smo_train_binary: c must be positive");
    if (!(tol > 0.0)) throw ArgumentError("smo_train_binary: tol must be positive");
    bool has_pos = false, has_neg = false;
    for (int v : y) {
        if (v == 1)
            has_pos = true;
        else if (v == -1)
            has_neg = true;
        else
            throw ArgumentError("smo_train_binary: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw DegenerateClassError("smo_train_binary: both labels must be present");

    SmoState st(x, y, k, c, tol);
    std::size_t passes = 0;
    std::size_t changed = 0;
    bool examine_all = true;
    while ((changed > 0 || examine_all) && passes < kMaxPasses) {
        ++passes;
        changed = 0;
        if (examine_all) {
            for (std::size_t i = 0; i < st.n; ++i) changed += st.examine(i) ? 1 : 0;
        } else {
            for (std::size_t i = 0; i < st.n; ++i)
                if (st.non_bound(i)) changed += st.examine(i) ? 1 : 0;
        }
        if (examine_all)
            examine_all = false;
        else if (changed == 0)
            examine_all = true;
    }

    BinarySvm m;
    m.kernel = k;
    m.bias = st.bias;
    m.converged = passes < kMaxPasses;
    if (!m.converged)
        for (std::size_t i = 0; i < st.n; ++i) m.violation_count += st.violates_kkt(i) ? 1 : 0;

    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < st.n; ++i)
        if (st.alpha[i] > 1e-12) sv.push_back(i);
    if (sv.empty()) throw TrainingError("smo_train_binary: no support vectors after training");
    m.support_vectors = Matrix(sv.size(), x.cols());
    m.dual_coefficients.resize(sv.size());
    for (std::size_t r = 0; r < sv.size(); ++r) {
        const auto src = x.row(sv[r]);
        std::copy(src.begin(), src.end(), m.support_vectors.row(r).begin());
        m.dual_coefficients[r] = st.alpha[sv[r]] * y[sv[r]];
    }
    return m;
}

SvmModel svm_fit(const Matrix& x, const std::vector<ClassLabel>& y, const KernelSpec& k,
                 double c, double tol) {
    if (x.rows() != y.size()) throw ArgumentError("svm_fit: row/label mismatch");
    std::array<std::vector<std::size_t>, 3> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) by_class[class_index(y[i])].push_back(i);

    SvmModel model;
    for (int ci = 0; ci < kClassCount; ++ci)
        if (!by_class[ci].empty()) model.classes.push_back(class_from_index(ci));
    if (model.classes.size() < 2) throw DegenerateClassError("svm_fit: need at least 2 classes");

    for (std::size_t a = 0; a < model.classes.size(); ++a) {
        for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
            const ClassLabel lo = model.classes[a], hi = model.classes[b];
            const auto& ra = by_class[class_index(lo)];
            const auto& rb = by_class[class_index(hi)];
            Matrix sub(ra.size() + rb.size(), x.cols());
            std::vector<int> labels(sub.rows());
            std::vector<std::size_t> order;
            order.reserve(sub.rows());
            order.insert(order.end(), ra.begin(), ra.end());
            order.insert(order.end(), rb.begin(), rb.end());
            std::sort(order.begin(), order.end());  // original row order keeps SMO deterministic
            for (std::size_t r = 0; r < order.size(); ++r) {
                const auto src = x.row(order[r]);
                std::copy(src.begin(), src.end(), sub.row(r).begin());
                labels[r] = y[order[r]] == lo ? 1 : -1;
            }
            model.pairs.emplace_back(lo, hi);
            model.machines.push_back(smo_train_binary(sub, labels, k, c, tol));
        }
    }
    return model;
}

std::vector<ClassLabel> svm_predict(const SvmModel& m, const Matrix& x) {
    std::vector<ClassLabel> out;
    out.reserve(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::array<int, 3> votes{};
        for (std::size_t p = 0; p < m.pairs.size(); ++p) {
            const auto [lo, hi] = m.pairs[p];
            const ClassLabel win = m.machines[p].decision(x.row(r)) >= 0.0 ? lo : hi;
            ++votes[class_index(win)];
        }
        int best = 0;
        for (int c = 1; c < kClassCount; ++c)
            if (votes[c] > votes[best]) best = c;
        out.push_back(class_from_index(best));
    }
    return out;
}

}  // namespace ctgml

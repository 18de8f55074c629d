#include "ctgml/tabnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "ctgml/errors.hpp"
#include "ctgml/tape.hpp"

namespace ctgml {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kEntropyEps = 1e-15;
constexpr int kLogits = 3;

template <class Params, class F>
void visit_tensors(Params& p, F&& f) {
    for (auto& g : p.shared) {
        f(g.w);
        f(g.b);
        for (auto& bn : g.bn) {
            f(bn.gamma);
            f(bn.beta);
        }
    }
    for (auto& step : p.per_step)
        for (auto& g : step) {
            f(g.w);
            f(g.b);
            f(g.bn.gamma);
            f(g.bn.beta);
        }
    for (auto& a : p.attentive) {
        f(a.w);
        f(a.b);
        f(a.bn.gamma);
        f(a.bn.beta);
    }
    f(p.head_w);
    f(p.head_b);
}

void update_running(BnLayer& bn, const std::vector<double>& mean, const std::vector<double>& var,
                    double momentum) {
    for (std::size_t j = 0; j < mean.size(); ++j) {
        bn.running_mean[j] = momentum * bn.running_mean[j] + (1.0 - momentum) * mean[j];
        bn.running_var[j] = momentum * bn.running_var[j] + (1.0 - momentum) * var[j];
    }
}

struct LayerIds {
    Tape::Id w = 0, b = 0, gamma = 0, beta = 0;
};

struct GraphIds {
    std::vector<Tape::Id> flat;                    // visit_tensors order
    std::vector<std::vector<LayerIds>> shared;     // [block][use]; w/b ids repeat per use
    std::vector<std::vector<LayerIds>> per_step;
    std::vector<LayerIds> attentive;
    Tape::Id head_w = 0, head_b = 0;
};

struct GraphOutputs {
    Tape::Id logits = 0;
    Tape::Id penalty = 0;  // mean over steps and batch
    std::vector<Tape::Id> masks;
    std::vector<Tape::Id> decisions;
};

// May mutate running statistics (train mode); const_cast guarded by `train`.
struct GraphBuilder {
    Tape& tape;
    TabNetParams& params;
    const TabNetConfig& cfg;
    const bool train;
    GraphIds ids;

    GraphBuilder(Tape& t, TabNetParams& p, const TabNetConfig& c, bool tr)
        : tape(t), params(p), cfg(c), train(tr) {
        visit_tensors(params, [&](Matrix& m) { ids.flat.push_back(tape.leaf(m)); });
        std::size_t i = 0;
        auto next4 = [&] {
            LayerIds l{ids.flat[i], ids.flat[i + 1], ids.flat[i + 2], ids.flat[i + 3]};
            i += 4;
            return l;
        };
        ids.shared.resize(params.shared.size());
        for (std::size_t k = 0; k < params.shared.size(); ++k) {
            const Tape::Id w = ids.flat[i];
            const Tape::Id b = ids.flat[i + 1];
            i += 2;
            for (std::size_t u = 0; u < params.shared[k].bn.size(); ++u) {
                ids.shared[k].push_back(LayerIds{w, b, ids.flat[i], ids.flat[i + 1]});
                i += 2;
            }
        }
        ids.per_step.resize(params.per_step.size());
        for (std::size_t s = 0; s < params.per_step.size(); ++s)
            for (std::size_t k = 0; k < params.per_step[s].size(); ++k)
                ids.per_step[s].push_back(next4());
        for (std::size_t s = 0; s < params.attentive.size(); ++s) ids.attentive.push_back(next4());
        ids.head_w = ids.flat[i];
        ids.head_b = ids.flat[i + 1];
    }

    Tape::Id batchnorm(Tape::Id in, BnLayer& bn, const LayerIds& l) {
        Tape::Id core;
        if (train) {
            std::vector<double> mean, var;
            core = tape.batchnorm_train(in, kBnEps, &mean, &var);
            update_running(bn, mean, var, cfg.bn_momentum);
        } else {
            core = tape.batchnorm_eval(in, kBnEps, bn.running_mean, bn.running_var);
        }
        return tape.add_row(tape.mul_row(core, l.gamma), l.beta);
    }

    Tape::Id glu(Tape::Id in, BnLayer& bn, const LayerIds& l) {
        Tape::Id t = tape.add_row(tape.matmul(in, l.w), l.b);
        t = batchnorm(t, bn, l);
        const std::size_t h = tape.value(l.w).cols() / 2;
        return tape.hadamard(tape.slice_cols(t, 0, h), tape.sigmoid(tape.slice_cols(t, h, h)));
    }

    Tape::Id residual(Tape::Id acc, Tape::Id blk_out) {
        return tape.linear_const(tape.add(acc, blk_out), std::sqrt(0.5), 0.0);
    }

    // `use` 0 is the initial attention stack, 1 + s is decision step s.
    Tape::Id shared_stack(Tape::Id in, std::size_t use) {
        Tape::Id h = glu(in, params.shared[0].bn[use], ids.shared[0][use]);
        for (std::size_t k = 1; k < params.shared.size(); ++k)
            h = residual(h, glu(h, params.shared[k].bn[use], ids.shared[k][use]));
        return h;
    }

    Tape::Id transformer(Tape::Id in, std::size_t step) {
        Tape::Id h = shared_stack(in, step + 1);
        for (std::size_t k = 0; k < params.per_step[step].size(); ++k)
            h = residual(h, glu(h, params.per_step[step][k].bn, ids.per_step[step][k]));
        return h;
    }

    GraphOutputs build(const Matrix& x) {
        const std::size_t n = x.rows();
        const std::size_t d = params.d_in;
        if (x.cols() != d) throw SchemaError("tabnet_forward: feature width mismatch");

        Tape::Id x_in = tape.leaf(x);
        Tape::Id x_bn;
        if (train) {
            std::vector<double> mean, var;
            x_bn = tape.batchnorm_train(x_in, kBnEps, &mean, &var);
            for (std::size_t j = 0; j < d; ++j) {
                params.input_mean[j] = cfg.bn_momentum * params.input_mean[j] + (1.0 - cfg.bn_momentum) * mean[j];
                params.input_var[j] = cfg.bn_momentum * params.input_var[j] + (1.0 - cfg.bn_momentum) * var[j];
            }
        } else {
            x_bn = tape.batchnorm_eval(x_in, kBnEps, params.input_mean, params.input_var);
        }

        GraphOutputs out;
        Tape::Id attention = tape.slice_cols(shared_stack(x_bn, 0), cfg.n_d, cfg.n_a);
        Tape::Id prior = tape.leaf(Matrix(n, d, 1.0));
        Tape::Id entropy_acc = 0;
        Tape::Id decision_sum = 0;

        for (std::size_t s = 0; s < cfg.n_steps; ++s) {
            auto& att = params.attentive[s];
            Tape::Id z = tape.add_row(tape.matmul(attention, ids.attentive[s].w), ids.attentive[s].b);
            z = batchnorm(z, att.bn, ids.attentive[s]);
            z = tape.hadamard(z, prior);
            Tape::Id mask = tape.sparsemax_rows(z);
            out.masks.push_back(mask);

            Tape::Id ent = tape.entropy_sum(mask, kEntropyEps);
            entropy_acc = s == 0 ? ent : tape.add(entropy_acc, ent);
            prior = tape.hadamard(prior, tape.linear_const(mask, -1.0, cfg.gamma));

            Tape::Id h = transformer(tape.hadamard(mask, x_bn), s);
            Tape::Id dec = tape.relu(tape.slice_cols(h, 0, cfg.n_d));
            out.decisions.push_back(dec);
            decision_sum = s == 0 ? dec : tape.add(decision_sum, dec);
            attention = tape.slice_cols(h, cfg.n_d, cfg.n_a);
        }

        out.logits = tape.add_row(tape.matmul(decision_sum, ids.head_w), ids.head_b);
        out.penalty = tape.linear_const(
            entropy_acc, 1.0 / (static_cast<double>(cfg.n_steps) * static_cast<double>(n)), 0.0);
        if (!tape.value(out.logits).all_finite())
            throw NumericError("tabnet_forward: non-finite logits");
        return out;
    }
};

ForwardTrace extract_trace(const Tape& tape, const GraphOutputs& g) {
    ForwardTrace t;
    t.logits = tape.value(g.logits);
    for (Tape::Id m : g.masks) t.masks.push_back(tape.value(m));
    for (Tape::Id d : g.decisions) t.decisions.push_back(tape.value(d));
    t.sparsity_penalty = tape.value(g.penalty)(0, 0);
    return t;
}

Matrix xavier(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    const double sd = std::sqrt(2.0 / static_cast<double>(rows + cols));
    for (double& v : m.data()) v = sd * rng.normal();
    return m;
}

BnLayer make_bn(std::size_t width) {
    BnLayer bn;
    bn.gamma = Matrix(1, width, 1.0);
    bn.beta = Matrix(1, width);
    bn.running_mean.assign(width, 0.0);
    bn.running_var.assign(width, 1.0);
    return bn;
}

GluBlock make_glu(std::size_t in, std::size_t width, Rng& rng) {
    GluBlock g;
    g.w = xavier(in, 2 * width, rng);
    g.b = Matrix(1, 2 * width);
    g.bn = make_bn(2 * width);
    return g;
}

SharedGluBlock make_shared_glu(std::size_t in, std::size_t width, std::size_t uses, Rng& rng) {
    SharedGluBlock g;
    g.w = xavier(in, 2 * width, rng);
    g.b = Matrix(1, 2 * width);
    g.bn.assign(uses, make_bn(2 * width));
    return g;
}

std::vector<int> to_targets(const std::vector<ClassLabel>& y) {
    std::vector<int> t;
    t.reserve(y.size());
    for (ClassLabel c : y) t.push_back(class_index(c));
    return t;
}

}  // namespace

void TabNetConfig::validate() const {
    if (n_steps < 1) throw ArgumentError("tabnet: n_steps must be >= 1");
    if (n_d < 1 || n_a < 1) throw ArgumentError("tabnet: widths must be >= 1");
    if (!(gamma >= 1.0)) throw ArgumentError("tabnet: gamma must be >= 1");
    if (lambda < 0.0) throw ArgumentError("tabnet: lambda must be >= 0");
    if (batch_size < 2) throw ArgumentError("tabnet: batch size must be >= 2");
    if (!(learning_rate > 0.0)) throw ArgumentError("tabnet: learning rate must be positive");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ArgumentError("tabnet: lr decay outside (0, 1]");
    if (epochs < 1) throw ArgumentError("tabnet: epochs must be >= 1");
    if (val_fraction < 0.0 || val_fraction >= 1.0) throw ArgumentError("tabnet: val fraction outside [0, 1)");
    if (!(bn_momentum >= 0.0 && bn_momentum < 1.0)) throw ArgumentError("tabnet: bn momentum outside [0, 1)");
}

TabNetParams tabnet_init(std::size_t d_in, const TabNetConfig& cfg, Rng& rng) {
    cfg.validate();
    if (d_in < 1) throw ArgumentError("tabnet_init: need at least one feature");
    const std::size_t h = cfg.n_d + cfg.n_a;

    TabNetParams p;
    p.d_in = d_in;
    p.input_mean.assign(d_in, 0.0);
    p.input_var.assign(d_in, 1.0);
    p.shared.push_back(make_shared_glu(d_in, h, cfg.n_steps + 1, rng));
    p.shared.push_back(make_shared_glu(h, h, cfg.n_steps + 1, rng));
    p.per_step.resize(cfg.n_steps);
    for (auto& step : p.per_step) {
        step.push_back(make_glu(h, h, rng));
        step.push_back(make_glu(h, h, rng));
    }
    p.attentive.resize(cfg.n_steps);
    for (auto& a : p.attentive) {
        a.w = xavier(cfg.n_a, d_in, rng);
        a.b = Matrix(1, d_in);
        a.bn = make_bn(d_in);
    }
    p.head_w = xavier(cfg.n_d, kLogits, rng);
    p.head_b = Matrix(1, kLogits);
    return p;
}

ForwardTrace tabnet_forward(const Matrix& x, TabNetParams& params, const TabNetConfig& cfg, bool train) {
    Tape tape;
    GraphBuilder builder(tape, params, cfg, train);
    return extract_trace(tape, builder.build(x));
}

ForwardTrace tabnet_forward(const Matrix& x, const TabNetParams& params, const TabNetConfig& cfg) {
    return tabnet_forward(x, const_cast<TabNetParams&>(params), cfg, false);
}

double tabnet_loss(const ForwardTrace& trace, const std::vector<ClassLabel>& y, double lambda) {
    const Matrix& z = trace.logits;
    if (z.rows() != y.size()) throw ArgumentError("tabnet_loss: label count mismatch");
    double total = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) {
        double zmax = z(r, 0);
        for (std::size_t j = 1; j < z.cols(); ++j) zmax = std::max(zmax, z(r, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < z.cols(); ++j) sum += std::exp(z(r, j) - zmax);
        total += std::log(sum) + zmax - z(r, static_cast<std::size_t>(class_index(y[r])));
    }
    return total / static_cast<double>(z.rows()) + lambda * trace.sparsity_penalty;
}

namespace {

struct AdamState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    std::size_t t = 0;
};

AdamState adam_init(TabNetParams& p) {
    AdamState s;
    visit_tensors(p, [&](Matrix& w) {
        s.m.emplace_back(w.rows(), w.cols());
        s.v.emplace_back(w.rows(), w.cols());
    });
    return s;
}

void adam_step(TabNetParams& p, const Tape& tape, const GraphIds& ids, AdamState& adam, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++adam.t;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(adam.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(adam.t));
    std::size_t i = 0;
    visit_tensors(p, [&](Matrix& w) {
        const Matrix& g = tape.grad(ids.flat[i]);
        Matrix& m = adam.m[i];
        Matrix& v = adam.v[i];
        for (std::size_t k = 0; k < w.data().size(); ++k) {
            const double gk = g.data()[k];
            m.data()[k] = b1 * m.data()[k] + (1.0 - b1) * gk;
            v.data()[k] = b2 * v.data()[k] + (1.0 - b2) * gk * gk;
            w.data()[k] -= lr * (m.data()[k] / c1) / (std::sqrt(v.data()[k] / c2) + eps);
        }
        ++i;
    });
}

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), x.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = x.row(rows[r]);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

std::vector<ClassLabel> argmax_labels(const Matrix& logits) {
    std::vector<ClassLabel> out;
    out.reserve(logits.rows());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j)
            if (logits(r, j) > logits(r, best)) best = j;
        out.push_back(class_from_index(static_cast<int>(best)));
    }
    return out;
}

}  // namespace

TabNetFitResult tabnet_fit(const Matrix& x, const std::vector<ClassLabel>& y, const TabNetConfig& cfg) {
    cfg.validate();
    const std::size_t n = x.rows();
    if (n != y.size() || n < 2) throw ArgumentError("tabnet_fit: need matching features and labels");

    Rng rng(cfg.seed);
    TabNetParams params = tabnet_init(x.cols(), cfg, rng);

    std::vector<std::size_t> index(n);
    std::iota(index.begin(), index.end(), std::size_t{0});
    rng.shuffle(index);
    const std::size_t n_val = cfg.val_fraction > 0.0
                                  ? static_cast<std::size_t>(std::floor(cfg.val_fraction * static_cast<double>(n)))
                                  : 0;
    std::vector<std::size_t> val_idx(index.begin(), index.begin() + n_val);
    std::vector<std::size_t> train_idx(index.begin() + n_val, index.end());
    if (train_idx.size() < 2) throw ArgumentError("tabnet_fit: too few training rows after validation split");

    Matrix val_x;
    std::vector<ClassLabel> val_y;
    if (n_val > 0) {
        val_x = gather_rows(x, val_idx);
        for (std::size_t r : val_idx) val_y.push_back(y[r]);
    }

    AdamState adam = adam_init(params);
    TabNetFitResult result;
    double best_val_loss = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.learning_rate * std::pow(cfg.lr_decay, static_cast<double>(epoch));
        rng.shuffle(train_idx);

        double loss_sum = 0.0;
        std::size_t loss_rows = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, train_idx.size() - start);
            if (count < 2) continue;  // batch statistics need at least 2 rows
            const std::span<const std::size_t> rows(train_idx.data() + start, count);
            Matrix bx = gather_rows(x, rows);
            std::vector<int> targets;
            targets.reserve(count);
            for (std::size_t r : rows) targets.push_back(class_index(y[r]));

            Tape tape;
            GraphBuilder builder(tape, params, cfg, true);
            GraphOutputs g = builder.build(bx);
            Tape::Id ce = tape.softmax_cross_entropy(g.logits, targets);
            Tape::Id loss = tape.add(ce, tape.linear_const(g.penalty, cfg.lambda, 0.0));
            const double loss_value = tape.value(loss)(0, 0);
            if (!std::isfinite(loss_value))
                throw TrainingError("tabnet_fit: non-finite loss at epoch " + std::to_string(epoch + 1));
            tape.backward(loss);
            adam_step(params, tape, builder.ids, adam, lr);

            loss_sum += loss_value * static_cast<double>(count);
            loss_rows += count;
        }

        TrainLogEntry entry;
        entry.epoch = epoch + 1;
        entry.train_loss = loss_rows > 0 ? loss_sum / static_cast<double>(loss_rows) : 0.0;
        entry.val_accuracy = std::numeric_limits<double>::quiet_NaN();

        if (n_val > 0) {
            const ForwardTrace trace = tabnet_forward(val_x, params, cfg, false);
            const auto pred = argmax_labels(trace.logits);
            std::size_t hits = 0;
            for (std::size_t i = 0; i < pred.size(); ++i)
                if (pred[i] == val_y[i]) ++hits;
            entry.val_accuracy = 100.0 * static_cast<double>(hits) / static_cast<double>(pred.size());

            // stop on the validation loss, not the logged accuracy: the slice is
            // small, so accuracy moves in coarse jumps while the loss still says
            // whether fitting is progressing; keep the current weights
            const double val_loss = tabnet_loss(trace, val_y, 0.0);
            if (val_loss < best_val_loss) {
                best_val_loss = val_loss;
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                result.log.push_back(entry);
                break;
            }
        }
        result.log.push_back(entry);
    }

    result.params = std::move(params);
    return result;
}

std::vector<ClassLabel> tabnet_predict(const TabNetParams& params, const TabNetConfig& cfg, const Matrix& x) {
    return argmax_labels(tabnet_forward(x, params, cfg).logits);
}

std::vector<double> flatten_tabnet_params(const TabNetParams& params) {
    std::vector<double> flat;
    visit_tensors(params, [&](const Matrix& m) { flat.insert(flat.end(), m.data().begin(), m.data().end()); });
    return flat;
}

void assign_tabnet_params(TabNetParams& params, std::span<const double> flat) {
    std::size_t pos = 0;
    visit_tensors(params, [&](Matrix& m) {
        if (pos + m.data().size() > flat.size()) throw ArgumentError("assign_tabnet_params: vector too short");
        std::copy(flat.begin() + pos, flat.begin() + pos + m.data().size(), m.data().begin());
        pos += m.data().size();
    });
    if (pos != flat.size()) throw ArgumentError("assign_tabnet_params: vector length mismatch");
}

double tabnet_loss_gradient(const Matrix& x, const std::vector<ClassLabel>& y, TabNetParams& params,
                            const TabNetConfig& cfg, std::vector<double>* grad) {
    Tape tape;
    GraphBuilder builder(tape, params, cfg, true);
    GraphOutputs g = builder.build(x);
    Tape::Id ce = tape.softmax_cross_entropy(g.logits, to_targets(y));
    Tape::Id loss = tape.add(ce, tape.linear_const(g.penalty, cfg.lambda, 0.0));
    const double value = tape.value(loss)(0, 0);
    if (grad) {
        tape.backward(loss);
        grad->clear();
        for (Tape::Id id : builder.ids.flat) {
            const Matrix& gm = tape.grad(id);
            grad->insert(grad->end(), gm.data().begin(), gm.data().end());
        }
    }
    return value;
}

Matrix feature_importance(const ForwardTrace& trace, std::vector<std::string>* warnings) {
    if (trace.masks.empty()) throw ArgumentError("feature_importance: empty trace");
    const std::size_t n = trace.masks[0].rows();
    const std::size_t d = trace.masks[0].cols();
    Matrix agg(n, d);
    for (std::size_t s = 0; s < trace.masks.size(); ++s) {
        const Matrix& mask = trace.masks[s];
        const Matrix& dec = trace.decisions[s];
        for (std::size_t r = 0; r < n; ++r) {
            double eta = 0.0;
            for (std::size_t j = 0; j < dec.cols(); ++j) eta += dec(r, j);
            for (std::size_t j = 0; j < d; ++j) agg(r, j) += eta * mask(r, j);
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        double sum = 0.0;
        for (std::size_t j = 0; j < d; ++j) sum += agg(r, j);
        if (sum > 0.0) {
            for (std::size_t j = 0; j < d; ++j) agg(r, j) /= sum;
        } else {
            if (warnings)
                warnings->push_back("feature_importance: all-zero aggregate for row " + std::to_string(r) +
                                    ", returning uniform");
            for (std::size_t j = 0; j < d; ++j) agg(r, j) = 1.0 / static_cast<double>(d);
        }
    }
    return agg;
}

namespace {

void write_matrix(std::ostream& out, const char* name, const Matrix& m) {
    out << "tensor " << name << " " << m.rows() << " " << m.cols() << "\n";
    char buf[32];
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            out << (c ? " " : "") << buf;
        }
        out << "\n";
    }
}

void write_stats(std::ostream& out, const char* name, const std::vector<double>& mean,
                 const std::vector<double>& var) {
    out << "stats " << name << " " << mean.size() << "\n";
    char buf[32];
    auto line = [&](const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", v[i]);
            out << (i ? " " : "") << buf;
        }
        out << "\n";
    };
    line(mean);
    line(var);
}

Matrix read_matrix(std::istream& in, const std::string& path) {
    std::string tag, name;
    std::size_t rows = 0, cols = 0;
    if (!(in >> tag >> name >> rows >> cols) || tag != "tensor")
        throw ParseError(path + ": expected tensor record");
    Matrix m(rows, cols);
    for (double& v : m.data())
        if (!(in >> v)) throw ParseError(path + ": truncated tensor " + name);
    return m;
}

void read_stats(std::istream& in, const std::string& path, std::vector<double>& mean,
                std::vector<double>& var) {
    std::string tag, name;
    std::size_t width = 0;
    if (!(in >> tag >> name >> width) || tag != "stats")
        throw ParseError(path + ": expected stats record");
    mean.resize(width);
    var.resize(width);
    for (double& v : mean)
        if (!(in >> v)) throw ParseError(path + ": truncated stats " + name);
    for (double& v : var)
        if (!(in >> v)) throw ParseError(path + ": truncated stats " + name);
}

void write_glu(std::ostream& out, const GluBlock& g) {
    write_matrix(out, "w", g.w);
    write_matrix(out, "b", g.b);
    write_matrix(out, "bn_gamma", g.bn.gamma);
    write_matrix(out, "bn_beta", g.bn.beta);
    write_stats(out, "bn", g.bn.running_mean, g.bn.running_var);
}

GluBlock read_glu(std::istream& in, const std::string& path) {
    GluBlock g;
    g.w = read_matrix(in, path);
    g.b = read_matrix(in, path);
    g.bn.gamma = read_matrix(in, path);
    g.bn.beta = read_matrix(in, path);
    read_stats(in, path, g.bn.running_mean, g.bn.running_var);
    return g;
}

void write_shared_glu(std::ostream& out, const SharedGluBlock& g) {
    write_matrix(out, "w", g.w);
    write_matrix(out, "b", g.b);
    for (const auto& bn : g.bn) {
        write_matrix(out, "bn_gamma", bn.gamma);
        write_matrix(out, "bn_beta", bn.beta);
        write_stats(out, "bn", bn.running_mean, bn.running_var);
    }
}

SharedGluBlock read_shared_glu(std::istream& in, const std::string& path, std::size_t uses) {
    SharedGluBlock g;
    g.w = read_matrix(in, path);
    g.b = read_matrix(in, path);
    g.bn.resize(uses);
    for (auto& bn : g.bn) {
        bn.gamma = read_matrix(in, path);
        bn.beta = read_matrix(in, path);
        read_stats(in, path, bn.running_mean, bn.running_var);
    }
    return g;
}

}  // namespace

void save_tabnet_params(const TabNetParams& params, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "tabnet 1\n";
    out << "shape " << params.d_in << " " << params.per_step.size() << " " << params.head_w.rows()
        << " " << (params.attentive.empty() ? std::size_t{0} : params.attentive[0].w.rows()) << "\n";
    write_stats(out, "input", params.input_mean, params.input_var);
    for (const auto& g : params.shared) write_shared_glu(out, g);
    for (const auto& step : params.per_step)
        for (const auto& g : step) write_glu(out, g);
    for (const auto& a : params.attentive) {
        write_matrix(out, "w", a.w);
        write_matrix(out, "b", a.b);
        write_matrix(out, "bn_gamma", a.bn.gamma);
        write_matrix(out, "bn_beta", a.bn.beta);
        write_stats(out, "bn", a.bn.running_mean, a.bn.running_var);
    }
    write_matrix(out, "head_w", params.head_w);
    write_matrix(out, "head_b", params.head_b);
    if (!out) throw IoError("failed writing " + path.string());
}

TabNetParams load_tabnet_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    const std::string p = path.string();
    std::string tag;
    int version = 0;
    if (!(in >> tag >> version) || tag != "tabnet" || version != 1)
        throw ParseError(p + ": not a tabnet parameter file");
    std::size_t d_in = 0, n_steps = 0, n_d = 0, n_a = 0;
    if (!(in >> tag >> d_in >> n_steps >> n_d >> n_a) || tag != "shape")
        throw ParseError(p + ": bad shape record");

    TabNetParams params;
    params.d_in = d_in;
    read_stats(in, p, params.input_mean, params.input_var);
    params.shared.push_back(read_shared_glu(in, p, n_steps + 1));
    params.shared.push_back(read_shared_glu(in, p, n_steps + 1));
    params.per_step.resize(n_steps);
    for (auto& step : params.per_step) {
        step.push_back(read_glu(in, p));
        step.push_back(read_glu(in, p));
    }
    params.attentive.resize(n_steps);
    for (auto& a : params.attentive) {
        a.w = read_matrix(in, p);
        a.b = read_matrix(in, p);
        a.bn.gamma = read_matrix(in, p);
        a.bn.beta = read_matrix(in, p);
        read_stats(in, p, a.bn.running_mean, a.bn.running_var);
    }
    params.head_w = read_matrix(in, p);
    params.head_b = read_matrix(in, p);
    return params;
}

void write_training_log(const std::vector<TrainLogEntry>& log, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "epoch,train_loss,val_accuracy\n";
    char buf[64];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,", e.epoch, e.train_loss);
        out << buf;
        if (std::isfinite(e.val_accuracy)) {
            std::snprintf(buf, sizeof buf, "%.2f", e.val_accuracy);
            out << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace ctgml

// Python face of the toolkit. Rows travel as plain lists of floats and labels
// as the 1/2/3 class codes, so the module works without any array library.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctgml/dataset.hpp"
#include "ctgml/dimred.hpp"
#include "ctgml/errors.hpp"
#include "ctgml/forest.hpp"
#include "ctgml/matrix.hpp"
#include "ctgml/metrics.hpp"
#include "ctgml/runner.hpp"
#include "ctgml/svm.hpp"
#include "ctgml/synth.hpp"
#include "ctgml/tabnet.hpp"
#include "ctgml/tape.hpp"

namespace py = pybind11;
using namespace ctgml;

namespace {

using Rows = std::vector<std::vector<double>>;

Matrix to_matrix(const Rows& rows) {
    if (rows.empty()) throw ArgumentError("expected at least one row");
    const std::size_t cols = rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw ArgumentError("rows must have equal length");
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

Rows to_rows(const Matrix& m) {
    Rows rows(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
    return rows;
}

std::vector<ClassLabel> to_labels(const std::vector<int>& codes) {
    std::vector<ClassLabel> labels;
    labels.reserve(codes.size());
    for (const int code : codes) labels.push_back(class_from_code(code));
    return labels;
}

std::vector<int> from_labels(const std::vector<ClassLabel>& labels) {
    std::vector<int> codes;
    codes.reserve(labels.size());
    for (const ClassLabel label : labels) codes.push_back(static_cast<int>(label));
    return codes;
}

Dataset to_dataset(const Rows& features, const std::vector<int>& labels) {
    if (features.size() != labels.size())
        throw ArgumentError("feature rows and labels must have the same length");
    Dataset d;
    d.features = to_matrix(features);
    if (d.features.cols() != kFeatureCount)
        throw ArgumentError("expected the " + std::to_string(kFeatureCount) + " canonical features");
    d.labels = to_labels(labels);
    d.feature_names.assign(canonical_feature_names().begin(), canonical_feature_names().end());
    return d;
}

py::tuple dataset_tuple(const Dataset& d) {
    return py::make_tuple(to_rows(d.features), from_labels(d.labels));
}

KernelSpec make_kernel(const std::string& kernel, double gamma, const Matrix& x) {
    KernelSpec spec;
    if (kernel == "linear") {
        spec.kind = KernelKind::Linear;
    } else if (kernel == "rbf") {
        spec.kind = KernelKind::Rbf;
        spec.gamma = gamma > 0.0 ? gamma : scale_gamma(x);
    } else {
        throw ArgumentError("kernel must be 'rbf' or 'linear'");
    }
    return spec;
}

}  // namespace

PYBIND11_MODULE(_ctgml, m) {
    m.doc() = "Cardiotocography classification toolkit";

    py::register_exception<Error>(m, "ToolkitError", PyExc_RuntimeError);

    m.def("feature_names", [] {
        const auto& names = canonical_feature_names();
        return std::vector<std::string>(names.begin(), names.end());
    });

    m.def(
        "synthesize",
        [](std::size_t rows, std::uint64_t seed) { return dataset_tuple(synthesize_ctg(rows, seed)); },
        py::arg("rows"), py::arg("seed") = 7, "Synthetic recordings as (features, labels).");

    m.def(
        "load_csv",
        [](const std::string& path) { return dataset_tuple(load_csv(path)); }, py::arg("path"),
        "Loads the 21-feature CSV as (features, labels).");

    m.def(
        "stratified_split",
        [](const Rows& features, const std::vector<int>& labels, double fraction,
           std::uint64_t seed) {
            const SplitResult split = stratified_split(to_dataset(features, labels), fraction, seed);
            return py::make_tuple(to_rows(split.train.features), from_labels(split.train.labels),
                                  to_rows(split.test.features), from_labels(split.test.labels));
        },
        py::arg("features"), py::arg("labels"), py::arg("fraction"), py::arg("seed") = 1,
        "Per-class split into (train_x, train_y, test_x, test_y).");

    m.def(
        "standardize",
        [](const Rows& train, const Rows& others) {
            Dataset d;
            d.features = to_matrix(train);
            // scaling never reads labels, but Dataset rows always carry one
            d.labels.assign(d.features.rows(), ClassLabel::Normal);
            const Scaler scaler = fit_scaler(d);
            return py::make_tuple(to_rows(apply_scaler(scaler, d.features)),
                                  to_rows(apply_scaler(scaler, to_matrix(others))));
        },
        py::arg("train"), py::arg("others"),
        "Zero-mean unit-variance transform fitted on train, applied to both.");

    m.def(
        "correlation",
        [](const Rows& features, const std::vector<int>& labels) {
            return to_rows(pearson_correlation(to_dataset(features, labels)).values);
        },
        py::arg("features"), py::arg("labels"), "Pearson coefficients over all feature pairs.");

    m.def(
        "pca",
        [](const Rows& train, const Rows& others, std::size_t components) {
            const Matrix x = to_matrix(train);
            const Projection p = pca_fit(x, components);
            return py::make_tuple(to_rows(project(p, x)), to_rows(project(p, to_matrix(others))),
                                  p.explained);
        },
        py::arg("train"), py::arg("others"), py::arg("components") = 2,
        "(train_z, others_z, explained_variance_fractions).");

    m.def(
        "lda",
        [](const Rows& train, const std::vector<int>& labels, const Rows& others,
           std::size_t components) {
            const Matrix x = to_matrix(train);
            const Projection p = lda_fit(x, to_labels(labels), components);
            return py::make_tuple(to_rows(project(p, x)), to_rows(project(p, to_matrix(others))));
        },
        py::arg("train"), py::arg("labels"), py::arg("others"), py::arg("components") = 2,
        "Supervised projection: (train_z, others_z).");

    m.def(
        "svm_fit_predict",
        [](const Rows& train, const std::vector<int>& labels, const Rows& test,
           const std::string& kernel, double c, double gamma, double tol) {
            const Matrix x = to_matrix(train);
            const SvmModel model = svm_fit(x, to_labels(labels), make_kernel(kernel, gamma, x), c, tol);
            return from_labels(svm_predict(model, to_matrix(test)));
        },
        py::arg("train"), py::arg("labels"), py::arg("test"), py::arg("kernel") = "rbf",
        py::arg("c") = 1.0, py::arg("gamma") = 0.0, py::arg("tol") = 1e-3,
        "One-vs-one margin classifier; gamma 0 uses the scale heuristic.");

    m.def(
        "forest_fit_predict",
        [](const Rows& train, const std::vector<int>& labels, const Rows& test, std::size_t trees,
           std::uint64_t seed) {
            const ForestModel model = forest_fit(to_matrix(train), to_labels(labels), trees, 0, seed);
            return from_labels(forest_predict(model, to_matrix(test)));
        },
        py::arg("train"), py::arg("labels"), py::arg("test"), py::arg("trees") = 200,
        py::arg("seed") = 1, "Bagged decision trees with random feature subsets.");

    m.def(
        "tabnet_fit_predict",
        [](const Rows& train, const std::vector<int>& labels, const Rows& test, std::size_t epochs,
           std::size_t n_steps, std::size_t width, std::size_t batch_size, double learning_rate,
           std::uint64_t seed) {
            TabNetConfig cfg;
            cfg.epochs = epochs;
            cfg.n_steps = n_steps;
            cfg.n_d = width;
            cfg.n_a = width;
            cfg.batch_size = batch_size;
            cfg.learning_rate = learning_rate;
            cfg.seed = seed;
            cfg.validate();
            const TabNetFitResult fit = tabnet_fit(to_matrix(train), to_labels(labels), cfg);
            return from_labels(tabnet_predict(fit.params, cfg, to_matrix(test)));
        },
        py::arg("train"), py::arg("labels"), py::arg("test"), py::arg("epochs") = 50,
        py::arg("n_steps") = 3, py::arg("width") = 8, py::arg("batch_size") = 128,
        py::arg("learning_rate") = 0.02, py::arg("seed") = 1,
        "Sequential-attention network trained with Adam.");

    m.def(
        "sparsemax",
        [](const std::vector<double>& z) {
            Matrix row(1, z.size());
            for (std::size_t i = 0; i < z.size(); ++i) row(0, i) = z[i];
            Tape tape;
            const Matrix p = tape.value(tape.sparsemax_rows(tape.leaf(row)));
            return std::vector<double>(p.data().begin(), p.data().end());
        },
        py::arg("z"), "Euclidean projection onto the probability simplex.");

    m.def(
        "accuracy",
        [](const std::vector<int>& truth, const std::vector<int>& predicted) {
            return accuracy_percent(confusion(to_labels(truth), to_labels(predicted)));
        },
        py::arg("truth"), py::arg("predicted"), "Percent agreement.");

    m.def(
        "confusion_matrix",
        [](const std::vector<int>& truth, const std::vector<int>& predicted) {
            const ConfusionMatrix cm = confusion(to_labels(truth), to_labels(predicted));
            std::vector<std::vector<std::int64_t>> rows(3, std::vector<std::int64_t>(3));
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) rows[i][j] = cm.counts[i][j];
            return rows;
        },
        py::arg("truth"), py::arg("predicted"), "3x3 counts, true classes as rows.");

    m.def(
        "run_experiment_grid",
        [](const std::string& data_path, const std::string& out_dir,
           const std::vector<double>& fractions, const std::vector<std::uint64_t>& seeds,
           const std::vector<std::string>& models) {
            ExperimentConfig cfg;
            cfg.data_path = data_path;
            cfg.out_dir = out_dir;
            if (!fractions.empty()) cfg.fractions = fractions;
            if (!seeds.empty()) cfg.seeds = seeds;
            if (!models.empty()) cfg.models = models;
            cfg.validate();
            const ExperimentReport report = run_experiment(cfg, load_csv(data_path));
            emit_artifacts(report, out_dir);
            return render_results_csv(report);
        },
        py::arg("data_path"), py::arg("out_dir"), py::arg("fractions") = std::vector<double>{},
        py::arg("seeds") = std::vector<std::uint64_t>{},
        py::arg("models") = std::vector<std::string>{},
        "Runs the model grid, writes the artifact set, returns results.csv.");
}

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ctgml/dataset.hpp"
#include "ctgml/dimred.hpp"
#include "ctgml/errors.hpp"
#include "ctgml/metrics.hpp"
#include "ctgml/runner.hpp"
#include "ctgml/svg.hpp"
#include "ctgml/synth.hpp"

#ifndef CTGML_DATA_DIR
#define CTGML_DATA_DIR ""
#endif

namespace {

struct CommonFlags {
    std::string data;
    std::string out = "out";
};

ctgml::Dataset load_resolved(const std::string& cli_data) {
    std::string note;
    const auto path = ctgml::resolve_data_path(cli_data, CTGML_DATA_DIR, &note);
    if (!note.empty()) std::cerr << note << "\n";
    return ctgml::load_csv(path);
}

void add_hyper_flags(CLI::App* cmd, ctgml::ExperimentConfig& cfg) {
    cmd->add_option("--svm-kernel", cfg.svm.kernel, "svm kernel: rbf or linear");
    cmd->add_option("--svm-gamma", cfg.svm.gamma, "rbf gamma, 0 = scale heuristic");
    cmd->add_option("--svm-c", cfg.svm.c, "svm regularization C");
    cmd->add_option("--svm-tol", cfg.svm.tol, "smo kkt tolerance");
    cmd->add_option("--rf-trees", cfg.rf.trees, "forest size");
    cmd->add_option("--rf-max-features", cfg.rf.max_features, "features per split, 0 = ceil(sqrt(d))");
    cmd->add_option("--rf-min-split", cfg.rf.min_samples_split, "minimum samples to split");
    cmd->add_option("--tabnet-steps", cfg.tabnet.n_steps, "decision steps");
    cmd->add_option("--tabnet-nd", cfg.tabnet.n_d, "decision width");
    cmd->add_option("--tabnet-na", cfg.tabnet.n_a, "attention width");
    cmd->add_option("--tabnet-gamma", cfg.tabnet.gamma, "prior relaxation");
    cmd->add_option("--tabnet-lambda", cfg.tabnet.lambda, "sparsity weight");
    cmd->add_option("--tabnet-batch", cfg.tabnet.batch_size, "batch size");
    cmd->add_option("--tabnet-lr", cfg.tabnet.learning_rate, "learning rate");
    cmd->add_option("--tabnet-lr-decay", cfg.tabnet.lr_decay, "per-epoch lr decay");
    cmd->add_option("--tabnet-epochs", cfg.tabnet.epochs, "training epochs");
    cmd->add_option("--tabnet-val-fraction", cfg.tabnet.val_fraction, "validation slice, 0 disables early stop");
    cmd->add_option("--tabnet-patience", cfg.tabnet.patience, "early-stop patience");
    cmd->add_option("--pca-components", cfg.pca.components, "pca component count, 0 = variance target");
    cmd->add_option("--pca-variance", cfg.pca.variance, "pca variance target in (0, 1]");
    cmd->add_option("--lda-components", cfg.lda.components, "lda component count (capped at 2)");
}

int cmd_run(const std::string& config_path, ctgml::ExperimentConfig& cfg,
            const std::vector<std::string>& overridden, CLI::App* cmd) {
    if (!config_path.empty()) {
        ctgml::ExperimentConfig from_file = ctgml::load_experiment_config(config_path);
        // command line wins over the file for every flag actually passed
        ctgml::ExperimentConfig merged = from_file;
        (void)overridden;
        auto keep_cli = [&](const std::string& flag) { return cmd->count(flag) > 0; };
        if (keep_cli("--data")) merged.data_path = cfg.data_path;
        if (keep_cli("--out")) merged.out_dir = cfg.out_dir;
        if (keep_cli("--models")) merged.models = cfg.models;
        if (keep_cli("--reducers")) merged.reducers = cfg.reducers;
        if (keep_cli("--fractions")) merged.fractions = cfg.fractions;
        if (keep_cli("--seeds")) merged.seeds = cfg.seeds;
        if (keep_cli("--workers")) merged.workers = cfg.workers;
        if (keep_cli("--svm-kernel")) merged.svm.kernel = cfg.svm.kernel;
        if (keep_cli("--svm-gamma")) merged.svm.gamma = cfg.svm.gamma;
        if (keep_cli("--svm-c")) merged.svm.c = cfg.svm.c;
        if (keep_cli("--svm-tol")) merged.svm.tol = cfg.svm.tol;
        if (keep_cli("--rf-trees")) merged.rf.trees = cfg.rf.trees;
        if (keep_cli("--rf-max-features")) merged.rf.max_features = cfg.rf.max_features;
        if (keep_cli("--rf-min-split")) merged.rf.min_samples_split = cfg.rf.min_samples_split;
        if (keep_cli("--tabnet-steps")) merged.tabnet.n_steps = cfg.tabnet.n_steps;
        if (keep_cli("--tabnet-nd")) merged.tabnet.n_d = cfg.tabnet.n_d;
        if (keep_cli("--tabnet-na")) merged.tabnet.n_a = cfg.tabnet.n_a;
        if (keep_cli("--tabnet-gamma")) merged.tabnet.gamma = cfg.tabnet.gamma;
        if (keep_cli("--tabnet-lambda")) merged.tabnet.lambda = cfg.tabnet.lambda;
        if (keep_cli("--tabnet-batch")) merged.tabnet.batch_size = cfg.tabnet.batch_size;
        if (keep_cli("--tabnet-lr")) merged.tabnet.learning_rate = cfg.tabnet.learning_rate;
        if (keep_cli("--tabnet-lr-decay")) merged.tabnet.lr_decay = cfg.tabnet.lr_decay;
        if (keep_cli("--tabnet-epochs")) merged.tabnet.epochs = cfg.tabnet.epochs;
        if (keep_cli("--tabnet-val-fraction")) merged.tabnet.val_fraction = cfg.tabnet.val_fraction;
        if (keep_cli("--tabnet-patience")) merged.tabnet.patience = cfg.tabnet.patience;
        if (keep_cli("--pca-components")) merged.pca.components = cfg.pca.components;
        if (keep_cli("--pca-variance")) merged.pca.variance = cfg.pca.variance;
        if (keep_cli("--lda-components")) merged.lda.components = cfg.lda.components;
        cfg = merged;
    }
    cfg.validate();

    const ctgml::Dataset data = load_resolved(cfg.data_path);
    const ctgml::ExperimentReport report = ctgml::run_experiment(cfg, data);
    const auto artifacts = ctgml::emit_artifacts(report, cfg.out_dir);

    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    std::size_t failed = 0;
    for (const auto& row : report.rows) {
        if (row.error.empty()) {
            std::printf("%-7s %-5s %.2f seed %llu  accuracy %6.2f%%  (%.1fs)\n", row.model.c_str(),
                        row.reducer.c_str(), row.fraction, static_cast<unsigned long long>(row.seed),
                        ctgml::round_half_up(row.accuracy, 2), row.seconds);
        } else {
            ++failed;
            std::printf("%-7s %-5s %.2f seed %llu  FAILED: %s\n", row.model.c_str(), row.reducer.c_str(),
                        row.fraction, static_cast<unsigned long long>(row.seed), row.error.c_str());
        }
    }
    std::printf("wrote %zu artifacts to %s\n", artifacts.size(), cfg.out_dir.c_str());
    if (failed > 0) {
        std::fprintf(stderr, "%zu of %zu cells failed\n", failed, report.rows.size());
        return 2;
    }
    return 0;
}

int cmd_correlate(const CommonFlags& flags) {
    const ctgml::Dataset data = load_resolved(flags.data);
    std::vector<std::string> warnings;
    const ctgml::CorrelationMatrix corr = ctgml::pearson_correlation(data, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    std::filesystem::create_directories(flags.out);
    const auto csv_path = std::filesystem::path(flags.out) / "correlation.csv";
    std::ofstream out(csv_path);
    if (!out) throw ctgml::IoError("cannot open " + csv_path.string() + " for writing");
    ctgml::write_correlation_csv(corr, data.feature_names, out);
    ctgml::write_heatmap_svg(corr.values, data.feature_names,
                             std::filesystem::path(flags.out) / "heatmap.svg");
    std::printf("wrote correlation.csv and heatmap.svg to %s\n", flags.out.c_str());
    return 0;
}

int cmd_confusion(const CommonFlags& flags, ctgml::ExperimentConfig& cfg, const std::string& model,
                  const std::string& reducer, double fraction, std::uint64_t seed) {
    cfg.data_path = flags.data;
    cfg.out_dir = flags.out;
    cfg.models = {model};
    cfg.reducers = {reducer};
    cfg.fractions = {fraction};
    cfg.seeds = {seed};
    cfg.validate();

    const ctgml::Dataset data = load_resolved(cfg.data_path);
    const ctgml::ExperimentReport report = ctgml::run_experiment(cfg, data);
    const auto& row = report.rows.at(0);
    if (!row.error.empty()) {
        std::fprintf(stderr, "cell failed: %s\n", row.error.c_str());
        return 2;
    }

    std::filesystem::create_directories(flags.out);
    const std::string name = "confusion_" + row.model + "_" + row.reducer + "_" +
                             std::to_string(static_cast<int>(std::lround(fraction * 100.0))) + "_s" +
                             std::to_string(seed) + ".csv";
    ctgml::write_confusion_csv(row.cm, std::filesystem::path(flags.out) / name);

    std::printf("%-14s%-14s%-14s%-14s\n", "true\\predicted", "Normal", "Suspect", "Pathological");
    for (int r = 0; r < 3; ++r) {
        std::printf("%-14s", std::string(ctgml::class_name(ctgml::class_from_index(r))).c_str());
        for (int c = 0; c < 3; ++c) std::printf("%-14lld", static_cast<long long>(row.cm.counts[r][c]));
        std::printf("\n");
    }
    std::printf("accuracy %.2f%%  (wrote %s)\n", ctgml::round_half_up(row.accuracy, 2), name.c_str());
    return 0;
}

int cmd_synth(std::size_t rows, std::uint64_t seed, const std::string& out_path) {
    const ctgml::Dataset d = ctgml::synthesize_ctg(rows, seed);
    ctgml::write_csv(d, out_path);
    const auto counts = d.class_counts();
    std::printf("wrote %zu rows (%zu normal, %zu suspect, %zu pathological) to %s\n", d.size(),
                counts[0], counts[1], counts[2], out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cardiotocography classification toolkit"};
    app.require_subcommand(1);

    ctgml::ExperimentConfig cfg;
    std::string config_path;
    CommonFlags flags;

    auto* run = app.add_subcommand("run", "run the model x reducer x train-size grid");
    run->add_option("--config", config_path, "config file ([grid]/[svm]/[rf]/[tabnet]/[pca]/[lda] sections)");
    run->add_option("--data", cfg.data_path, "dataset csv");
    run->add_option("--out", cfg.out_dir, "output directory");
    run->add_option("--models", [&cfg](const std::vector<std::string>& v) {
        cfg.models = ctgml::split_list(v.at(0));
        return true;
    }, "comma list: svm,rf,tabnet");
    run->add_option("--reducers", [&cfg](const std::vector<std::string>& v) {
        cfg.reducers = ctgml::split_list(v.at(0));
        return true;
    }, "comma list: none,pca,lda");
    run->add_option("--fractions", [&cfg](const std::vector<std::string>& v) {
        cfg.fractions = ctgml::parse_fraction_list(v.at(0));
        return true;
    }, "comma list of train fractions");
    run->add_option("--seeds", [&cfg](const std::vector<std::string>& v) {
        cfg.seeds = ctgml::parse_seed_list(v.at(0));
        return true;
    }, "comma list of seeds");
    run->add_option("--workers", cfg.workers, "worker threads, 0 = hardware");
    add_hyper_flags(run, cfg);

    auto* correlate = app.add_subcommand("correlate", "emit correlation.csv and heatmap.svg");
    correlate->add_option("--data", flags.data, "dataset csv");
    correlate->add_option("--out", flags.out, "output directory");

    std::string c_model = "tabnet", c_reducer = "none";
    double c_fraction = 0.8;
    std::uint64_t c_seed = 1;
    auto* confusion = app.add_subcommand("confusion", "single-cell confusion matrix");
    confusion->add_option("--data", flags.data, "dataset csv");
    confusion->add_option("--out", flags.out, "output directory");
    confusion->add_option("--model", c_model, "svm, rf or tabnet");
    confusion->add_option("--reducer", c_reducer, "none, pca or lda");
    confusion->add_option("--fraction", c_fraction, "train fraction");
    confusion->add_option("--seed", c_seed, "split/model seed");
    add_hyper_flags(confusion, cfg);

    std::size_t s_rows = 2126;
    std::uint64_t s_seed = 7;
    std::string s_out = "ctg_synthetic.csv";
    auto* synth = app.add_subcommand("synth", "generate the synthetic stand-in dataset");
    synth->add_option("--rows", s_rows, "row count");
    synth->add_option("--seed", s_seed, "generator seed");
    synth->add_option("--out", s_out, "output csv path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, cfg, {}, run);
        if (correlate->parsed()) return cmd_correlate(flags);
        if (confusion->parsed()) return cmd_confusion(flags, cfg, c_model, c_reducer, c_fraction, c_seed);
        if (synth->parsed()) return cmd_synth(s_rows, s_seed, s_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ctgml/dataset.hpp"
#include "ctgml/metrics.hpp"
#include "ctgml/tabnet.hpp"

namespace ctgml {

struct SvmSettings {
    std::string kernel = "rbf";
    double gamma = 0.0;  // 0 means the scale heuristic
    double c = 1.0;
    double tol = 1e-3;
};

struct ForestSettings {
    std::size_t trees = 200;
    std::size_t max_features = 0;  // 0 means ceil(sqrt(d))
    std::size_t min_samples_split = 2;
};

struct PcaSettings {
    std::size_t components = 2;  // 0 defers to the variance target
    double variance = 0.95;
};

struct LdaSettings {
    std::size_t components = 2;
};

struct ExperimentConfig {
    std::string data_path;  // empty means resolve via environment/defaults
    std::vector<std::string> models{"svm", "rf", "tabnet"};
    std::vector<std::string> reducers{"pca", "lda"};  // tabnet cells always run reducer "none"
    std::vector<double> fractions{0.4, 0.5, 0.6, 0.7, 0.8};
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::string out_dir = "out";
    std::size_t workers = 0;  // 0 means hardware concurrency

    SvmSettings svm;
    ForestSettings rf;
    TabNetConfig tabnet;
    PcaSettings pca;
    LdaSettings lda;

    void validate() const;  // throws ArgumentError
};

struct ExperimentRow {
    std::string model;
    std::string reducer;
    double fraction = 0.0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;  // percent; meaningless when error is set
    double seconds = 0.0;
    std::string error;  // empty on success
    ConfusionMatrix cm;
    std::vector<TrainLogEntry> tabnet_log;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;  // sorted by (model, reducer, fraction, seed)
    CorrelationMatrix correlation;
    std::vector<std::string> feature_names;
    std::vector<std::string> warnings;

    bool any_failed() const;
};

// Runs the model x reducer x fraction x seed grid on a worker pool. Cell
// failures land in their row's error field; the remaining cells continue.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& data);

// Writes results.csv, per-cell confusion matrices, correlation.csv,
// heatmap.svg, accuracy_bars.svg, tabnet training logs, timings.csv and
// manifest.txt. Returns the artifact names listed in the manifest.
std::vector<std::string> emit_artifacts(const ExperimentReport& report,
                                        const std::filesystem::path& out_dir);

// The results.csv payload, composed fully in memory so a failed write cannot
// leave a partial file behind.
std::string render_results_csv(const ExperimentReport& report);

// Flat `key = value` file with [grid]/[svm]/[rf]/[tabnet]/[pca]/[lda]
// sections; unknown keys are errors.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                       const std::string& value, const std::string& origin);

std::vector<std::string> split_list(const std::string& csv);
std::vector<double> parse_fraction_list(const std::string& csv);
std::vector<std::uint64_t> parse_seed_list(const std::string& csv);

// cli value > CTGML_DATA environment variable > <dir>/fetal_health.csv >
// <dir>/ctg_synthetic.csv for dir in {cwd/data, fallback_dir}. `note`
// receives a human-readable banner when falling back to the synthetic file.
std::filesystem::path resolve_data_path(const std::string& cli_value,
                                        const std::filesystem::path& fallback_dir, std::string* note);

}  // namespace ctgml

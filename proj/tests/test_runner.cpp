#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ctgml/dataset.hpp"
#include "ctgml/errors.hpp"
#include "ctgml/rng.hpp"
#include "ctgml/runner.hpp"
#include "ctgml/svg.hpp"
#include "ctgml/synth.hpp"
#include "doctest.h"

using namespace ctgml;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("ctgml_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

Dataset tiny_dataset(const std::vector<int>& class_counts, std::uint64_t seed) {
    Rng rng(seed);
    std::size_t n = 0;
    for (const int c : class_counts) n += static_cast<std::size_t>(c);
    Dataset d;
    d.features = Matrix(n, kFeatureCount);
    d.feature_names.assign(canonical_feature_names().begin(), canonical_feature_names().end());
    std::size_t row = 0;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < class_counts[static_cast<std::size_t>(c)]; ++i, ++row) {
            for (std::size_t j = 0; j < kFeatureCount; ++j)
                d.features(row, j) = 2.0 * c + rng.normal();
            d.labels.push_back(class_from_index(c));
        }
    return d;
}

ExperimentConfig fast_config() {
    ExperimentConfig cfg;
    cfg.models = {"svm", "rf"};
    cfg.reducers = {"pca", "lda"};
    cfg.fractions = {0.5};
    cfg.seeds = {1, 2};
    cfg.workers = 1;
    cfg.rf.trees = 20;
    return cfg;
}

}  // namespace

TEST_CASE("list parsing helpers") {
    CHECK(split_list("a, b ,c,,") == std::vector<std::string>{"a", "b", "c"});
    CHECK(parse_fraction_list("0.4,0.8") == std::vector<double>{0.4, 0.8});
    CHECK(parse_seed_list("1, 2,3") == std::vector<std::uint64_t>{1, 2, 3});
    CHECK_THROWS_AS(parse_fraction_list("0.4,x"), ParseError);
    CHECK_THROWS_AS(parse_seed_list("1,-2"), ParseError);
}

TEST_CASE("config files parse sections and reject unknown keys") {
    TempDir tmp("config");
    const fs::path path = tmp.path / "exp.ini";
    {
        std::ofstream out(path);
        out << "# experiment grid\n"
               "models = svm, tabnet\n"
               "fractions = 0.4, 0.8\n"
               "seeds = 5\n"
               "[svm]\n"
               "kernel = linear\n"
               "c = 2.5\n"
               "[rf]\n"
               "trees = 50\n"
               "[tabnet]\n"
               "epochs = 7\n"
               "lambda = 0.01\n"
               "[pca]\n"
               "components = 3\n"
               "[lda]\n"
               "components = 1\n";
    }
    const ExperimentConfig cfg = load_experiment_config(path);
    CHECK(cfg.models == std::vector<std::string>{"svm", "tabnet"});
    CHECK(cfg.fractions == std::vector<double>{0.4, 0.8});
    CHECK(cfg.seeds == std::vector<std::uint64_t>{5});
    CHECK(cfg.svm.kernel == "linear");
    CHECK(cfg.svm.c == 2.5);
    CHECK(cfg.rf.trees == 50);
    CHECK(cfg.tabnet.epochs == 7);
    CHECK(cfg.tabnet.lambda == 0.01);
    CHECK(cfg.pca.components == 3);
    CHECK(cfg.lda.components == 1);

    {
        std::ofstream out(path);
        out << "[svm]\nkernell = rbf\n";
    }
    CHECK_THROWS_AS(load_experiment_config(path), ParseError);
    {
        std::ofstream out(path);
        out << "[mystery]\nx = 1\n";
    }
    CHECK_THROWS_AS(load_experiment_config(path), ParseError);
    {
        std::ofstream out(path);
        out << "models\n";
    }
    CHECK_THROWS_AS(load_experiment_config(path), ParseError);
    CHECK_THROWS_AS(load_experiment_config(tmp.path / "absent.ini"), IoError);
}

TEST_CASE("config validation rejects unknown grid values") {
    ExperimentConfig cfg;
    cfg.models = {"svm", "boost"};
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    cfg = ExperimentConfig{};
    cfg.reducers = {"ica"};
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    cfg = ExperimentConfig{};
    cfg.fractions = {1.5};
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    cfg = ExperimentConfig{};
    cfg.svm.kernel = "poly";
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}

TEST_CASE("data path resolution order") {
    TempDir tmp("resolve");
    const fs::path keep_cwd = fs::current_path();
    fs::current_path(tmp.path);  // keep the cwd data/ probe hermetic
    ::unsetenv("CTGML_DATA");

    const fs::path fallback = tmp.path / "fallback";
    fs::create_directories(fallback);

    SUBCASE("explicit value wins") {
        CHECK(resolve_data_path("given.csv", fallback, nullptr) == fs::path("given.csv"));
    }
    SUBCASE("environment beats search paths") {
        ::setenv("CTGML_DATA", "/somewhere/env.csv", 1);
        CHECK(resolve_data_path("", fallback, nullptr) == fs::path("/somewhere/env.csv"));
        ::unsetenv("CTGML_DATA");
    }
    SUBCASE("real recordings preferred over the synthetic stand-in") {
        std::ofstream(fallback / "ctg_synthetic.csv") << "x";
        std::string note;
        CHECK(resolve_data_path("", fallback, &note) == fallback / "ctg_synthetic.csv");
        CHECK(note.find("synthetic stand-in") != std::string::npos);

        std::ofstream(fallback / "fetal_health.csv") << "x";
        note.clear();
        CHECK(resolve_data_path("", fallback, &note) == fallback / "fetal_health.csv");
        CHECK(note.empty());
    }
    SUBCASE("cwd data directory beats the fallback directory") {
        fs::create_directories(tmp.path / "data");
        std::ofstream(tmp.path / "data" / "fetal_health.csv") << "x";
        std::ofstream(fallback / "fetal_health.csv") << "x";
        CHECK(resolve_data_path("", fallback, nullptr) == fs::path("data") / "fetal_health.csv");
    }
    SUBCASE("nothing found") {
        CHECK_THROWS_AS(resolve_data_path("", fallback, nullptr), IoError);
    }

    fs::current_path(keep_cwd);
}

TEST_CASE("experiment grid runs sorted and fills every cell") {
    const Dataset data = synthesize_ctg(260, 3);
    const ExperimentConfig cfg = fast_config();
    const ExperimentReport report = run_experiment(cfg, data);

    REQUIRE(report.rows.size() == 8);
    CHECK_FALSE(report.any_failed());
    // models sort ahead of reducers: rf before svm, lda before pca
    CHECK(report.rows[0].model == "rf");
    CHECK(report.rows[0].reducer == "lda");
    CHECK(report.rows[0].seed == 1);
    CHECK(report.rows[1].seed == 2);
    CHECK(report.rows[2].reducer == "pca");
    CHECK(report.rows[4].model == "svm");

    const std::size_t test_rows = data.size() - stratified_split(data, 0.5, 1).train.size();
    for (const auto& row : report.rows) {
        CHECK(row.error.empty());
        CHECK(row.accuracy > 0.0);
        CHECK(row.accuracy <= 100.0);
        CHECK(static_cast<std::size_t>(row.cm.total()) == test_rows);
        CHECK(row.seconds >= 0.0);
    }
    CHECK(report.correlation.values.rows() == kFeatureCount);
}

TEST_CASE("failed cells carry their error and the grid continues") {
    const Dataset data = tiny_dataset({8, 8, 2}, 7);
    ExperimentConfig cfg;
    cfg.models = {"svm"};
    cfg.reducers = {"pca"};
    cfg.fractions = {0.4, 0.75};  // floor(0.4 * 2) == 0 training pathological rows
    cfg.seeds = {1};
    cfg.workers = 1;
    cfg.pca.components = 2;

    const ExperimentReport report = run_experiment(cfg, data);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.any_failed());
    CHECK(report.rows[0].fraction == 0.4);
    CHECK(report.rows[0].error.find("no training rows") != std::string::npos);
    CHECK(report.rows[0].error.find(',') == std::string::npos);  // csv-safe
    CHECK(report.rows[1].error.empty());
    CHECK(report.rows[1].accuracy > 0.0);

    const std::string csv = render_results_csv(report);
    CHECK(csv.find("svm,pca,0.40,1,,,") != std::string::npos);  // no accuracy, no mean
    CHECK(csv.find("svm,pca,0.75,1,") != std::string::npos);
}

TEST_CASE("results csv renders pinned formatting") {
    ExperimentReport report;
    ExperimentRow a;
    a.model = "svm";
    a.reducer = "lda";
    a.fraction = 0.4;
    a.seed = 1;
    a.accuracy = 91.146;
    ExperimentRow b = a;
    b.seed = 2;
    b.accuracy = 90.0;
    ExperimentRow c;
    c.model = "tabnet";
    c.reducer = "none";
    c.fraction = 0.8;
    c.seed = 1;
    c.error = "synthetic failure";
    report.rows = {a, b, c};

    CHECK(render_results_csv(report) ==
          "model,reducer,train_fraction,seed,accuracy,mean_accuracy,error\n"
          "svm,lda,0.40,1,91.15,90.57,\n"
          "svm,lda,0.40,2,90.00,90.57,\n"
          "tabnet,none,0.80,1,,,synthetic failure\n");
}

TEST_CASE("artifact emission writes the manifest inventory") {
    const Dataset data = synthesize_ctg(240, 9);
    ExperimentConfig cfg = fast_config();
    cfg.models = {"rf", "tabnet"};
    cfg.reducers = {"pca"};
    cfg.tabnet.epochs = 3;
    cfg.tabnet.batch_size = 32;
    const ExperimentReport report = run_experiment(cfg, data);
    REQUIRE_FALSE(report.any_failed());

    TempDir tmp("artifacts");
    const auto names = emit_artifacts(report, tmp.path);

    CHECK(std::is_sorted(names.begin(), names.end()));
    for (const auto& expected :
         {"results.csv", "correlation.csv", "heatmap.svg", "accuracy_bars.svg", "timings.csv",
          "confusion_rf_pca_50_s1.csv", "confusion_rf_pca_50_s2.csv",
          "confusion_tabnet_none_50_s1.csv", "tabnet_log_50_s1.csv"})
        CHECK(std::find(names.begin(), names.end(), expected) != names.end());

    // manifest lists every artifact with its byte size and omits itself
    std::map<std::string, std::uintmax_t> listed;
    std::istringstream manifest(slurp(tmp.path / "manifest.txt"));
    std::string name;
    std::uintmax_t size = 0;
    while (manifest >> name >> size) listed[name] = size;
    REQUIRE(listed.size() == names.size());
    CHECK(listed.count("manifest.txt") == 0);
    for (const auto& [file, bytes] : listed) CHECK(fs::file_size(tmp.path / file) == bytes);

    // svg artifacts are well formed enough to open
    const std::string heatmap = slurp(tmp.path / "heatmap.svg");
    CHECK(heatmap.find("<svg") != std::string::npos);
    CHECK(heatmap.find("baseline_value") != std::string::npos);
    const std::string bars = slurp(tmp.path / "accuracy_bars.svg");
    CHECK(bars.find("rf+pca") != std::string::npos);
    CHECK(bars.find("tabnet+none") != std::string::npos);

    // training log carries the epoch header
    const std::string log = slurp(tmp.path / "tabnet_log_50_s1.csv");
    CHECK(log.rfind("epoch,train_loss,val_accuracy\n", 0) == 0);
}

TEST_CASE("identical configurations produce byte-identical results") {
    const Dataset data = synthesize_ctg(220, 13);
    const ExperimentConfig cfg = fast_config();

    TempDir tmp("determinism");
    emit_artifacts(run_experiment(cfg, data), tmp.path / "a");
    emit_artifacts(run_experiment(cfg, data), tmp.path / "b");
    CHECK(slurp(tmp.path / "a" / "results.csv") == slurp(tmp.path / "b" / "results.csv"));
    CHECK(slurp(tmp.path / "a" / "correlation.csv") == slurp(tmp.path / "b" / "correlation.csv"));
}

TEST_CASE("heatmap ramp endpoints are pinned") {
    CHECK(heatmap_color(1.0) == "rgb(103,0,31)");
    CHECK(heatmap_color(-1.0) == "rgb(5,48,97)");
    CHECK(heatmap_color(0.0) == "rgb(255,255,255)");
    CHECK(heatmap_color(2.0) == heatmap_color(1.0));  // clamped
}

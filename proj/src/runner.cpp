#include "ctgml/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "ctgml/dimred.hpp"
#include "ctgml/errors.hpp"
#include "ctgml/forest.hpp"
#include "ctgml/svg.hpp"
#include "ctgml/svm.hpp"

namespace ctgml {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& origin) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(origin + ": cannot parse number '" + s + "'");
    }
}

std::uint64_t parse_u64(const std::string& s, const std::string& origin) {
    try {
        std::size_t used = 0;
        // stoull would wrap a negative value around instead of rejecting it
        if (!s.empty() && s.front() == '-') throw std::invalid_argument(s);
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(origin + ": cannot parse integer '" + s + "'");
    }
}

std::string sanitize_error(std::string message) {
    for (char& c : message)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return message;
}

std::string fraction_text(double fraction) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", fraction);
    return buf;
}

std::string accuracy_text(double accuracy) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", round_half_up(accuracy, 2));
    return buf;
}

int fraction_pct(double fraction) { return static_cast<int>(std::lround(fraction * 100.0)); }

std::string confusion_name(const ExperimentRow& row) {
    return "confusion_" + row.model + "_" + row.reducer + "_" + std::to_string(fraction_pct(row.fraction)) +
           "_s" + std::to_string(row.seed) + ".csv";
}

struct Cell {
    std::string model;
    std::string reducer;
    double fraction;
    std::uint64_t seed;
};

ExperimentRow run_cell(const Cell& cell, const ExperimentConfig& cfg, const Dataset& data) {
    ExperimentRow row;
    row.model = cell.model;
    row.reducer = cell.reducer;
    row.fraction = cell.fraction;
    row.seed = cell.seed;

    const SplitResult split = stratified_split(data, cell.fraction, cell.seed);
    const Scaler scaler = fit_scaler(split.train);
    Matrix x_train = apply_scaler(scaler, split.train.features);
    Matrix x_test = apply_scaler(scaler, split.test.features);

    if (cell.reducer == "pca") {
        const Projection p = cfg.pca.components > 0 ? pca_fit(x_train, cfg.pca.components)
                                                    : pca_fit_variance(x_train, cfg.pca.variance);
        x_train = project(p, x_train);
        x_test = project(p, x_test);
    } else if (cell.reducer == "lda") {
        const Projection p = lda_fit(x_train, split.train.labels, cfg.lda.components);
        x_train = project(p, x_train);
        x_test = project(p, x_test);
    }

    std::vector<ClassLabel> predicted;
    if (cell.model == "svm") {
        KernelSpec kernel;
        kernel.kind = cfg.svm.kernel == "linear" ? KernelKind::Linear : KernelKind::Rbf;
        kernel.gamma = cfg.svm.gamma > 0.0 ? cfg.svm.gamma : scale_gamma(x_train);
        const SvmModel model = svm_fit(x_train, split.train.labels, kernel, cfg.svm.c, cfg.svm.tol);
        predicted = svm_predict(model, x_test);
    } else if (cell.model == "rf") {
        ForestOptions opt;
        opt.trees = cfg.rf.trees;
        opt.max_features = cfg.rf.max_features;
        opt.min_samples_split = cfg.rf.min_samples_split;
        opt.seed = cell.seed;
        const ForestModel model = forest_fit(x_train, split.train.labels, opt);
        predicted = forest_predict(model, x_test);
    } else {
        TabNetConfig tc = cfg.tabnet;
        tc.seed = cell.seed;
        TabNetFitResult fit = tabnet_fit(x_train, split.train.labels, tc);
        predicted = tabnet_predict(fit.params, tc, x_test);
        row.tabnet_log = std::move(fit.log);
    }

    row.cm = confusion(split.test.labels, predicted);
    row.accuracy = accuracy_percent(row.cm);
    return row;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (models.empty()) throw ArgumentError("config: at least one model required");
    if (seeds.empty()) throw ArgumentError("config: at least one seed required");
    if (fractions.empty()) throw ArgumentError("config: at least one train fraction required");
    for (double f : fractions)
        if (!(f > 0.0 && f < 1.0)) throw ArgumentError("config: train fractions must lie in (0, 1)");
    for (const auto& m : models)
        if (m != "svm" && m != "rf" && m != "tabnet")
            throw ArgumentError("config: unknown model '" + m + "'");
    if (reducers.empty()) throw ArgumentError("config: at least one reducer required");
    for (const auto& r : reducers)
        if (r != "none" && r != "pca" && r != "lda")
            throw ArgumentError("config: unknown reducer '" + r + "'");
    if (svm.kernel != "rbf" && svm.kernel != "linear")
        throw ArgumentError("config: unknown svm kernel '" + svm.kernel + "'");
    if (!(svm.c > 0.0)) throw ArgumentError("config: svm c must be positive");
    if (!(svm.tol > 0.0)) throw ArgumentError("config: svm tol must be positive");
    if (svm.gamma < 0.0) throw ArgumentError("config: svm gamma must be >= 0");
    if (rf.trees < 1) throw ArgumentError("config: rf trees must be >= 1");
    if (pca.components == 0 && !(pca.variance > 0.0 && pca.variance <= 1.0))
        throw ArgumentError("config: pca variance target outside (0, 1]");
    if (lda.components < 1) throw ArgumentError("config: lda components must be >= 1");
    tabnet.validate();
}

bool ExperimentReport::any_failed() const {
    return std::any_of(rows.begin(), rows.end(), [](const ExperimentRow& r) { return !r.error.empty(); });
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& data) {
    cfg.validate();

    std::vector<Cell> cells;
    std::vector<std::string> sorted_models = cfg.models;
    std::sort(sorted_models.begin(), sorted_models.end());
    std::vector<std::string> sorted_reducers = cfg.reducers;
    std::sort(sorted_reducers.begin(), sorted_reducers.end());
    std::vector<double> sorted_fractions = cfg.fractions;
    std::sort(sorted_fractions.begin(), sorted_fractions.end());
    std::vector<std::uint64_t> sorted_seeds = cfg.seeds;
    std::sort(sorted_seeds.begin(), sorted_seeds.end());

    for (const auto& model : sorted_models) {
        const std::vector<std::string> reducers =
            model == "tabnet" ? std::vector<std::string>{"none"} : sorted_reducers;
        for (const auto& reducer : reducers)
            for (double fraction : sorted_fractions)
                for (std::uint64_t seed : sorted_seeds) cells.push_back({model, reducer, fraction, seed});
    }

    ExperimentReport report;
    report.feature_names = data.feature_names;
    report.correlation = pearson_correlation(data, &report.warnings);
    report.rows.resize(cells.size());

    std::size_t workers = cfg.workers > 0 ? cfg.workers : std::thread::hardware_concurrency();
    workers = std::clamp<std::size_t>(workers, 1, cells.size());

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const auto start = std::chrono::steady_clock::now();
            try {
                report.rows[i] = run_cell(cells[i], cfg, data);
            } catch (const std::exception& e) {
                report.rows[i].model = cells[i].model;
                report.rows[i].reducer = cells[i].reducer;
                report.rows[i].fraction = cells[i].fraction;
                report.rows[i].seed = cells[i].seed;
                report.rows[i].error = sanitize_error(e.what());
            }
            report.rows[i].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return report;
}

std::string render_results_csv(const ExperimentReport& report) {
    // seed-mean accuracy per (model, reducer, fraction) over successful cells
    std::map<std::string, std::pair<double, std::size_t>> means;
    auto group_key = [](const ExperimentRow& r) {
        return r.model + "|" + r.reducer + "|" + fraction_text(r.fraction);
    };
    for (const auto& row : report.rows) {
        if (!row.error.empty()) continue;
        auto& [sum, count] = means[group_key(row)];
        sum += row.accuracy;
        ++count;
    }

    std::string out = "model,reducer,train_fraction,seed,accuracy,mean_accuracy,error\n";
    for (const auto& row : report.rows) {
        out += row.model + "," + row.reducer + "," + fraction_text(row.fraction) + "," +
               std::to_string(row.seed) + ",";
        if (row.error.empty()) out += accuracy_text(row.accuracy);
        out += ",";
        const auto it = means.find(group_key(row));
        if (it != means.end() && it->second.second > 0)
            out += accuracy_text(it->second.first / static_cast<double>(it->second.second));
        out += "," + row.error + "\n";
    }
    return out;
}

std::vector<std::string> emit_artifacts(const ExperimentReport& report,
                                        const std::filesystem::path& out_dir) {
    if (report.rows.empty()) throw ArgumentError("emit_artifacts: empty report");
    std::filesystem::create_directories(out_dir);

    const std::string results = render_results_csv(report);
    std::vector<std::string> names;

    auto open = [&](const std::string& name) {
        std::ofstream out(out_dir / name);
        if (!out) throw IoError("cannot open " + (out_dir / name).string() + " for writing");
        names.push_back(name);
        return out;
    };

    {
        auto out = open("results.csv");
        out << results;
        if (!out) throw IoError("failed writing results.csv");
    }

    for (const auto& row : report.rows) {
        if (!row.error.empty()) continue;
        write_confusion_csv(row.cm, out_dir / confusion_name(row));
        names.push_back(confusion_name(row));
        if (row.model == "tabnet" && !row.tabnet_log.empty()) {
            const std::string log_name = "tabnet_log_" + std::to_string(fraction_pct(row.fraction)) + "_s" +
                                         std::to_string(row.seed) + ".csv";
            write_training_log(row.tabnet_log, out_dir / log_name);
            names.push_back(log_name);
        }
    }

    {
        auto out = open("correlation.csv");
        write_correlation_csv(report.correlation, report.feature_names, out);
        if (!out) throw IoError("failed writing correlation.csv");
    }
    write_heatmap_svg(report.correlation.values, report.feature_names, out_dir / "heatmap.svg");
    names.push_back("heatmap.svg");

    // one bar series per (model, reducer), means over seeds
    std::vector<double> fractions;
    for (const auto& row : report.rows)
        if (std::find(fractions.begin(), fractions.end(), row.fraction) == fractions.end())
            fractions.push_back(row.fraction);
    std::sort(fractions.begin(), fractions.end());

    std::vector<AccuracySeries> series;
    std::map<std::string, std::size_t> series_index;
    std::map<std::string, std::vector<std::pair<double, std::size_t>>> sums;
    for (const auto& row : report.rows) {
        const std::string label = row.model + "+" + row.reducer;
        if (!series_index.count(label)) {
            series_index[label] = series.size();
            series.push_back({label, std::vector<double>(fractions.size(),
                                                         std::numeric_limits<double>::quiet_NaN())});
            sums[label].assign(fractions.size(), {0.0, 0});
        }
        if (row.error.empty()) {
            const auto f = static_cast<std::size_t>(
                std::find(fractions.begin(), fractions.end(), row.fraction) - fractions.begin());
            sums[label][f].first += row.accuracy;
            sums[label][f].second += 1;
        }
    }
    for (auto& s : series)
        for (std::size_t f = 0; f < fractions.size(); ++f) {
            const auto& [sum, count] = sums[s.label][f];
            if (count > 0) s.accuracies[f] = sum / static_cast<double>(count);
        }
    write_accuracy_bars_svg(fractions, series, out_dir / "accuracy_bars.svg");
    names.push_back("accuracy_bars.svg");

    {
        auto out = open("timings.csv");
        out << "model,reducer,train_fraction,seed,seconds\n";
        char buf[32];
        for (const auto& row : report.rows) {
            std::snprintf(buf, sizeof buf, "%.3f", row.seconds);
            out << row.model << "," << row.reducer << "," << fraction_text(row.fraction) << "," << row.seed
                << "," << buf << "\n";
        }
    }

    std::sort(names.begin(), names.end());
    {
        std::ofstream out(out_dir / "manifest.txt");
        if (!out) throw IoError("cannot open manifest.txt for writing");
        for (const auto& name : names)
            out << name << " " << std::filesystem::file_size(out_dir / name) << "\n";
        if (!out) throw IoError("failed writing manifest.txt");
    }
    return names;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(csv);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_fraction_list(const std::string& csv) {
    std::vector<double> out;
    for (const auto& item : split_list(csv)) out.push_back(parse_double(item, "fractions"));
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(csv)) out.push_back(parse_u64(item, "seeds"));
    return out;
}

void apply_config_line(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                       const std::string& value, const std::string& origin) {
    auto unknown = [&]() -> ParseError {
        return ParseError(origin + ": unknown key '" + key + "' in section [" + section + "]");
    };
    if (section == "grid") {
        if (key == "data")
            cfg.data_path = value;
        else if (key == "out")
            cfg.out_dir = value;
        else if (key == "models")
            cfg.models = split_list(value);
        else if (key == "reducers")
            cfg.reducers = split_list(value);
        else if (key == "fractions")
            cfg.fractions = parse_fraction_list(value);
        else if (key == "seeds")
            cfg.seeds = parse_seed_list(value);
        else if (key == "workers")
            cfg.workers = parse_u64(value, origin);
        else
            throw unknown();
    } else if (section == "svm") {
        if (key == "kernel")
            cfg.svm.kernel = value;
        else if (key == "gamma")
            cfg.svm.gamma = parse_double(value, origin);
        else if (key == "c")
            cfg.svm.c = parse_double(value, origin);
        else if (key == "tol")
            cfg.svm.tol = parse_double(value, origin);
        else
            throw unknown();
    } else if (section == "rf") {
        if (key == "trees")
            cfg.rf.trees = parse_u64(value, origin);
        else if (key == "max_features")
            cfg.rf.max_features = parse_u64(value, origin);
        else if (key == "min_samples_split")
            cfg.rf.min_samples_split = parse_u64(value, origin);
        else
            throw unknown();
    } else if (section == "tabnet") {
        if (key == "steps")
            cfg.tabnet.n_steps = parse_u64(value, origin);
        else if (key == "n_d")
            cfg.tabnet.n_d = parse_u64(value, origin);
        else if (key == "n_a")
            cfg.tabnet.n_a = parse_u64(value, origin);
        else if (key == "gamma")
            cfg.tabnet.gamma = parse_double(value, origin);
        else if (key == "lambda")
            cfg.tabnet.lambda = parse_double(value, origin);
        else if (key == "batch")
            cfg.tabnet.batch_size = parse_u64(value, origin);
        else if (key == "lr")
            cfg.tabnet.learning_rate = parse_double(value, origin);
        else if (key == "lr_decay")
            cfg.tabnet.lr_decay = parse_double(value, origin);
        else if (key == "epochs")
            cfg.tabnet.epochs = parse_u64(value, origin);
        else if (key == "val_fraction")
            cfg.tabnet.val_fraction = parse_double(value, origin);
        else if (key == "patience")
            cfg.tabnet.patience = parse_u64(value, origin);
        else if (key == "bn_momentum")
            cfg.tabnet.bn_momentum = parse_double(value, origin);
        else
            throw unknown();
    } else if (section == "pca") {
        if (key == "components")
            cfg.pca.components = parse_u64(value, origin);
        else if (key == "variance")
            cfg.pca.variance = parse_double(value, origin);
        else
            throw unknown();
    } else if (section == "lda") {
        if (key == "components")
            cfg.lda.components = parse_u64(value, origin);
        else
            throw unknown();
    } else {
        throw ParseError(origin + ": unknown section [" + section + "]");
    }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    ExperimentConfig cfg;
    std::string line;
    std::string section = "grid";
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string origin = path.string() + ":" + std::to_string(lineno);
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ParseError(origin + ": unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(origin + ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        apply_config_line(cfg, section, key, value, origin);
    }
    return cfg;
}

std::filesystem::path resolve_data_path(const std::string& cli_value,
                                        const std::filesystem::path& fallback_dir, std::string* note) {
    if (!cli_value.empty()) return cli_value;
    if (const char* env = std::getenv("CTGML_DATA"); env && *env) return env;

    const std::filesystem::path dirs[] = {std::filesystem::path("data"), fallback_dir};
    for (const auto& dir : dirs) {
        if (dir.empty()) continue;
        if (auto p = dir / "fetal_health.csv"; std::filesystem::exists(p)) return p;
    }
    for (const auto& dir : dirs) {
        if (dir.empty()) continue;
        if (auto p = dir / "ctg_synthetic.csv"; std::filesystem::exists(p)) {
            if (note)
                *note = "note: using bundled synthetic stand-in " + p.string() +
                        " (place the real recordings at data/fetal_health.csv or set CTGML_DATA)";
            return p;
        }
    }
    throw IoError("no dataset found: pass --data, set CTGML_DATA, or provide data/fetal_health.csv");
}

}  // namespace ctgml

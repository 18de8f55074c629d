#include "ctgml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "ctgml/errors.hpp"
#include "ctgml/rng.hpp"

namespace ctgml {

namespace {

const std::array<std::string, kFeatureCount> kFeatureNames = {
    "baseline_value",
    "accelerations",
    "fetal_movement",
    "uterine_contractions",
    "light_decelerations",
    "severe_decelerations",
    "prolongued_decelerations",
    "abnormal_short_term_variability",
    "mean_value_of_short_term_variability",
    "percentage_of_time_with_abnormal_long_term_variability",
    "mean_value_of_long_term_variability",
    "histogram_width",
    "histogram_min",
    "histogram_max",
    "histogram_number_of_peaks",
    "histogram_number_of_zeroes",
    "histogram_mode",
    "histogram_mean",
    "histogram_median",
    "histogram_variance",
    "histogram_tendency",
};

constexpr std::string_view kLabelColumn = "fetal_health";

std::string normalize_header(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char ch : raw) {
        if (ch == '"' || ch == '\r') continue;
        if (ch == ' ') {
            out.push_back('_');
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    // trim leading/trailing underscores produced by padding spaces
    while (!out.empty() && out.front() == '_') out.erase(out.begin());
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_cell(std::string field, const std::string& origin, std::size_t line_no,
                  const std::string& column) {
    // strip quotes and surrounding whitespace
    std::erase(field, '"');
    const auto first = field.find_first_not_of(" \t");
    const auto last = field.find_last_not_of(" \t");
    if (first == std::string::npos)
        throw ParseError(origin + ":" + std::to_string(line_no) + ": column '" + column +
                         "': empty cell");
    field = field.substr(first, last - first + 1);
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value))
        throw ParseError(origin + ":" + std::to_string(line_no) + ": column '" + column +
                         "': cannot parse '" + field + "'");
    return value;
}

}  // namespace

ClassLabel class_from_index(int index) {
    if (index < 0 || index >= kClassCount) throw LabelError("class index out of range");
    return static_cast<ClassLabel>(index + 1);
}

ClassLabel class_from_code(int code) {
    if (code < 1 || code > 3) throw LabelError("label " + std::to_string(code) + " outside {1,2,3}");
    return static_cast<ClassLabel>(code);
}

std::string_view class_name(ClassLabel c) {
    switch (c) {
        case ClassLabel::Normal: return "Normal";
        case ClassLabel::Suspect: return "Suspect";
        case ClassLabel::Pathological: return "Pathological";
    }
    return "?";
}

const std::array<std::string, kFeatureCount>& canonical_feature_names() { return kFeatureNames; }

std::array<std::size_t, 3> Dataset::class_counts() const {
    std::array<std::size_t, 3> counts{};
    for (ClassLabel c : labels) ++counts[static_cast<std::size_t>(class_index(c))];
    return counts;
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return load_csv(in, path.filename().string());
}

Dataset load_csv(std::istream& in, const std::string& origin) {
    std::string header_line;
    if (!std::getline(in, header_line)) throw SchemaError(origin + ": missing header row");
    if (header_line.size() >= 3 && header_line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        header_line.erase(0, 3);

    const auto headers = split_line(header_line);
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < headers.size(); ++i) {
        const std::string name = normalize_header(headers[i]);
        if (name.empty()) throw SchemaError(origin + ": empty header name");
        if (!position.emplace(name, i).second)
            throw SchemaError(origin + ": duplicate column '" + name + "'");
    }

    std::vector<std::string> missing;
    std::vector<std::size_t> feature_pos(kFeatureCount, 0);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const auto it = position.find(kFeatureNames[f]);
        if (it == position.end()) {
            missing.push_back(kFeatureNames[f]);
        } else {
            feature_pos[f] = it->second;
        }
    }
    const auto label_it = position.find(std::string(kLabelColumn));
    if (label_it == position.end()) missing.push_back(std::string(kLabelColumn));
    if (!missing.empty()) {
        std::string msg = origin + ": missing columns:";
        for (const auto& m : missing) msg += " " + m;
        throw SchemaError(msg);
    }
    if (position.size() != kFeatureCount + 1) {
        std::string msg = origin + ": unexpected extra columns:";
        for (const auto& [name, idx] : position) {
            const bool known = name == kLabelColumn ||
                               std::find(kFeatureNames.begin(), kFeatureNames.end(), name) !=
                                   kFeatureNames.end();
            if (!known) msg += " " + name;
        }
        throw SchemaError(msg);
    }
    const std::size_t label_pos = label_it->second;
    const std::size_t width = headers.size();

    std::vector<double> values;
    std::vector<ClassLabel> labels;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_line(line);
        if (fields.size() != width)
            throw ParseError(origin + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(width) + " fields, found " +
                             std::to_string(fields.size()));
        for (std::size_t f = 0; f < kFeatureCount; ++f)
            values.push_back(parse_cell(fields[feature_pos[f]], origin, line_no, kFeatureNames[f]));
        const double raw = parse_cell(fields[label_pos], origin, line_no, std::string(kLabelColumn));
        const double rounded = std::nearbyint(raw);
        if (std::abs(raw - rounded) > 1e-9 || rounded < 1.0 || rounded > 3.0)
            throw LabelError(origin + ":" + std::to_string(line_no) + ": label " +
                             std::to_string(raw) + " outside {1,2,3}");
        labels.push_back(static_cast<ClassLabel>(static_cast<int>(rounded)));
    }
    if (labels.empty()) throw SchemaError(origin + ": no data rows");

    Dataset out;
    out.features = Matrix(labels.size(), kFeatureCount);
    out.features.data() = std::move(values);
    out.labels = std::move(labels);
    out.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
    return out;
}

namespace {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

void write_csv(const Dataset& d, std::ostream& out) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) out << kFeatureNames[f] << ',';
    out << "fetal_health\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto row = d.features.row(i);
        for (std::size_t f = 0; f < kFeatureCount; ++f) out << format_value(row[f]) << ',';
        out << static_cast<int>(d.labels[i]) << '\n';
    }
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    write_csv(d, out);
}

SplitResult stratified_split(const Dataset& d, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ArgumentError("train_fraction must lie in (0, 1)");

    std::array<std::vector<std::size_t>, 3> by_class;
    for (std::size_t i = 0; i < d.size(); ++i)
        by_class[static_cast<std::size_t>(class_index(d.labels[i]))].push_back(i);

    Rng rng(seed);
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t c = 0; c < 3; ++c) {
        auto& rows = by_class[c];
        if (rows.empty()) continue;
        const auto take =
            static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(rows.size())));
        if (take == 0)
            throw DegenerateSplitError("class " +
                                       std::string(class_name(class_from_index(static_cast<int>(c)))) +
                                       " would receive no training rows");
        rng.shuffle(rows);
        train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + static_cast<long>(take));
        test_rows.insert(test_rows.end(), rows.begin() + static_cast<long>(take), rows.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());

    auto gather = [&](const std::vector<std::size_t>& rows) {
        Dataset out;
        out.features = Matrix(rows.size(), d.features.cols());
        out.labels.reserve(rows.size());
        out.feature_names = d.feature_names;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto src = d.features.row(rows[i]);
            std::copy(src.begin(), src.end(), out.features.row(i).begin());
            out.labels.push_back(d.labels[rows[i]]);
        }
        return out;
    };
    return {gather(train_rows), gather(test_rows)};
}

Scaler fit_scaler(const Dataset& train) {
    if (train.size() == 0) throw ArgumentError("fit_scaler: empty dataset");
    Scaler s;
    s.means = column_means(train.features);
    const auto vars = column_variances(train.features);
    s.std_devs.resize(vars.size());
    s.zero_variance.resize(vars.size(), 0);
    for (std::size_t j = 0; j < vars.size(); ++j) {
        const double sd = std::sqrt(vars[j]);
        if (sd < 1e-12 * (1.0 + std::abs(s.means[j]))) {
            s.std_devs[j] = 1.0;
            s.zero_variance[j] = 1;
        } else {
            s.std_devs[j] = sd;
        }
    }
    return s;
}

Matrix apply_scaler(const Scaler& s, const Matrix& x) {
    if (x.cols() != s.means.size()) throw SchemaError("apply_scaler: column count mismatch");
    Matrix out = x;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto row = out.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - s.means[j]) / s.std_devs[j];
    }
    return out;
}

Dataset apply_scaler(const Scaler& s, const Dataset& d) {
    Dataset out = d;
    out.features = apply_scaler(s, d.features);
    return out;
}

CorrelationMatrix pearson_correlation(const Dataset& d, std::vector<std::string>* warnings) {
    if (d.size() < 2) throw ArgumentError("pearson_correlation: need at least 2 rows");
    const std::size_t p = d.features.cols();
    const auto means = column_means(d.features);
    const auto vars = column_variances(d.features);

    std::vector<std::uint8_t> degenerate(p, 0);
    for (std::size_t j = 0; j < p; ++j) {
        if (vars[j] <= 0.0 || std::sqrt(vars[j]) < 1e-12 * (1.0 + std::abs(means[j]))) {
            degenerate[j] = 1;
            if (warnings)
                warnings->push_back("zero-variance column '" + d.feature_names[j] +
                                    "': correlations set to 0");
        }
    }

    Matrix cov(p, p);
    for (std::size_t r = 0; r < d.size(); ++r) {
        const auto row = d.features.row(r);
        for (std::size_t i = 0; i < p; ++i) {
            const double di = row[i] - means[i];
            for (std::size_t j = i; j < p; ++j) cov(i, j) += di * (row[j] - means[j]);
        }
    }
    const double inv_n = 1.0 / static_cast<double>(d.size());

    CorrelationMatrix out;
    out.values = Matrix(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        out.values(i, i) = 1.0;
        for (std::size_t j = i + 1; j < p; ++j) {
            double r = 0.0;
            if (!degenerate[i] && !degenerate[j])
                r = cov(i, j) * inv_n / (std::sqrt(vars[i]) * std::sqrt(vars[j]));
            r = std::clamp(r, -1.0, 1.0);
            out.values(i, j) = r;
            out.values(j, i) = r;
        }
    }
    return out;
}

void write_correlation_csv(const CorrelationMatrix& corr,
                           const std::vector<std::string>& feature_names, std::ostream& out) {
    const std::size_t p = corr.values.rows();
    out << "feature";
    for (std::size_t j = 0; j < p; ++j) out << ',' << feature_names[j];
    out << '\n';
    for (std::size_t i = 0; i < p; ++i) {
        out << feature_names[i];
        for (std::size_t j = 0; j < p; ++j) out << ',' << format_value(corr.values(i, j));
        out << '\n';
    }
}

}  // namespace ctgml

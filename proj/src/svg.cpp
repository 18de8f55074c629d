#include "ctgml/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ctgml/errors.hpp"

namespace ctgml {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

int lerp_channel(int a, int b, double t) {
    return static_cast<int>(std::lround(a + (b - a) * t));
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

const std::string kSeriesColors[] = {"#4878a8", "#d65f5f", "#59a14f", "#b07aa1", "#e49444",
                                     "#76b7b2", "#9c755f"};

}  // namespace

std::string heatmap_color(double coefficient) {
    const double c = std::clamp(coefficient, -1.0, 1.0);
    // dark blue at -1, white at 0, dark red at +1
    int r, g, b;
    if (c < 0.0) {
        const double t = -c;
        r = lerp_channel(255, 5, t);
        g = lerp_channel(255, 48, t);
        b = lerp_channel(255, 97, t);
    } else {
        r = lerp_channel(255, 103, c);
        g = lerp_channel(255, 0, c);
        b = lerp_channel(255, 31, c);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "rgb(%d,%d,%d)", r, g, b);
    return buf;
}

void write_heatmap_svg(const Matrix& correlation, const std::vector<std::string>& names,
                       const std::filesystem::path& path) {
    const std::size_t n = correlation.rows();
    if (n == 0 || correlation.cols() != n) throw ArgumentError("write_heatmap_svg: square matrix required");
    if (names.size() != n) throw ArgumentError("write_heatmap_svg: name count mismatch");

    const double cell = 34.0;
    const double left = 250.0;
    const double top = 250.0;
    const double grid = cell * static_cast<double>(n);
    const double width = left + grid + 40.0;
    const double height = top + grid + 40.0;

    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << left + grid / 2 << "\" y=\"28\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"18\">Feature correlation</text>\n";

    for (std::size_t i = 0; i < n; ++i) {
        const double label_y = top + (static_cast<double>(i) + 0.5) * cell;
        out << "<text x=\"" << left - 6 << "\" y=\"" << fmt("%.1f", label_y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << escape_xml(names[i]) << "</text>\n";
        const double label_x = left + (static_cast<double>(i) + 0.5) * cell;
        out << "<text x=\"" << fmt("%.1f", label_x) << "\" y=\"" << top - 6
            << "\" text-anchor=\"start\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-60 "
            << fmt("%.1f", label_x) << " " << top - 6 << ")\">" << escape_xml(names[i]) << "</text>\n";
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = correlation(i, j);
            const double x = left + static_cast<double>(j) * cell;
            const double y = top + static_cast<double>(i) * cell;
            out << "<rect x=\"" << fmt("%.1f", x) << "\" y=\"" << fmt("%.1f", y) << "\" width=\""
                << cell << "\" height=\"" << cell << "\" fill=\"" << heatmap_color(v)
                << "\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n";
            const bool dark = std::abs(v) > 0.55;
            out << "<text x=\"" << fmt("%.1f", x + cell / 2) << "\" y=\"" << fmt("%.1f", y + cell / 2 + 3)
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"8\" fill=\""
                << (dark ? "white" : "black") << "\">" << fmt("%.2f", v) << "</text>\n";
        }
    }
    out << "</svg>\n";
    if (!out) throw IoError("failed writing " + path.string());
}

void write_accuracy_bars_svg(const std::vector<double>& fractions,
                             const std::vector<AccuracySeries>& series,
                             const std::filesystem::path& path) {
    if (fractions.empty() || series.empty())
        throw ArgumentError("write_accuracy_bars_svg: nothing to plot");
    for (const auto& s : series)
        if (s.accuracies.size() != fractions.size())
            throw ArgumentError("write_accuracy_bars_svg: series length mismatch");

    const double left = 70.0, top = 50.0, bottom = 70.0;
    const double plot_h = 360.0;
    const double group_w = 36.0 + 26.0 * static_cast<double>(series.size());
    const double plot_w = group_w * static_cast<double>(fractions.size());
    const double width = left + plot_w + 170.0;
    const double height = top + plot_h + bottom;

    double lo = 100.0, hi = 0.0;
    for (const auto& s : series)
        for (double a : s.accuracies)
            if (std::isfinite(a)) {
                lo = std::min(lo, a);
                hi = std::max(hi, a);
            }
    if (hi <= 0.0) {
        lo = 0.0;
        hi = 100.0;
    }
    double y_min = std::max(0.0, std::floor((lo - 5.0) / 10.0) * 10.0);
    double y_max = std::min(100.0, std::ceil((hi + 2.0) / 10.0) * 10.0);
    if (y_max - y_min < 10.0) y_max = std::min(100.0, y_min + 10.0);

    auto y_of = [&](double acc) { return top + plot_h * (1.0 - (acc - y_min) / (y_max - y_min)); };

    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"26\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">Test accuracy by train size</text>\n";

    for (double tick = y_min; tick <= y_max + 1e-9; tick += 10.0) {
        const double y = y_of(tick);
        out << "<line x1=\"" << left << "\" y1=\"" << fmt("%.1f", y) << "\" x2=\"" << left + plot_w
            << "\" y2=\"" << fmt("%.1f", y) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << fmt("%.1f", y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << fmt("%.0f", tick)
            << "</text>\n";
    }

    const double bar_w = 22.0;
    for (std::size_t f = 0; f < fractions.size(); ++f) {
        const double gx = left + group_w * static_cast<double>(f);
        for (std::size_t s = 0; s < series.size(); ++s) {
            const double a = series[s].accuracies[f];
            if (!std::isfinite(a)) continue;
            const double x = gx + 18.0 + 26.0 * static_cast<double>(s);
            const double y = y_of(a);
            out << "<rect x=\"" << fmt("%.1f", x) << "\" y=\"" << fmt("%.1f", y) << "\" width=\"" << bar_w
                << "\" height=\"" << fmt("%.1f", top + plot_h - y) << "\" fill=\""
                << kSeriesColors[s % std::size(kSeriesColors)] << "\"/>\n";
            out << "<text x=\"" << fmt("%.1f", x + bar_w / 2) << "\" y=\"" << fmt("%.1f", y - 4)
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">"
                << fmt("%.1f", a) << "</text>\n";
        }
        out << "<text x=\"" << fmt("%.1f", gx + group_w / 2) << "\" y=\"" << top + plot_h + 24
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
            << fmt("%.0f", fractions[f] * 100.0) << "%</text>\n";
    }

    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">train size</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const double y = top + 10.0 + 22.0 * static_cast<double>(s);
        out << "<rect x=\"" << left + plot_w + 20 << "\" y=\"" << fmt("%.1f", y) << "\" width=\"14\" "
            << "height=\"14\" fill=\"" << kSeriesColors[s % std::size(kSeriesColors)] << "\"/>\n";
        out << "<text x=\"" << left + plot_w + 40 << "\" y=\"" << fmt("%.1f", y + 11)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(series[s].label)
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace ctgml

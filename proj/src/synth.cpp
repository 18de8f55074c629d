#include "ctgml/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ctgml/errors.hpp"
#include "ctgml/rng.hpp"

namespace ctgml {

namespace {

double round_to(double v, int decimals) {
    const double f = std::pow(10.0, decimals);
    return std::nearbyint(v * f) / f;
}

double clip(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

struct RowSampler {
    Rng& rng;

    double gauss(double mean, double sd) { return mean + sd * rng.normal(); }
    bool chance(double p) { return rng.uniform() < p; }

    // tendency drawn from per-class probabilities for {-1, 0, +1}
    double tendency(double p_neg, double p_zero) {
        const double u = rng.uniform();
        if (u < p_neg) return -1.0;
        if (u < p_neg + p_zero) return 0.0;
        return 1.0;
    }

    std::array<double, kFeatureCount> sample(ClassLabel label) {
        // shared latent factors: trace variability, baseline level, histogram spread
        const double u = rng.normal();
        const double v = rng.normal();
        const double h = rng.normal();

        double baseline, accel, movement, contractions, light_dec, severe_dec, prolonged_dec;
        double astv, mstv, altv, mltv;
        double width, decel_drag, variance_scale, tend;

        switch (label) {
            case ClassLabel::Normal: {
                const bool active = chance(0.22);  // active-movement episodes
                baseline = 133.0 + 8.0 * v;
                accel = std::max(0.0, gauss(active ? 0.0065 : 0.0028, active ? 0.0018 : 0.0014));
                movement = active ? std::max(0.0, gauss(0.05, 0.06)) : std::max(0.0, gauss(0.0, 0.005));
                contractions = std::max(0.0, gauss(0.0044, 0.0029));
                light_dec = std::max(0.0, gauss(0.0012, 0.0018));
                severe_dec = chance(0.002) ? 0.001 : 0.0;
                prolonged_dec = chance(0.015) ? 0.001 : 0.0;
                astv = active ? 55.0 + 10.0 * u : 44.0 + 13.0 * u;
                mstv = clip(gauss(1.8, 0.65) - 0.25 * u, 0.4, 7.0);
                altv = active ? std::max(0.0, gauss(20.0, 10.0)) : std::max(0.0, gauss(4.0, 6.0));
                mltv = std::max(0.0, gauss(8.8, 4.6) + 0.8 * u);
                width = 68.0 + 34.0 * h;
                decel_drag = 0.0;
                variance_scale = 1.0;
                tend = tendency(0.06, 0.58);
                break;
            }
            case ClassLabel::Suspect: {
                const bool classic = chance(0.60);
                if (classic) {
                    baseline = 140.0 + 10.0 * v;
                    accel = std::max(0.0, gauss(0.0006, 0.0009));
                    movement = std::max(0.0, gauss(0.002, 0.010));
                    contractions = std::max(0.0, gauss(0.0036, 0.0028));
                    light_dec = std::max(0.0, gauss(0.0018, 0.0024));
                    severe_dec = chance(0.01) ? 0.001 : 0.0;
                    prolonged_dec = chance(0.06) ? 0.001 : 0.0;
                    astv = 64.0 + 9.5 * u;
                    mstv = clip(gauss(0.95, 0.42) - 0.15 * u, 0.2, 7.0);
                    altv = std::max(0.0, gauss(26.0, 13.0));
                    mltv = std::max(0.0, gauss(6.4, 3.8));
                    width = 50.0 + 26.0 * h;
                    decel_drag = 2.0;
                    variance_scale = 0.8;
                    tend = tendency(0.05, 0.52);
                } else {
                    // intermittent pattern: the variability measures and the
                    // acceleration rate move against each other while their
                    // marginals stay close to quiet traces, so the joint density
                    // carries most of the class signal
                    const double sgn = chance(0.5) ? 1.0 : -1.0;
                    baseline = 137.0 + 9.0 * v;
                    accel = std::max(0.0, gauss(0.0012 - 0.0007 * sgn, 0.0007));
                    movement = std::max(0.0, gauss(0.001, 0.008));
                    contractions = std::max(0.0, gauss(0.0036, 0.0028));
                    light_dec = std::max(0.0, gauss(0.0015, 0.0022));
                    severe_dec = chance(0.01) ? 0.001 : 0.0;
                    prolonged_dec = chance(0.04) ? 0.001 : 0.0;
                    astv = 44.0 + 19.0 * sgn + 3.2 * u;
                    mstv = clip(gauss(1.8 - 1.0 * sgn, 0.17), 0.2, 7.0);
                    altv = std::max(0.0, gauss(10.0, 8.0));
                    mltv = std::max(0.0, gauss(8.8 - 3.8 * sgn, 1.6));
                    width = 45.0 - 12.0 * sgn + 16.0 * h;
                    decel_drag = 2.0;
                    variance_scale = 0.8;
                    tend = tendency(0.05, 0.52);
                }
                break;
            }
            default: {  // Pathological: flat-trace or decelerative archetype
                const bool flat = chance(0.55);
                if (flat) {
                    baseline = 139.0 + 11.0 * v;
                    accel = std::max(0.0, gauss(0.0003, 0.0007));
                    movement = std::max(0.0, gauss(0.003, 0.02));
                    contractions = std::max(0.0, gauss(0.003, 0.0028));
                    light_dec = std::max(0.0, gauss(0.0007, 0.0013));
                    severe_dec = chance(0.03) ? 0.001 : 0.0;
                    prolonged_dec = chance(0.15) ? 0.001 : 0.0;
                    astv = 79.0 + 7.0 * u;
                    mstv = clip(gauss(0.40, 0.20), 0.2, 7.0);
                    altv = std::max(0.0, gauss(50.0, 17.0));
                    mltv = std::max(0.0, gauss(2.6, 2.3));
                    width = 17.0 + 9.0 * std::abs(h);
                    decel_drag = 1.0;
                    variance_scale = 0.5;
                } else {
                    baseline = 125.0 + 12.0 * v;
                    accel = std::max(0.0, gauss(0.0012, 0.0018));
                    movement = std::max(0.0, gauss(0.01, 0.05));
                    contractions = std::max(0.0, gauss(0.0052, 0.003));
                    light_dec = std::max(0.0, gauss(0.0058, 0.0028));
                    severe_dec = chance(0.15) ? 0.001 : 0.0;
                    prolonged_dec = chance(0.65) ? round_to(std::abs(gauss(0.0026, 0.0013)), 3) : 0.0;
                    astv = 52.0 + 14.0 * u;
                    mstv = clip(gauss(2.9, 1.1), 0.2, 7.0);
                    altv = std::max(0.0, gauss(12.0, 14.0));
                    mltv = std::max(0.0, gauss(6.5, 5.0));
                    width = 108.0 + 34.0 * h;
                    decel_drag = 16.0;
                    variance_scale = 2.4;
                }
                tend = tendency(0.28, 0.50);
                break;
            }
        }

        baseline = clip(std::nearbyint(baseline), 106, 160);
        width = clip(std::nearbyint(width), 3, 180);
        double hist_min = clip(std::nearbyint(baseline - 0.55 * width + gauss(0.0, 7.0)), 50, 159);
        double hist_max = hist_min + width;
        if (hist_max > 238.0) {
            hist_max = 238.0;
            width = hist_max - hist_min;
        }
        if (hist_max < 122.0) {
            hist_max = 122.0;
            width = hist_max - hist_min;
        }

        const double peaks = std::max(0.0, std::nearbyint(1.0 + width / 32.0 + gauss(0.0, 1.7)));
        const double zeroes = std::max(0.0, std::floor(gauss(-0.25, 0.75)));
        double mode = clip(std::nearbyint(baseline + gauss(3.0, 7.0)), 60, 187);
        double mean = clip(std::nearbyint(mode - 3.0 - decel_drag + gauss(0.0, 5.5)), 73, 182);
        double median = clip(std::nearbyint(mean + 3.5 + gauss(0.0, 4.0)), 77, 186);
        double variance = clip(
            std::nearbyint(variance_scale * std::pow(width / 10.0, 1.9) * std::abs(gauss(1.0, 0.45))),
            0, 269);

        return {
            baseline,
            round_to(clip(accel, 0.0, 0.019), 3),
            round_to(clip(movement, 0.0, 0.481), 3),
            round_to(clip(contractions, 0.0, 0.015), 3),
            round_to(clip(light_dec, 0.0, 0.015), 3),
            round_to(clip(severe_dec, 0.0, 0.001), 3),
            round_to(clip(prolonged_dec, 0.0, 0.005), 3),
            clip(std::nearbyint(astv), 12, 87),
            round_to(mstv, 1),
            clip(std::nearbyint(altv), 0, 91),
            round_to(clip(mltv, 0.0, 50.7), 1),
            width,
            hist_min,
            hist_max,
            peaks,
            zeroes,
            mode,
            mean,
            median,
            variance,
            tend,
        };
    }
};

}  // namespace

Dataset synthesize_ctg(std::size_t rows, std::uint64_t seed) {
    if (rows == 0) throw ArgumentError("synthesize_ctg: rows must be positive");

    // class mix of the public file: 1655 / 295 / 176 out of 2126
    const double p_normal = 1655.0 / 2126.0;
    const double p_suspect = 295.0 / 2126.0;
    auto n_normal = static_cast<std::size_t>(std::nearbyint(p_normal * static_cast<double>(rows)));
    auto n_suspect = static_cast<std::size_t>(std::nearbyint(p_suspect * static_cast<double>(rows)));
    n_normal = std::max<std::size_t>(1, std::min(n_normal, rows - 2));
    n_suspect = std::max<std::size_t>(1, std::min(n_suspect, rows - n_normal - 1));
    const std::size_t n_path = rows - n_normal - n_suspect;

    Rng rng(seed);
    RowSampler sampler{rng};

    Dataset out;
    out.features = Matrix(rows, kFeatureCount);
    out.labels.reserve(rows);
    out.feature_names.assign(canonical_feature_names().begin(), canonical_feature_names().end());

    std::size_t r = 0;
    auto emit = [&](ClassLabel label, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i, ++r) {
            const auto values = sampler.sample(label);
            std::copy(values.begin(), values.end(), out.features.row(r).begin());
            out.labels.push_back(label);
        }
    };
    emit(ClassLabel::Normal, n_normal);
    emit(ClassLabel::Suspect, n_suspect);
    emit(ClassLabel::Pathological, n_path);
    return out;
}

}  // namespace ctgml

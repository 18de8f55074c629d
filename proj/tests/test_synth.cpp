#include <cmath>

#include "ctgml/dataset.hpp"
#include "ctgml/errors.hpp"
#include "ctgml/synth.hpp"
#include "doctest.h"

using namespace ctgml;

TEST_CASE("synthetic recordings are deterministic per seed") {
    const Dataset a = synthesize_ctg(200, 11);
    const Dataset b = synthesize_ctg(200, 11);
    const Dataset c = synthesize_ctg(200, 12);
    CHECK(a.features.data() == b.features.data());
    CHECK(a.labels == b.labels);
    CHECK(a.features.data() != c.features.data());
}

TEST_CASE("synthetic recordings keep the public class mix and value ranges") {
    const Dataset d = synthesize_ctg(2126, 7);
    REQUIRE(d.size() == 2126);
    REQUIRE(d.feature_names.size() == kFeatureCount);

    const auto counts = d.class_counts();
    CHECK(counts[0] == 1655);
    CHECK(counts[1] == 295);
    CHECK(counts[2] == 176);

    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(d.features(i, 0) >= 106.0);  // baseline heart rate
        CHECK(d.features(i, 0) <= 160.0);
        CHECK(d.features(i, 1) >= 0.0);  // accelerations per second
        CHECK(d.features(i, 1) <= 0.019);
        for (std::size_t j = 0; j < kFeatureCount; ++j) CHECK(std::isfinite(d.features(i, j)));
    }
}

TEST_CASE("synthetic sizes stay consistent for small row counts") {
    const Dataset d = synthesize_ctg(10, 3);
    const auto counts = d.class_counts();
    CHECK(counts[0] + counts[1] + counts[2] == 10);
    CHECK(counts[2] >= 1);  // rarest class always represented
    CHECK_THROWS_AS(synthesize_ctg(0, 1), ArgumentError);
}

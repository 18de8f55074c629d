#include <cmath>
#include <sstream>
#include <vector>

#include "ctgml/dataset.hpp"
#include "ctgml/errors.hpp"
#include "ctgml/metrics.hpp"
#include "doctest.h"

using namespace ctgml;

TEST_CASE("confusion matrix counts true rows against predicted columns") {
    using enum ClassLabel;
    const std::vector<ClassLabel> truth{Normal, Normal, Suspect, Pathological, Suspect, Normal};
    const std::vector<ClassLabel> pred{Normal, Suspect, Suspect, Pathological, Normal, Normal};
    const ConfusionMatrix cm = confusion(truth, pred);

    CHECK(cm.counts[0][0] == 2);  // normal right
    CHECK(cm.counts[0][1] == 1);  // normal taken for suspect
    CHECK(cm.counts[1][0] == 1);  // suspect taken for normal
    CHECK(cm.counts[1][1] == 1);
    CHECK(cm.counts[2][2] == 1);
    CHECK(cm.total() == 6);
    CHECK(cm.trace() == 4);
    CHECK(accuracy_percent(cm) == doctest::Approx(100.0 * 4.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("confusion input validation") {
    const std::vector<ClassLabel> a{ClassLabel::Normal};
    const std::vector<ClassLabel> b{ClassLabel::Normal, ClassLabel::Suspect};
    CHECK_THROWS_AS(confusion(a, b), ArgumentError);
    CHECK_THROWS_AS(confusion({}, {}), ArgumentError);
    CHECK_THROWS_AS(accuracy_percent(ConfusionMatrix{}), ArgumentError);
}

TEST_CASE("per-class recall is NaN for classes absent from the evaluation") {
    ConfusionMatrix cm;
    cm.counts[0] = {8, 2, 0};
    cm.counts[1] = {1, 3, 0};
    cm.counts[2] = {0, 0, 0};  // no pathological rows
    const auto recall = per_class_recall(cm);
    CHECK(recall[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(recall[1] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(std::isnan(recall[2]));
}

TEST_CASE("rounding is half-up, not banker's") {
    CHECK(round_half_up(1.5, 0) == 2.0);
    CHECK(round_half_up(2.5, 0) == 3.0);   // round-half-even would give 2
    CHECK(round_half_up(-1.5, 0) == -1.0); // floor(x + 0.5) semantics
    CHECK(round_half_up(92.125, 2) == 92.13);
    CHECK(round_half_up(92.124, 2) == 92.12);
    CHECK(round_half_up(92.08, 2) == 92.08);
    CHECK(round_half_up(3.14159, 3) == 3.142);
}

TEST_CASE("confusion csv uses the fixed header and class names") {
    ConfusionMatrix cm;
    cm.counts[0] = {321, 10, 0};
    cm.counts[1] = {11, 46, 2};
    cm.counts[2] = {2, 4, 30};
    std::ostringstream out;
    write_confusion_csv(cm, out);
    CHECK(out.str() ==
          "true\\predicted,Normal,Suspect,Pathological\n"
          "Normal,321,10,0\n"
          "Suspect,11,46,2\n"
          "Pathological,2,4,30\n");
}

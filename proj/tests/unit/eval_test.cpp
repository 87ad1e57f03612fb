#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "bandselect/eval.hpp"
#include "bandselect/rng.hpp"
#include "support/fixtures.hpp"

using namespace bandselect;

namespace {

struct Fixture {
    GroundTruth gt;
    PixelSet test_pixels;
};

Fixture random_fixture(std::uint64_t seed, int n_classes) {
    Rng rng(seed);
    std::vector<int> labels(100);
    for (auto& l : labels)
        l = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n_classes) + 1));
    for (int c = 1; c <= n_classes; ++c) labels[static_cast<std::size_t>(c)] = c;
    Fixture f{GroundTruth::from_labels(10, 10, labels), {}};
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != 0 && rng.real01() < 0.5)
            f.test_pixels.indices.push_back(static_cast<PixelIndex>(i));
    if (f.test_pixels.indices.empty()) f.test_pixels.indices.push_back(1);
    return f;
}

}  // namespace

TEST_CASE("a perfect map scores 100 percent everywhere") {
    const Fixture f = random_fixture(1, 4);
    const ConfusionMatrix cm = evaluate(f.gt, f.gt.labels, f.test_pixels);
    CHECK(cm.overall_accuracy() == 1.0);
    for (int c = 1; c <= 4; ++c)
        if (cm.row_sum(c) > 0) CHECK(cm.per_class_accuracy(c) == 1.0);
}

TEST_CASE("a constant predictor is right only on its class") {
    const Fixture f = random_fixture(2, 3);
    const std::vector<int> constant(f.gt.labels.size(), 1);
    const ConfusionMatrix cm = evaluate(f.gt, constant, f.test_pixels);
    CHECK(cm.per_class_accuracy(1) == 1.0);
    for (int c = 2; c <= 3; ++c)
        if (cm.row_sum(c) > 0) CHECK(cm.per_class_accuracy(c) == 0.0);
}

TEST_CASE("evaluation rejects an empty test set") {
    const Fixture f = random_fixture(3, 3);
    CHECK_THROWS(evaluate(f.gt, f.gt.labels, PixelSet{}));
}

TEST_CASE("evaluation rejects unlabeled test pixels") {
    std::vector<int> labels{1, 0, 2, 2};
    const GroundTruth gt = GroundTruth::from_labels(2, 2, labels);
    PixelSet test;
    test.indices = {0, 1};
    CHECK_THROWS(evaluate(gt, labels, test));
}

TEST_CASE("confusion rows sum to the per-class test counts") {
    const Fixture f = random_fixture(4, 5);
    Rng rng(9);
    std::vector<int> c_est(f.gt.labels.size(), 1);
    for (auto& v : c_est) v = 1 + static_cast<int>(rng.bounded(5));
    const ConfusionMatrix cm = evaluate(f.gt, c_est, f.test_pixels);

    std::map<int, std::uint64_t> expected;
    for (PixelIndex p : f.test_pixels.indices) ++expected[f.gt.labels[p]];
    for (int c = 1; c <= 5; ++c) CHECK(cm.row_sum(c) == expected[c]);
    CHECK(cm.total() == f.test_pixels.indices.size());
}

TEST_CASE("overall accuracy is the count-weighted mean of class accuracies") {
    const Fixture f = random_fixture(5, 4);
    Rng rng(10);
    std::vector<int> c_est(f.gt.labels.size());
    for (auto& v : c_est) v = 1 + static_cast<int>(rng.bounded(4));
    const ConfusionMatrix cm = evaluate(f.gt, c_est, f.test_pixels);

    double weighted = 0.0;
    for (int c = 1; c <= 4; ++c)
        weighted += cm.per_class_accuracy(c) *
                    static_cast<double>(cm.row_sum(c));
    weighted /= static_cast<double>(cm.total());
    CHECK(std::abs(weighted - cm.overall_accuracy()) <= 1e-9);
}

TEST_CASE("rendering the ground truth preserves the class census") {
    const Fixture f = random_fixture(6, 4);
    const ClassMapImage image = render_map(f.gt.labels, 10, 10, 4);

    std::map<int, std::size_t> color_counts;
    for (int label : image.labels) ++color_counts[label];
    for (int c = 0; c <= 4; ++c)
        CHECK(color_counts[c] == f.gt.class_counts[static_cast<std::size_t>(c)]);
}

TEST_CASE("maps render deterministically as P6") {
    const Fixture f = random_fixture(7, 4);
    fixtures::TempDir dir;
    write_ppm(render_map(f.gt.labels, 10, 10, 4), dir.file("a.ppm"));
    write_ppm(render_map(f.gt.labels, 10, 10, 4), dir.file("b.ppm"));
    const std::string a = fixtures::read_bytes(dir.file("a.ppm"));
    CHECK(a == fixtures::read_bytes(dir.file("b.ppm")));
    CHECK(a.substr(0, 3) == "P6\n");
    CHECK(a.find("10 10\n255\n") != std::string::npos);
    CHECK(a.size() == std::string("P6\n10 10\n255\n").size() + 300);
}

TEST_CASE("an all-background map renders black") {
    const std::vector<int> zeros(9, 0);
    const ClassMapImage image = render_map(zeros, 3, 3, 4);
    fixtures::TempDir dir;
    write_ppm(image, dir.file("zeros.ppm"));
    const std::string bytes = fixtures::read_bytes(dir.file("zeros.ppm"));
    for (std::size_t i = bytes.size() - 27; i < bytes.size(); ++i)
        CHECK(bytes[i] == '\0');
}

TEST_CASE("out-of-range labels are rejected") {
    CHECK_THROWS(render_map({0, 5}, 1, 2, 4));
    CHECK_THROWS(render_map({-1, 0}, 1, 2, 4));
}

TEST_CASE("palette colors are distinct") {
    const auto palette = class_palette(20);
    std::set<std::tuple<int, int, int>> seen;
    for (const Rgb& c : palette) seen.insert({c.r, c.g, c.b});
    CHECK(seen.size() == palette.size());
}

TEST_CASE("sweep tables carry dashes for unreached counts") {
    const Fixture f = random_fixture(8, 3);
    SweepReport report;
    report.split_result.test = f.test_pixels;
    for (PixelIndex p = 0; p < 100; ++p)
        if (f.gt.labels[p] != 0 &&
            std::find(f.test_pixels.indices.begin(), f.test_pixels.indices.end(),
                      p) == f.test_pixels.indices.end())
            report.split_result.train.indices.push_back(p);

    SweepColumn reaches_three;
    reaches_three.threshold = 0.0;
    reaches_three.checkpoints = {{1, 50.0}, {2, 60.0}, {3, 70.0}};
    reaches_three.final_bands = {4, 2, 9};
    reaches_three.final_map = f.gt.labels;  // stand-in perfect map

    SweepColumn reaches_one;
    reaches_one.threshold = 0.03;
    reaches_one.checkpoints = {{1, 55.5}};
    // no final map: a column whose selection came up empty renders as dashes

    report.columns = {reaches_three, reaches_one};
    report.band_counts = {1, 2, 3};

    const SweepTables tables = table_report(report, f.gt);
    CHECK(tables.accuracy_csv.find("bands_retained,0.000,0.030") == 0);
    CHECK(tables.accuracy_csv.find("2,60.00,-") != std::string::npos);
    CHECK(tables.accuracy_csv.find("3,70.00,-") != std::string::npos);
    CHECK(tables.accuracy_csv.find("1,50.00,55.50") != std::string::npos);
    CHECK(tables.per_class_csv.find("class,total_pixels,test_pixels,"
                                    "low_confidence,0.000,0.030") == 0);
    CHECK(tables.per_class_csv.find("100.00,-") != std::string::npos);
    CHECK(!tables.accuracy_text.empty());
    CHECK(tables.per_class_text.find('*') != std::string::npos);

    CHECK_THROWS(table_report(SweepReport{}, f.gt));
}

TEST_CASE("the classification report prints overall and per-class accuracy") {
    const Fixture f = random_fixture(9, 3);
    const ConfusionMatrix cm = evaluate(f.gt, f.gt.labels, f.test_pixels);
    const std::string report = classification_report(cm, f.gt, f.test_pixels);
    CHECK(report.find("overall accuracy: 100.00%") != std::string::npos);

    const std::string csv = confusion_csv(cm);
    CHECK(csv.find("true_class,pred_1,pred_2,pred_3") == 0);
}

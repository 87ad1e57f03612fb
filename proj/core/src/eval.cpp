#include "bandselect/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bandselect {

namespace {

[[noreturn]] void fail(const std::string& message) {
    throw std::runtime_error(message);
}

std::string percent(double fraction) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2f", fraction * 100.0);
    return buffer;
}

std::string fixed2(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2f", v);
    return buffer;
}

std::string threshold_label(double th) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.3f", th);
    return buffer;
}

constexpr std::uint64_t kLowConfidenceTestCount = 15;

}  // namespace

std::uint64_t ConfusionMatrix::at(int true_class, int predicted_class) const {
    return counts[static_cast<std::size_t>(true_class - 1) *
                      static_cast<std::size_t>(n_classes) +
                  static_cast<std::size_t>(predicted_class - 1)];
}

std::uint64_t ConfusionMatrix::row_sum(int true_class) const {
    std::uint64_t sum = 0;
    for (int p = 1; p <= n_classes; ++p) sum += at(true_class, p);
    return sum;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t sum = 0;
    for (auto c : counts) sum += c;
    return sum;
}

double ConfusionMatrix::per_class_accuracy(int true_class) const {
    const std::uint64_t row = row_sum(true_class);
    if (row == 0) return 0.0;
    return static_cast<double>(at(true_class, true_class)) /
           static_cast<double>(row);
}

double ConfusionMatrix::overall_accuracy() const {
    const std::uint64_t all = total();
    if (all == 0) return 0.0;
    std::uint64_t diagonal = 0;
    for (int c = 1; c <= n_classes; ++c) diagonal += at(c, c);
    return static_cast<double>(diagonal) / static_cast<double>(all);
}

ConfusionMatrix evaluate(const GroundTruth& gt, const std::vector<int>& c_est,
                         const PixelSet& test_pixels) {
    if (test_pixels.indices.empty()) fail("evaluate: empty test set");
    if (c_est.size() != gt.labels.size())
        fail("evaluate: estimated map size does not match the grid");

    ConfusionMatrix cm;
    cm.n_classes = gt.n_classes;
    cm.counts.assign(static_cast<std::size_t>(gt.n_classes) *
                         static_cast<std::size_t>(gt.n_classes),
                     0);
    for (PixelIndex p : test_pixels.indices) {
        const int truth = gt.labels[p];
        if (truth == 0) fail("evaluate: test pixel " + std::to_string(p) +
                             " is unlabeled");
        const int predicted = c_est[p];
        if (predicted < 1 || predicted > gt.n_classes)
            fail("evaluate: prediction " + std::to_string(predicted) +
                 " outside 1.." + std::to_string(gt.n_classes));
        ++cm.counts[static_cast<std::size_t>(truth - 1) *
                        static_cast<std::size_t>(gt.n_classes) +
                    static_cast<std::size_t>(predicted - 1)];
    }
    return cm;
}

std::vector<Rgb> class_palette(int n_classes) {
    // background + a fixed qualitative table; hues beyond 16 classes are
    // golden-angle spaced so any class count stays deterministic
    static const Rgb fixed[16] = {
        {230, 25, 75},   {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
        {245, 130, 48},  {145, 30, 180},  {70, 240, 240}, {240, 50, 230},
        {210, 245, 60},  {250, 190, 212}, {0, 128, 128},  {220, 190, 255},
        {170, 110, 40},  {255, 250, 200}, {128, 0, 0},    {170, 255, 195}};
    std::vector<Rgb> palette;
    palette.push_back({0, 0, 0});
    for (int c = 0; c < n_classes; ++c) {
        if (c < 16) {
            palette.push_back(fixed[c]);
            continue;
        }
        const double hue = std::fmod(c * 137.508, 360.0) / 60.0;
        const double x = 1.0 - std::abs(std::fmod(hue, 2.0) - 1.0);
        double r = 0, g = 0, b = 0;
        switch (static_cast<int>(hue)) {
            case 0: r = 1; g = x; break;
            case 1: r = x; g = 1; break;
            case 2: g = 1; b = x; break;
            case 3: g = x; b = 1; break;
            case 4: r = x; b = 1; break;
            default: r = 1; b = x; break;
        }
        palette.push_back({static_cast<std::uint8_t>(std::lround(r * 255)),
                           static_cast<std::uint8_t>(std::lround(g * 255)),
                           static_cast<std::uint8_t>(std::lround(b * 255))});
    }
    return palette;
}

ClassMapImage render_map(const std::vector<int>& labels, std::size_t rows,
                         std::size_t cols, int n_classes) {
    if (labels.size() != rows * cols)
        fail("render map: label count does not match dimensions");
    for (int label : labels)
        if (label < 0 || label > n_classes)
            fail("render map: label " + std::to_string(label) + " outside 0.." +
                 std::to_string(n_classes));
    return ClassMapImage{rows, cols, labels, class_palette(n_classes)};
}

void write_ppm(const ClassMapImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write " + path.string());
    out << "P6\n" << image.cols << " " << image.rows << "\n255\n";
    std::vector<std::uint8_t> row(image.cols * 3);
    for (std::size_t r = 0; r < image.rows; ++r) {
        for (std::size_t c = 0; c < image.cols; ++c) {
            const Rgb& rgb =
                image.palette[static_cast<std::size_t>(image.labels[r * image.cols + c])];
            row[c * 3] = rgb.r;
            row[c * 3 + 1] = rgb.g;
            row[c * 3 + 2] = rgb.b;
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
}

namespace {

std::string padded(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

SweepTables table_report(const SweepReport& report, const GroundTruth& gt) {
    if (report.columns.empty()) fail("table report: empty sweep");

    SweepTables tables;

    // accuracy vs retained-band count, one column per threshold
    {
        std::ostringstream csv;
        std::ostringstream text;
        csv << "bands_retained";
        text << padded("bands", 8);
        for (const auto& column : report.columns) {
            csv << ',' << threshold_label(column.threshold);
            text << padded(threshold_label(column.threshold), 10);
        }
        csv << '\n';
        text << '\n';
        for (int count : report.band_counts) {
            csv << count;
            text << padded(std::to_string(count), 8);
            for (const auto& column : report.columns) {
                std::string cell = "-";
                for (const auto& [k, accuracy] : column.checkpoints)
                    if (k == count) cell = fixed2(accuracy);
                csv << ',' << cell;
                text << padded(cell, 10);
            }
            csv << '\n';
            text << '\n';
        }
        tables.accuracy_csv = csv.str();
        tables.accuracy_text = text.str();
    }

    // per-class accuracy at each threshold's final checkpoint
    {
        std::vector<std::uint64_t> test_counts(
            static_cast<std::size_t>(gt.n_classes) + 1, 0);
        for (PixelIndex p : report.split_result.test.indices)
            ++test_counts[static_cast<std::size_t>(gt.labels[p])];

        std::vector<ConfusionMatrix> confusions;
        std::vector<bool> has_map;
        for (const auto& column : report.columns) {
            if (column.final_map.empty()) {
                confusions.emplace_back();
                has_map.push_back(false);
            } else {
                confusions.push_back(
                    evaluate(gt, column.final_map, report.split_result.test));
                has_map.push_back(true);
            }
        }

        std::ostringstream csv;
        std::ostringstream text;
        csv << "class,total_pixels,test_pixels,low_confidence";
        text << padded("class", 6) << padded("pixels", 8) << padded("test", 6);
        for (const auto& column : report.columns) {
            csv << ',' << threshold_label(column.threshold);
            text << padded(threshold_label(column.threshold), 10);
        }
        csv << '\n';
        text << '\n';
        bool any_low_confidence = false;
        for (int c = 1; c <= gt.n_classes; ++c) {
            const std::uint64_t test_count =
                test_counts[static_cast<std::size_t>(c)];
            const bool low_confidence = test_count < kLowConfidenceTestCount;
            any_low_confidence |= low_confidence;
            csv << c << ',' << gt.class_counts[static_cast<std::size_t>(c)] << ','
                << test_count << ',' << (low_confidence ? 1 : 0);
            text << padded(std::to_string(c) + (low_confidence ? "*" : ""), 6)
                 << padded(std::to_string(gt.class_counts[static_cast<std::size_t>(c)]), 8)
                 << padded(std::to_string(test_count), 6);
            for (std::size_t k = 0; k < report.columns.size(); ++k) {
                const std::string cell =
                    has_map[k] ? percent(confusions[k].per_class_accuracy(c))
                               : std::string("-");
                csv << ',' << cell;
                text << padded(cell, 10);
            }
            csv << '\n';
            text << '\n';
        }
        if (any_low_confidence)
            text << "* fewer than " << kLowConfidenceTestCount
                 << " test pixels; accuracy is low-confidence\n";
        tables.per_class_csv = csv.str();
        tables.per_class_text = text.str();
    }

    return tables;
}

std::string classification_report(const ConfusionMatrix& cm,
                                  const GroundTruth& gt,
                                  const PixelSet& test_pixels) {
    std::vector<std::uint64_t> test_counts(
        static_cast<std::size_t>(gt.n_classes) + 1, 0);
    for (PixelIndex p : test_pixels.indices)
        ++test_counts[static_cast<std::size_t>(gt.labels[p])];

    std::ostringstream out;
    out << "overall accuracy: " << percent(cm.overall_accuracy()) << "% over "
        << cm.total() << " test pixels\n\n";
    out << padded("class", 6) << padded("pixels", 8) << padded("test", 6)
        << padded("accuracy", 10) << '\n';
    bool any_low_confidence = false;
    for (int c = 1; c <= gt.n_classes; ++c) {
        const bool low_confidence =
            test_counts[static_cast<std::size_t>(c)] < kLowConfidenceTestCount;
        any_low_confidence |= low_confidence;
        out << padded(std::to_string(c) + (low_confidence ? "*" : ""), 6)
            << padded(std::to_string(gt.class_counts[static_cast<std::size_t>(c)]), 8)
            << padded(std::to_string(test_counts[static_cast<std::size_t>(c)]), 6)
            << padded(percent(cm.per_class_accuracy(c)), 10) << '\n';
    }
    if (any_low_confidence)
        out << "* fewer than " << kLowConfidenceTestCount
            << " test pixels; accuracy is low-confidence\n";
    return out.str();
}

std::string confusion_csv(const ConfusionMatrix& cm) {
    std::ostringstream out;
    out << "true_class";
    for (int p = 1; p <= cm.n_classes; ++p) out << ",pred_" << p;
    out << '\n';
    for (int t = 1; t <= cm.n_classes; ++t) {
        out << t;
        for (int p = 1; p <= cm.n_classes; ++p) out << ',' << cm.at(t, p);
        out << '\n';
    }
    return out.str();
}

}  // namespace bandselect

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bandselect/classify.hpp"
#include "bandselect/hypercube.hpp"
#include "bandselect/selection.hpp"

namespace bandselect {

/// Row index = true class, column = predicted class (both 1-based classes
/// stored at index class-1). Per-class accuracy is diagonal over row sum.
struct ConfusionMatrix {
    int n_classes = 0;
    std::vector<std::uint64_t> counts;  // n_classes x n_classes

    std::uint64_t at(int true_class, int predicted_class) const;
    std::uint64_t row_sum(int true_class) const;
    std::uint64_t total() const;
    double per_class_accuracy(int true_class) const;  // in [0,1]
    double overall_accuracy() const;                  // in [0,1]
};

/// Confusion over the given test pixels only. Every test pixel must be
/// labeled in gt; c_est is a full-grid label map.
ConfusionMatrix evaluate(const GroundTruth& gt, const std::vector<int>& c_est,
                         const PixelSet& test_pixels);

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
};

/// Deterministic class palette: entry 0 is the background, entries 1..n are
/// distinct class colors (a fixed 16-color table, extended by evenly spaced
/// hues beyond that).
std::vector<Rgb> class_palette(int n_classes);

struct ClassMapImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<int> labels;
    std::vector<Rgb> palette;
};

ClassMapImage render_map(const std::vector<int>& labels, std::size_t rows,
                         std::size_t cols, int n_classes);

/// Binary PPM (P6).
void write_ppm(const ClassMapImage& image, const std::filesystem::path& path);

/// Accuracy-vs-band-count and per-class tables for a threshold sweep, shaped
/// as CSV plus an aligned-text rendition. Cells a threshold never reached
/// hold "-". Classes whose test count is below 15 are flagged low-confidence.
struct SweepTables {
    std::string accuracy_csv;
    std::string accuracy_text;
    std::string per_class_csv;
    std::string per_class_text;
};

SweepTables table_report(const SweepReport& report, const GroundTruth& gt);

/// Plain-text classification report: overall accuracy, per-class table, and
/// the confusion matrix.
std::string classification_report(const ConfusionMatrix& cm,
                                  const GroundTruth& gt,
                                  const PixelSet& test_pixels);

std::string confusion_csv(const ConfusionMatrix& cm);

}  // namespace bandselect

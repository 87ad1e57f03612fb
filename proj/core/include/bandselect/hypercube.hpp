#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace bandselect {

struct ValueRange {
    std::uint16_t min = 0;
    std::uint16_t max = 0;
};

/// A hyperspectral cube: rows x cols x n_bands unsigned 16-bit reflectance
/// samples stored band-sequential (one full image per band). Band indices
/// are 1-based everywhere in the public interface, matching the band
/// numbering used in curves, traces, and reports.
class HyperCube {
public:
    HyperCube(std::size_t rows, std::size_t cols, std::size_t n_bands,
              std::vector<std::uint16_t> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t n_bands() const { return n_bands_; }
    std::size_t n_pixels() const { return rows_ * cols_; }
    ValueRange value_range() const { return range_; }

    /// One band as a row-major rows*cols slice. band is 1-based.
    std::span<const std::uint16_t> band(int band_index) const;

    std::uint16_t at(std::size_t row, std::size_t col, int band_index) const;

    std::span<const std::uint16_t> raw_values() const { return values_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::size_t n_bands_;
    std::vector<std::uint16_t> values_;  // BSQ: band-major, then row-major
    ValueRange range_;
};

/// Per-pixel class labels over the same grid as a cube. Label 0 means
/// unlabeled; classes run 1..n_classes.
struct GroundTruth {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<int> labels;                 // row-major
    int n_classes = 0;                       // max label seen
    std::vector<std::size_t> class_counts;   // size n_classes + 1; [0] = unlabeled
    std::size_t labeled_total = 0;

    static GroundTruth from_labels(std::size_t rows, std::size_t cols,
                                   std::vector<int> labels);

    int label_at(std::size_t row, std::size_t col) const {
        return labels[row * cols + col];
    }
};

/// One real-valued image over the cube grid (a band slice or an averaged map).
struct BandImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major
};

/// Reads a cube described by an ASCII key=value header:
///   rows=145  cols=145  bands=220  dtype=u16le  interleave=bsq  data=<raw file>
/// The raw file is little-endian u16, band-sequential, resolved relative to
/// the header's directory.
HyperCube load_cube(const std::filesystem::path& header_path);

/// Writes header + raw data next to each other; raw_name is the data file
/// name placed in the header's directory.
void write_cube(const HyperCube& cube, const std::filesystem::path& header_path,
                const std::string& raw_name);

/// Reads a label grid. Accepts either a plain ASCII grid (rows lines of cols
/// integers) or an 8-bit PGM (P5 or P2) with labels as gray values.
GroundTruth load_ground_truth(const std::filesystem::path& path,
                              std::size_t expected_rows, std::size_t expected_cols);

void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path);

/// Per-pixel mean of an inclusive 1-based band range, kept as real values.
BandImage estimate_gt_by_average(const HyperCube& cube, int first_band,
                                 int last_band);

}  // namespace bandselect

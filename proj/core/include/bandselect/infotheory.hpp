#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bandselect/hypercube.hpp"

namespace bandselect {

/// Linear min-max quantizer. n_bins holds the configuration; min/max hold
/// the per-source range and are filled by fit(). A constant source
/// (min == max) maps every value to bin 0.
struct Quantizer {
    std::size_t n_bins = 256;
    double min = 0.0;
    double max = 0.0;

    static Quantizer fit(std::span<const double> values, std::size_t n_bins = 256);

    int bin(double v) const;
};

std::vector<int> quantize(std::span<const double> values, const Quantizer& q);

enum class Axis { A, B };

/// Joint occurrence counts of two bin sequences.
class JointHistogram {
public:
    JointHistogram(std::size_t bins_a, std::size_t bins_b);

    static JointHistogram from_bins(std::span<const int> a, std::span<const int> b,
                                    std::size_t bins_a, std::size_t bins_b);

    void add(int a, int b);

    std::uint64_t at(std::size_t i, std::size_t j) const {
        return counts_[i * bins_b_ + j];
    }
    std::size_t bins_a() const { return bins_a_; }
    std::size_t bins_b() const { return bins_b_; }
    std::uint64_t total() const { return total_; }

    JointHistogram transposed() const;

private:
    std::size_t bins_a_;
    std::size_t bins_b_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

/// Entropy of a count vector, in bits.
double entropy(std::span<const std::uint64_t> counts);

/// Marginal entropy of one axis, in bits.
double entropy(const JointHistogram& h, Axis which);

double joint_entropy(const JointHistogram& h);

/// I(A;B) = sum p(a,b) log2[ p(a,b) / (p(a) p(b)) ].
double mutual_information(const JointHistogram& h);

/// H(other | given) = H(A,B) - H(given).
double conditional_entropy(const JointHistogram& h, Axis given);

/// Fano bounds on classification error probability:
///   (H - 1) / log2(Nc)  <=  Pe  <=  H / log2(Nc)
/// where H is the conditional entropy of the class given the observation.
/// lower/upper are clamped into [0, 1]; the raw values are kept as well.
struct FanoBounds {
    double lower = 0.0;
    double upper = 0.0;
    double lower_raw = 0.0;
    double upper_raw = 0.0;
    double cond_entropy_bits = 0.0;
    int n_classes = 0;

    /// Unclamped interval width. Algebraically upper_raw - lower_raw
    /// simplifies to this constant.
    double width_raw() const;
};

FanoBounds fano_bounds(double cond_entropy_bits, int n_classes);

/// Per-band mutual information against a reference map. Index 0 holds band 1.
struct MICurve {
    std::vector<double> mi_bits;

    std::size_t n_bands() const { return mi_bits.size(); }
    double at_band(int band_index) const {
        return mi_bits[static_cast<std::size_t>(band_index - 1)];
    }

    /// Band indices sorted by descending MI, ties broken by lowest band.
    std::vector<int> descending_order() const;
};

/// MI of every band with the ground-truth classes. When labeled_only is set
/// (the default) only pixels with label != 0 enter the histograms, and each
/// band's quantization range is fit on those pixels.
MICurve mi_curve(const HyperCube& cube, const GroundTruth& reference,
                 const Quantizer& q, bool labeled_only = true);

/// MI of every band with a real-valued reference map (e.g. an averaged-band
/// estimate of the ground truth). The reference is quantized like a band.
/// With labeled_mask == nullptr every pixel is used.
MICurve mi_curve(const HyperCube& cube, const BandImage& reference,
                 const Quantizer& q, const GroundTruth* labeled_mask = nullptr);

/// CSV with columns band_index (1-based), mi_bits.
void write_mi_curve_csv(const MICurve& curve, const std::filesystem::path& path);

}  // namespace bandselect

#include "bandselect/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace bandselect {

namespace {

[[noreturn]] void fail(const std::string& message) {
    throw std::runtime_error(message);
}

}  // namespace

Quantizer Quantizer::fit(std::span<const double> values, std::size_t n_bins) {
    if (values.empty()) fail("quantizer: empty input");
    if (n_bins < 2) fail("quantizer: need at least 2 bins");
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return Quantizer{n_bins, *lo, *hi};
}

int Quantizer::bin(double v) const {
    if (!(max > min)) return 0;  // constant source
    const double scaled = (v - min) / (max - min) * static_cast<double>(n_bins);
    auto b = static_cast<long long>(std::floor(scaled));
    b = std::clamp<long long>(b, 0, static_cast<long long>(n_bins) - 1);
    return static_cast<int>(b);
}

std::vector<int> quantize(std::span<const double> values, const Quantizer& q) {
    if (values.empty()) fail("quantize: empty input");
    std::vector<int> bins(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) bins[i] = q.bin(values[i]);
    return bins;
}

JointHistogram::JointHistogram(std::size_t bins_a, std::size_t bins_b)
    : bins_a_(bins_a), bins_b_(bins_b), counts_(bins_a * bins_b, 0) {
    if (bins_a == 0 || bins_b == 0) fail("joint histogram: zero-sized axis");
}

JointHistogram JointHistogram::from_bins(std::span<const int> a,
                                         std::span<const int> b,
                                         std::size_t bins_a, std::size_t bins_b) {
    if (a.size() != b.size())
        fail("joint histogram: sequence length mismatch (" +
             std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    JointHistogram h(bins_a, bins_b);
    for (std::size_t i = 0; i < a.size(); ++i) h.add(a[i], b[i]);
    return h;
}

void JointHistogram::add(int a, int b) {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= bins_a_ ||
        static_cast<std::size_t>(b) >= bins_b_)
        fail("joint histogram: bin (" + std::to_string(a) + ", " +
             std::to_string(b) + ") outside " + std::to_string(bins_a_) + "x" +
             std::to_string(bins_b_));
    ++counts_[static_cast<std::size_t>(a) * bins_b_ + static_cast<std::size_t>(b)];
    ++total_;
}

JointHistogram JointHistogram::transposed() const {
    JointHistogram t(bins_b_, bins_a_);
    for (std::size_t i = 0; i < bins_a_; ++i)
        for (std::size_t j = 0; j < bins_b_; ++j)
            t.counts_[j * bins_a_ + i] = at(i, j);
    t.total_ = total_;
    return t;
}

double entropy(std::span<const std::uint64_t> counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) fail("entropy: empty distribution");
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

namespace {

std::vector<std::uint64_t> marginal(const JointHistogram& h, Axis which) {
    const std::size_t n = which == Axis::A ? h.bins_a() : h.bins_b();
    std::vector<std::uint64_t> m(n, 0);
    for (std::size_t i = 0; i < h.bins_a(); ++i)
        for (std::size_t j = 0; j < h.bins_b(); ++j)
            m[which == Axis::A ? i : j] += h.at(i, j);
    return m;
}

}  // namespace

double entropy(const JointHistogram& h, Axis which) {
    if (h.total() == 0) fail("entropy: empty histogram");
    return entropy(marginal(h, which));
}

namespace {

// Accumulating in sorted order makes the sum independent of cell iteration
// order, so transposing the histogram cannot move the result by an ulp.
double ordered_sum(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    double acc = 0.0;
    for (double t : terms) acc += t;
    return acc;
}

}  // namespace

double joint_entropy(const JointHistogram& h) {
    if (h.total() == 0) fail("entropy: empty histogram");
    const double total = static_cast<double>(h.total());
    std::vector<double> terms;
    for (std::size_t i = 0; i < h.bins_a(); ++i)
        for (std::size_t j = 0; j < h.bins_b(); ++j) {
            const auto c = h.at(i, j);
            if (c == 0) continue;
            const double p = static_cast<double>(c) / total;
            terms.push_back(-p * std::log2(p));
        }
    return ordered_sum(terms);
}

double mutual_information(const JointHistogram& h) {
    if (h.total() == 0) fail("mutual information: empty histogram");
    const auto row = marginal(h, Axis::A);
    const auto col = marginal(h, Axis::B);
    const double total = static_cast<double>(h.total());
    std::vector<double> terms;
    for (std::size_t i = 0; i < h.bins_a(); ++i) {
        if (row[i] == 0) continue;
        for (std::size_t j = 0; j < h.bins_b(); ++j) {
            const auto c = h.at(i, j);
            if (c == 0) continue;
            const double p = static_cast<double>(c) / total;
            // p(a,b) / (p(a) p(b)) with the totals folded together
            const double ratio = static_cast<double>(c) * total /
                                 (static_cast<double>(row[i]) *
                                  static_cast<double>(col[j]));
            terms.push_back(p * std::log2(ratio));
        }
    }
    return ordered_sum(terms);
}

double conditional_entropy(const JointHistogram& h, Axis given) {
    if (h.total() == 0) fail("conditional entropy: empty histogram");
    return joint_entropy(h) - entropy(h, given);
}

double FanoBounds::width_raw() const {
    // upper_raw - lower_raw = (H - (H - 1)) / log2(Nc); the algebraic form
    // avoids the cancellation of the direct subtraction
    return 1.0 / std::log2(static_cast<double>(n_classes));
}

FanoBounds fano_bounds(double cond_entropy_bits, int n_classes) {
    if (n_classes < 2)
        fail("fano bounds: need at least 2 classes, got " +
             std::to_string(n_classes));
    if (cond_entropy_bits < 0.0) {
        if (cond_entropy_bits < -1e-9)
            fail("fano bounds: negative conditional entropy");
        cond_entropy_bits = 0.0;
    }
    const double log2_nc = std::log2(static_cast<double>(n_classes));
    FanoBounds fb;
    fb.cond_entropy_bits = cond_entropy_bits;
    fb.n_classes = n_classes;
    fb.lower_raw = (cond_entropy_bits - 1.0) / log2_nc;
    fb.upper_raw = cond_entropy_bits / log2_nc;
    fb.lower = std::max(0.0, fb.lower_raw);
    fb.upper = std::min(1.0, fb.upper_raw);
    return fb;
}

std::vector<int> MICurve::descending_order() const {
    std::vector<int> order(n_bands());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<int>(i) + 1;
    std::stable_sort(order.begin(), order.end(), [this](int a, int b) {
        return at_band(a) > at_band(b);
    });
    return order;
}

namespace {

// Pixels entering the MI estimate; empty mask means all pixels.
std::vector<std::size_t> used_pixels(std::size_t n_pixels,
                                     const GroundTruth* labeled_mask) {
    std::vector<std::size_t> used;
    if (labeled_mask == nullptr) {
        used.resize(n_pixels);
        for (std::size_t i = 0; i < n_pixels; ++i) used[i] = i;
        return used;
    }
    for (std::size_t i = 0; i < n_pixels; ++i)
        if (labeled_mask->labels[i] != 0) used.push_back(i);
    return used;
}

// MI of each band against a fixed reference bin sequence.
MICurve per_band_mi(const HyperCube& cube, const std::vector<std::size_t>& pixels,
                    const std::vector<int>& reference_bins,
                    std::size_t reference_bin_count, std::size_t n_bins) {
    MICurve curve;
    curve.mi_bits.assign(cube.n_bands(), 0.0);
    const int n_bands = static_cast<int>(cube.n_bands());
#pragma omp parallel for schedule(dynamic)
    for (int b = 1; b <= n_bands; ++b) {
        const auto slice = cube.band(b);
        std::vector<double> values(pixels.size());
        for (std::size_t k = 0; k < pixels.size(); ++k)
            values[k] = static_cast<double>(slice[pixels[k]]);
        const Quantizer fitted = Quantizer::fit(values, n_bins);
        const std::vector<int> bins = quantize(values, fitted);
        const JointHistogram joint = JointHistogram::from_bins(
            bins, reference_bins, n_bins, reference_bin_count);
        curve.mi_bits[static_cast<std::size_t>(b - 1)] = mutual_information(joint);
    }
    return curve;
}

}  // namespace

MICurve mi_curve(const HyperCube& cube, const GroundTruth& reference,
                 const Quantizer& q, bool labeled_only) {
    if (reference.rows != cube.rows() || reference.cols != cube.cols())
        fail("mi curve: reference dimensions do not match the cube");
    const auto pixels =
        used_pixels(cube.n_pixels(), labeled_only ? &reference : nullptr);
    if (pixels.empty()) fail("mi curve: no pixels to use");

    // class labels are already discrete; bins 0..n_classes
    std::vector<int> reference_bins(pixels.size());
    for (std::size_t k = 0; k < pixels.size(); ++k)
        reference_bins[k] = reference.labels[pixels[k]];
    return per_band_mi(cube, pixels, reference_bins,
                       static_cast<std::size_t>(reference.n_classes) + 1,
                       q.n_bins);
}

MICurve mi_curve(const HyperCube& cube, const BandImage& reference,
                 const Quantizer& q, const GroundTruth* labeled_mask) {
    if (reference.rows != cube.rows() || reference.cols != cube.cols())
        fail("mi curve: reference dimensions do not match the cube");
    const auto pixels = used_pixels(cube.n_pixels(), labeled_mask);
    if (pixels.empty()) fail("mi curve: no pixels to use");

    std::vector<double> reference_values(pixels.size());
    for (std::size_t k = 0; k < pixels.size(); ++k)
        reference_values[k] = reference.values[pixels[k]];
    const Quantizer fitted = Quantizer::fit(reference_values, q.n_bins);
    const std::vector<int> reference_bins = quantize(reference_values, fitted);
    return per_band_mi(cube, pixels, reference_bins, q.n_bins, q.n_bins);
}

void write_mi_curve_csv(const MICurve& curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail("cannot write " + path.string());
    out << "band_index,mi_bits\n";
    char buffer[64];
    for (std::size_t i = 0; i < curve.n_bands(); ++i) {
        std::snprintf(buffer, sizeof(buffer), "%zu,%.12g\n", i + 1,
                      curve.mi_bits[i]);
        out << buffer;
    }
}

}  // namespace bandselect

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bandselect/classify.hpp"
#include "bandselect/hypercube.hpp"
#include "bandselect/infotheory.hpp"

namespace bandselect {

/// MI-ranked filter selection with rejection bandwidth.
struct FilterParams {
    int target_count = 1;   // X: number of bands to select
    int bandwidth = 1;      // B: neighbor radius around each pick
    double threshold = 0.0; // MI-difference cutoff, bits
};

/// Fano-bound wrapper selection with complementary threshold.
struct WrapperParams {
    int target_count = 1;             // X
    double threshold = 0.0;           // Th; negative values accept everything
    std::optional<double> pe_init;    // default: Fano upper bound of the
                                      // constant predictor, H(C)/log2(Nc)
};

enum class Decision { accepted, rejected };

struct TraceEntry {
    int step = 0;   // 1-based visit order
    int band = 0;   // 1-based
    double mi_bits = 0.0;
    double pe_before = 0.0;   // NaN for filter selection
    double pe_after = 0.0;    // NaN for filter selection
    double fano_lower = 0.0;  // clamped bounds at this step; NaN for filter
    double fano_upper = 0.0;
    double accuracy = 0.0;    // test accuracy of the tentative subset; NaN for filter
    Decision decision = Decision::rejected;
    std::string reason;
};

struct SelectionResult {
    std::vector<int> selected;  // 1-based, in acceptance order
    std::vector<TraceEntry> trace;
    std::map<std::string, std::string> params;  // snapshot for the summary
    std::string stop_reason;
    double pe_init = 0.0;   // wrapper only
    double pe_final = 0.0;  // wrapper only
};

/// Algorithm: repeatedly pick the top-MI band S among the remaining set; its
/// radius-B neighbors are discarded as redundant when every curve difference
/// |MI(n) - MI(n-1)| across the window {S-B..S+B} stays below the threshold.
/// S itself is always retained. Stops at target_count or when the remaining
/// set empties (recorded, not an error).
SelectionResult select_filter(const MICurve& curve, const FilterParams& params);

/// Fano-bound wrapper: bands are visited in descending MI(band; GT) order.
/// Each candidate is tentatively added, a classifier is trained on the
/// training split restricted to the tentative subset, and the error proxy
/// Pe = H(C | C_est) / log2(Nc) is measured on the test pixels. The candidate
/// stays only if Pe <= Pe* - Th; accepted steps update Pe*.
SelectionResult select_fano(const HyperCube& cube, const GroundTruth& gt,
                            const WrapperParams& params, const TrainerFn& trainer,
                            const SplitResult& split_result, const MICurve& curve);

SelectionResult select_fano(const HyperCube& cube, const GroundTruth& gt,
                            const WrapperParams& params,
                            const ClassifierConfig& classifier,
                            const SplitSpec& split_spec,
                            const Quantizer& q = Quantizer{});

struct SweepColumn {
    double threshold = 0.0;
    SelectionResult result;
    // (band count, overall test accuracy in percent) at every accepted step
    std::vector<std::pair<int, double>> checkpoints;
    std::vector<int> final_bands;
    std::vector<int> final_map;  // full-grid estimated map at the last checkpoint
};

struct SweepReport {
    std::vector<SweepColumn> columns;
    std::vector<int> band_counts;  // sorted union of checkpoint counts
    SplitResult split_result;      // shared by all columns
};

/// Runs the wrapper once per threshold over a shared split and MI ordering,
/// recording an accuracy checkpoint at every accepted band count.
SweepReport threshold_sweep(const HyperCube& cube, const GroundTruth& gt,
                            std::span<const double> thresholds, int target_count,
                            const ClassifierConfig& classifier,
                            const SplitSpec& split_spec,
                            const Quantizer& q = Quantizer{});

/// CSV trace: step, band, mi_bits, pe_before, pe_after, decision, reason,
/// fano_lower, fano_upper, accuracy. Empty cells for values a step does not
/// have.
void write_trace_csv(const SelectionResult& result,
                     const std::filesystem::path& path);

/// JSON summary: params snapshot, selected bands, stop reason, Pe endpoints.
void write_summary_json(const SelectionResult& result,
                        const std::filesystem::path& path);

}  // namespace bandselect

#include "bandselect/selection.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace bandselect {

namespace {

[[noreturn]] void fail(const std::string& message) {
    throw std::runtime_error(message);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", v);
    return buffer;
}

}  // namespace

SelectionResult select_filter(const MICurve& curve, const FilterParams& params) {
    if (curve.n_bands() == 0) fail("select_filter: empty curve");
    if (params.target_count < 1) fail("select_filter: target count must be >= 1");
    if (params.bandwidth < 0) fail("select_filter: bandwidth must be >= 0");
    if (!std::isfinite(params.threshold))
        fail("select_filter: threshold must be finite");

    const int n = static_cast<int>(curve.n_bands());
    std::vector<bool> remaining(static_cast<std::size_t>(n) + 1, true);
    int remaining_count = n;

    SelectionResult result;
    result.params = {{"algorithm", "filter"},
                     {"target_count", std::to_string(params.target_count)},
                     {"bandwidth", std::to_string(params.bandwidth)},
                     {"threshold", format_double(params.threshold)}};

    int step = 0;
    while (static_cast<int>(result.selected.size()) < params.target_count &&
           remaining_count > 0) {
        // argmax MI over the remaining set, ties to the lowest band
        int pick = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (int b = 1; b <= n; ++b) {
            if (!remaining[static_cast<std::size_t>(b)]) continue;
            if (curve.at_band(b) > best) {
                best = curve.at_band(b);
                pick = b;
            }
        }

        std::vector<int> neighbors;
        for (int b = pick - params.bandwidth; b <= pick + params.bandwidth; ++b) {
            if (b == pick || b < 1 || b > n) continue;
            if (remaining[static_cast<std::size_t>(b)]) neighbors.push_back(b);
        }

        // max |MI(n) - MI(n-1)| over the window {pick-B .. pick+B}; the
        // differences read the raw curve, so already-removed bands still
        // anchor them. A flat window marks the neighbors as redundant.
        double max_difference = 0.0;
        std::vector<int> window = neighbors;
        window.push_back(pick);
        for (int b : window) {
            if (b < 2) continue;
            max_difference = std::max(
                max_difference, std::abs(curve.at_band(b) - curve.at_band(b - 1)));
        }
        const bool discard_neighbors = max_difference < params.threshold;

        remaining[static_cast<std::size_t>(pick)] = false;
        --remaining_count;
        result.selected.push_back(pick);
        result.trace.push_back({++step, pick, curve.at_band(pick), kNaN, kNaN,
                                kNaN, kNaN, kNaN, Decision::accepted,
                                "top mutual information"});

        if (discard_neighbors) {
            std::sort(neighbors.begin(), neighbors.end());
            for (int b : neighbors) {
                remaining[static_cast<std::size_t>(b)] = false;
                --remaining_count;
                result.trace.push_back({++step, b, curve.at_band(b), kNaN, kNaN,
                                        kNaN, kNaN, kNaN, Decision::rejected,
                                        "redundant neighbor of band " +
                                            std::to_string(pick)});
            }
        }
    }

    result.stop_reason =
        static_cast<int>(result.selected.size()) >= params.target_count
            ? "target reached"
            : "remaining set exhausted";
    return result;
}

namespace {

struct CandidateEval {
    double pe = 0.0;
    double fano_lower = 0.0;
    double fano_upper = 0.0;
    double accuracy = 0.0;
    std::vector<int> map;
};

CandidateEval evaluate_candidate(const HyperCube& cube, const GroundTruth& gt,
                                 std::span<const int> bands,
                                 const TrainerFn& trainer,
                                 const SplitResult& split_result) {
    const PixelDataset training =
        PixelDataset::from_cube(cube, gt, split_result.train, bands);
    ClassifierModel model = trainer(training);

    CandidateEval eval;
    eval.map = build_estimated_map(cube, gt, bands, model);

    const int nc = gt.n_classes;
    JointHistogram joint(static_cast<std::size_t>(nc),
                         static_cast<std::size_t>(nc));
    std::uint64_t correct = 0;
    for (PixelIndex p : split_result.test.indices) {
        const int truth = gt.labels[p];
        const int predicted = eval.map[p];
        joint.add(truth - 1, predicted - 1);
        if (truth == predicted) ++correct;
    }

    const double hce = std::max(0.0, conditional_entropy(joint, Axis::B));
    const FanoBounds fb = fano_bounds(hce, nc);
    eval.pe = fb.upper;
    eval.fano_lower = fb.lower;
    eval.fano_upper = fb.upper;
    eval.accuracy = static_cast<double>(correct) /
                    static_cast<double>(split_result.test.indices.size());
    return eval;
}

double default_pe_init(const GroundTruth& gt, const SplitResult& split_result) {
    // Fano upper bound of a constant predictor: H(C | const) = H(C), measured
    // on the evaluation pixels.
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(gt.n_classes), 0);
    for (PixelIndex p : split_result.test.indices)
        ++counts[static_cast<std::size_t>(gt.labels[p] - 1)];
    return fano_bounds(entropy(counts), gt.n_classes).upper;
}

}  // namespace

SelectionResult select_fano(const HyperCube& cube, const GroundTruth& gt,
                            const WrapperParams& params, const TrainerFn& trainer,
                            const SplitResult& split_result,
                            const MICurve& curve) {
    if (gt.n_classes < 2) fail("select_fano: need at least 2 classes");
    if (params.target_count < 1) fail("select_fano: target count must be >= 1");
    if (curve.n_bands() != cube.n_bands())
        fail("select_fano: curve does not match the cube");
    if (split_result.test.indices.empty()) fail("select_fano: empty test split");

    double pe_star = params.pe_init ? *params.pe_init
                                    : default_pe_init(gt, split_result);
    if (pe_star < 0.0 || pe_star > 1.0)
        fail("select_fano: initial error proxy must lie in [0, 1]");

    SelectionResult result;
    result.pe_init = pe_star;
    result.params = {
        {"algorithm", "fano"},
        {"target_count", std::to_string(params.target_count)},
        {"threshold", format_double(params.threshold)},
        {"pe_init", format_double(pe_star)},
        {"n_classes", std::to_string(gt.n_classes)},
        {"pe_interval_width",
         format_double(1.0 / std::log2(static_cast<double>(gt.n_classes)))}};

    std::vector<int> subset;
    int step = 0;
    for (int band : curve.descending_order()) {
        if (static_cast<int>(subset.size()) >= params.target_count) break;

        std::vector<int> candidate = subset;
        candidate.push_back(band);

        CandidateEval eval;
        try {
            eval = evaluate_candidate(cube, gt, candidate, trainer, split_result);
        } catch (const std::exception& e) {
            fail("select_fano: candidate band " + std::to_string(band) +
                 ": " + e.what());
        }

        const bool accept = eval.pe <= pe_star - params.threshold;
        result.trace.push_back({++step, band, curve.at_band(band), pe_star,
                                eval.pe, eval.fano_lower, eval.fano_upper,
                                eval.accuracy,
                                accept ? Decision::accepted : Decision::rejected,
                                accept ? "sufficient decrease"
                                       : "insufficient decrease"});
        if (accept) {
            subset = std::move(candidate);
            pe_star = eval.pe;
        }
    }

    result.selected = subset;
    result.pe_final = pe_star;
    result.stop_reason =
        static_cast<int>(subset.size()) >= params.target_count
            ? "target reached"
            : "band list exhausted";
    return result;
}

SelectionResult select_fano(const HyperCube& cube, const GroundTruth& gt,
                            const WrapperParams& params,
                            const ClassifierConfig& classifier,
                            const SplitSpec& split_spec, const Quantizer& q) {
    const SplitResult split_result = split(gt, split_spec);
    const MICurve curve = mi_curve(cube, gt, q, true);
    SelectionResult result = select_fano(cube, gt, params, make_trainer(classifier),
                                         split_result, curve);
    result.params["classifier"] = classifier.type;
    result.params["regularization"] = format_double(classifier.regularization);
    result.params["split_fraction"] = format_double(split_spec.train_fraction);
    result.params["split_seed"] = std::to_string(split_spec.seed);
    result.params["bins"] = std::to_string(q.n_bins);
    return result;
}

SweepReport threshold_sweep(const HyperCube& cube, const GroundTruth& gt,
                            std::span<const double> thresholds, int target_count,
                            const ClassifierConfig& classifier,
                            const SplitSpec& split_spec, const Quantizer& q) {
    if (thresholds.empty()) fail("threshold sweep: empty threshold list");
    if (target_count <= 0) target_count = static_cast<int>(cube.n_bands());

    SweepReport report;
    report.split_result = split(gt, split_spec);
    const MICurve curve = mi_curve(cube, gt, q, true);
    const TrainerFn trainer = make_trainer(classifier);

    for (double th : thresholds) {
        SweepColumn column;
        column.threshold = th;
        column.result = select_fano(cube, gt, WrapperParams{target_count, th, {}},
                                    trainer, report.split_result, curve);
        int count = 0;
        for (const auto& entry : column.result.trace)
            if (entry.decision == Decision::accepted)
                column.checkpoints.emplace_back(++count, entry.accuracy * 100.0);
        column.final_bands = column.result.selected;
        if (!column.final_bands.empty()) {
            const CandidateEval final_eval = evaluate_candidate(
                cube, gt, column.final_bands, trainer, report.split_result);
            column.final_map = final_eval.map;
        }
        report.columns.push_back(std::move(column));
    }

    std::vector<int> counts;
    for (const auto& column : report.columns)
        for (const auto& [count, accuracy] : column.checkpoints)
            counts.push_back(count);
    std::sort(counts.begin(), counts.end());
    counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
    report.band_counts = std::move(counts);
    return report;
}

void write_trace_csv(const SelectionResult& result,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail("cannot write " + path.string());
    out << "step,band,mi_bits,pe_before,pe_after,decision,reason,"
           "fano_lower,fano_upper,accuracy\n";
    auto cell = [](double v) { return std::isnan(v) ? std::string{} : format_double(v); };
    for (const auto& entry : result.trace) {
        out << entry.step << ',' << entry.band << ',' << format_double(entry.mi_bits)
            << ',' << cell(entry.pe_before) << ',' << cell(entry.pe_after) << ','
            << (entry.decision == Decision::accepted ? "accepted" : "rejected")
            << ',' << entry.reason << ',' << cell(entry.fano_lower) << ','
            << cell(entry.fano_upper) << ',' << cell(entry.accuracy) << '\n';
    }
}

void write_summary_json(const SelectionResult& result,
                        const std::filesystem::path& path) {
    nlohmann::ordered_json summary;
    summary["params"] = result.params;
    summary["selected"] = result.selected;
    int accepted = 0;
    int rejected = 0;
    for (const auto& entry : result.trace)
        (entry.decision == Decision::accepted ? accepted : rejected) += 1;
    summary["n_accepted"] = accepted;
    summary["n_rejected"] = rejected;
    summary["stop_reason"] = result.stop_reason;
    if (result.params.count("algorithm") &&
        result.params.at("algorithm") == "fano") {
        summary["pe_init"] = result.pe_init;
        summary["pe_final"] = result.pe_final;
    }
    std::ofstream out(path);
    if (!out) fail("cannot write " + path.string());
    out << summary.dump(2) << '\n';
}

}  // namespace bandselect

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bandselect/classify.hpp"
#include "bandselect/infotheory.hpp"

namespace bandselect {

/// Resolved run configuration: one flat key=value file plus command-line
/// overrides. Every command writes the resolved snapshot next to its outputs
/// so a run can be reproduced from the output directory alone.
struct ExperimentConfig {
    std::filesystem::path cube_path;
    std::filesystem::path gt_path;
    std::filesystem::path output_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;

    std::size_t bins = 256;
    bool labeled_only = true;

    ClassifierConfig classifier;
    SplitSpec split;

    std::string algorithm = "fano";  // select: "filter" or "fano"
    int target_count = 0;            // 0 = all bands
    int bandwidth = 1;               // filter B
    double filter_threshold = 0.02;
    double th = 0.0;                 // wrapper complementary threshold
    std::optional<double> pe_init;

    std::vector<double> thresholds;         // sweep
    std::vector<int> bands;                 // classify, 1-based
    std::optional<std::pair<int, int>> band_range;  // mi-curve averaged reference
    std::filesystem::path synth_spec_path;  // synth

    /// Parses the file, then applies "key=value" overrides in order. The
    /// BANDSELECT_OUTPUT_DIR environment variable, when set, replaces the
    /// output directory last.
    static ExperimentConfig load(const std::filesystem::path& config_path,
                                 const std::vector<std::string>& overrides = {});

    /// Key=value view of every setting, used for the resolved snapshot.
    std::map<std::string, std::string> resolved() const;
};

/// Commands. Each writes its outputs under config.output_dir, plus
/// resolved_config.txt and an appended run.log (the only file that carries
/// timestamps). On error every file the run created except run.log is
/// removed and the error is rethrown.
void cmd_mi_curve(const ExperimentConfig& config);
void cmd_select(const ExperimentConfig& config, const std::string& algorithm);
void cmd_sweep(const ExperimentConfig& config);
void cmd_classify(const ExperimentConfig& config);
void cmd_synth(const ExperimentConfig& config);

}  // namespace bandselect

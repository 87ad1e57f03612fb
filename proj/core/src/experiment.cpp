#include "bandselect/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "bandselect/eval.hpp"
#include "bandselect/selection.hpp"
#include "bandselect/synthetic.hpp"

namespace bandselect {

namespace {

namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& message) {
    throw std::runtime_error(message);
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    fail("config: " + key + " must be true/false, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        auto comma = value.find(',', pos);
        if (comma == std::string::npos) comma = value.size();
        const std::string item = trim(value.substr(pos, comma - pos));
        if (!item.empty()) items.push_back(item);
        pos = comma + 1;
    }
    return items;
}

std::string format_double(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", v);
    return buffer;
}

void apply_setting(ExperimentConfig& config, const std::string& key,
                   const std::string& value) {
    if (key == "cube") {
        config.cube_path = value;
    } else if (key == "gt") {
        config.gt_path = value;
    } else if (key == "out") {
        config.output_dir = value;
    } else if (key == "seed") {
        config.seed = std::stoull(value);
        config.seed_set = true;
    } else if (key == "bins") {
        config.bins = std::stoull(value);
    } else if (key == "labeled_only") {
        config.labeled_only = parse_bool(value, key);
    } else if (key == "classifier") {
        config.classifier.type = value;
    } else if (key == "regularization") {
        config.classifier.regularization = std::stod(value);
    } else if (key == "solver_iterations") {
        config.classifier.solver_iterations = std::stoi(value);
    } else if (key == "split_fraction") {
        config.split.train_fraction = std::stod(value);
    } else if (key == "stratified") {
        config.split.stratified = parse_bool(value, key);
    } else if (key == "algorithm") {
        config.algorithm = value;
    } else if (key == "target_count") {
        config.target_count = std::stoi(value);
    } else if (key == "bandwidth") {
        config.bandwidth = std::stoi(value);
    } else if (key == "filter_threshold") {
        config.filter_threshold = std::stod(value);
    } else if (key == "th") {
        config.th = std::stod(value);
    } else if (key == "pe_init") {
        if (!value.empty()) config.pe_init = std::stod(value);
    } else if (key == "thresholds") {
        config.thresholds.clear();
        for (const auto& item : split_list(value))
            config.thresholds.push_back(std::stod(item));
    } else if (key == "bands") {
        config.bands.clear();
        for (const auto& item : split_list(value))
            config.bands.push_back(std::stoi(item));
    } else if (key == "band_range") {
        const auto items = split_list(value);
        if (items.size() != 2)
            fail("config: band_range expects 'first,last', got '" + value + "'");
        config.band_range = {std::stoi(items[0]), std::stoi(items[1])};
    } else if (key == "synth_spec") {
        config.synth_spec_path = value;
    } else {
        fail("config: unknown key '" + key + "'");
    }
}

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buffer[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buffer;
}

/// Tracks every file a command writes so a failed run leaves nothing behind
/// except the log.
class OutputSession {
public:
    explicit OutputSession(const fs::path& dir) : dir_(dir) {
        fs::create_directories(dir_);
    }

    fs::path file(const std::string& name) {
        fs::path p = dir_ / name;
        written_.push_back(p);
        return p;
    }

    void write_text(const std::string& name, const std::string& content) {
        std::ofstream out(file(name));
        if (!out) fail("cannot write " + (dir_ / name).string());
        out << content;
    }

    void log(const std::string& message) {
        std::ofstream out(dir_ / "run.log", std::ios::app);
        out << timestamp_now() << " " << message << "\n";
    }

    void rollback() noexcept {
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
};

void require_file(const fs::path& path, const std::string& what) {
    if (path.empty()) fail(what + " path is not configured");
    if (!fs::exists(path)) fail(what + " file does not exist: " + path.string());
}

void require_seed(const ExperimentConfig& config) {
    if (!config.seed_set) fail("config: seed is mandatory");
}

void write_resolved_config(OutputSession& out, const ExperimentConfig& config) {
    std::ostringstream text;
    for (const auto& [key, value] : config.resolved())
        text << key << "=" << value << "\n";
    out.write_text("resolved_config.txt", text.str());
}

struct LoadedData {
    HyperCube cube;
    GroundTruth gt;
};

LoadedData load_inputs(const ExperimentConfig& config, OutputSession& out) {
    require_file(config.cube_path, "cube");
    require_file(config.gt_path, "ground truth");
    HyperCube cube = load_cube(config.cube_path);
    GroundTruth gt = load_ground_truth(config.gt_path, cube.rows(), cube.cols());
    if (cube.rows() == 145 && cube.cols() == 145 && cube.n_bands() == 200)
        out.log("note: cube has 200 bands on the 145x145 grid; the reference "
                "scene is the 220-band variant");
    return {std::move(cube), std::move(gt)};
}

template <typename Body>
void run_command(const ExperimentConfig& config, const std::string& name,
                 Body body) {
    require_seed(config);
    if (config.output_dir.empty()) fail("config: out directory is not set");
    OutputSession out(config.output_dir);
    out.log(name + " started");
    try {
        write_resolved_config(out, config);
        body(out);
        out.log(name + " finished");
    } catch (const std::exception& e) {
        out.log(name + " failed: " + std::string(e.what()));
        out.rollback();
        throw;
    }
}

SplitSpec effective_split(const ExperimentConfig& config) {
    SplitSpec spec = config.split;
    spec.seed = config.seed;
    return spec;
}

ClassifierConfig effective_classifier(const ExperimentConfig& config) {
    ClassifierConfig classifier = config.classifier;
    classifier.seed = config.seed;
    if (classifier.type != "linear" && classifier.type != "knn")
        fail("config: classifier must be 'linear' or 'knn', got '" +
             classifier.type + "'");
    return classifier;
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& config_path,
                                        const std::vector<std::string>& overrides) {
    ExperimentConfig config;
    std::ifstream in(config_path);
    if (!in) fail("cannot open config file: " + config_path.string());
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail("config: malformed line '" + line + "'");
        apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            fail("override must look like key=value, got '" + item + "'");
        apply_setting(config, trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
    }
    if (const char* env_out = std::getenv("BANDSELECT_OUTPUT_DIR"))
        config.output_dir = env_out;
    return config;
}

std::map<std::string, std::string> ExperimentConfig::resolved() const {
    std::map<std::string, std::string> map;
    map["cube"] = cube_path.string();
    map["gt"] = gt_path.string();
    map["out"] = output_dir.string();
    map["seed"] = seed_set ? std::to_string(seed) : "";
    map["bins"] = std::to_string(bins);
    map["labeled_only"] = labeled_only ? "true" : "false";
    map["classifier"] = classifier.type;
    map["regularization"] = format_double(classifier.regularization);
    map["solver_iterations"] = std::to_string(classifier.solver_iterations);
    map["split_fraction"] = format_double(split.train_fraction);
    map["stratified"] = split.stratified ? "true" : "false";
    map["algorithm"] = algorithm;
    map["target_count"] = std::to_string(target_count);
    map["bandwidth"] = std::to_string(bandwidth);
    map["filter_threshold"] = format_double(filter_threshold);
    map["th"] = format_double(th);
    map["pe_init"] = pe_init ? format_double(*pe_init) : "";
    {
        std::string list;
        for (double t : thresholds)
            list += (list.empty() ? "" : ",") + format_double(t);
        map["thresholds"] = list;
    }
    {
        std::string list;
        for (int b : bands) list += (list.empty() ? "" : ",") + std::to_string(b);
        map["bands"] = list;
    }
    map["band_range"] =
        band_range ? std::to_string(band_range->first) + "," +
                         std::to_string(band_range->second)
                   : "";
    map["synth_spec"] = synth_spec_path.string();
    return map;
}

void cmd_mi_curve(const ExperimentConfig& config) {
    run_command(config, "mi-curve", [&](OutputSession& out) {
        const LoadedData data = load_inputs(config, out);
        const Quantizer q{config.bins};

        const MICurve curve =
            mi_curve(data.cube, data.gt, q, config.labeled_only);
        write_mi_curve_csv(curve, out.file("mi_curve.csv"));
        std::cout << "wrote mi_curve.csv (" << curve.n_bands() << " bands)\n";

        if (config.band_range) {
            const BandImage estimate = estimate_gt_by_average(
                data.cube, config.band_range->first, config.band_range->second);
            // the averaged reference has a value on every pixel
            const MICurve estimated_curve =
                mi_curve(data.cube, estimate, q, nullptr);
            write_mi_curve_csv(estimated_curve, out.file("mi_curve_est.csv"));
            std::cout << "wrote mi_curve_est.csv (reference = mean of bands "
                      << config.band_range->first << ".."
                      << config.band_range->second << ")\n";
        }
    });
}

void cmd_select(const ExperimentConfig& config, const std::string& algorithm) {
    if (algorithm != "filter" && algorithm != "fano")
        fail("unknown algorithm '" + algorithm + "' (expected filter or fano)");
    run_command(config, "select:" + algorithm, [&](OutputSession& out) {
        const LoadedData data = load_inputs(config, out);
        const Quantizer q{config.bins};
        const int target = config.target_count > 0
                               ? config.target_count
                               : static_cast<int>(data.cube.n_bands());

        SelectionResult result;
        if (algorithm == "filter") {
            const MICurve curve = mi_curve(data.cube, data.gt, q, true);
            result = select_filter(
                curve, FilterParams{target, config.bandwidth,
                                    config.filter_threshold});
        } else {
            result = select_fano(data.cube, data.gt,
                                 WrapperParams{target, config.th, config.pe_init},
                                 effective_classifier(config),
                                 effective_split(config), q);
        }

        write_trace_csv(result, out.file("selection_trace.csv"));
        write_summary_json(result, out.file("selection_summary.json"));
        std::cout << "selected " << result.selected.size() << " bands ("
                  << result.stop_reason << ")\n";
    });
}

void cmd_sweep(const ExperimentConfig& config) {
    if (config.thresholds.empty()) fail("sweep: no thresholds configured");
    run_command(config, "sweep", [&](OutputSession& out) {
        const LoadedData data = load_inputs(config, out);
        const SweepReport report = threshold_sweep(
            data.cube, data.gt, config.thresholds, config.target_count,
            effective_classifier(config), effective_split(config),
            Quantizer{config.bins});

        const SweepTables tables = table_report(report, data.gt);
        out.write_text("sweep_table.csv", tables.accuracy_csv);
        out.write_text("sweep_table.txt", tables.accuracy_text);
        out.write_text("sweep_per_class.csv", tables.per_class_csv);
        out.write_text("sweep_per_class.txt", tables.per_class_text);
        for (const auto& column : report.columns) {
            char name[64];
            std::snprintf(name, sizeof(name), "trace_th_%.3f.csv",
                          column.threshold);
            write_trace_csv(column.result, out.file(name));
        }
        std::cout << "swept " << report.columns.size() << " thresholds\n";
    });
}

void cmd_classify(const ExperimentConfig& config) {
    if (config.bands.empty()) fail("classify: no bands configured");
    run_command(config, "classify", [&](OutputSession& out) {
        const LoadedData data = load_inputs(config, out);
        for (int b : config.bands)
            if (b < 1 || b > static_cast<int>(data.cube.n_bands()))
                fail("classify: band index " + std::to_string(b) +
                     " outside the 1-based range 1.." +
                     std::to_string(data.cube.n_bands()));

        const SplitResult split_result = split(data.gt, effective_split(config));
        const PixelDataset training = PixelDataset::from_cube(
            data.cube, data.gt, split_result.train, config.bands);
        const ClassifierModel model =
            train(training, effective_classifier(config));
        const std::vector<int> c_est =
            build_estimated_map(data.cube, data.gt, config.bands, model);
        const ConfusionMatrix cm = evaluate(data.gt, c_est, split_result.test);

        out.write_text("classification_report.txt",
                       classification_report(cm, data.gt, split_result.test));
        out.write_text("confusion.csv", confusion_csv(cm));
        model.save(out.file("model.txt"));
        write_ppm(render_map(data.gt.labels, data.gt.rows, data.gt.cols,
                             data.gt.n_classes),
                  out.file("gt_map.ppm"));
        write_ppm(render_map(c_est, data.gt.rows, data.gt.cols, data.gt.n_classes),
                  out.file("est_map.ppm"));

        char line[64];
        std::snprintf(line, sizeof(line), "overall accuracy: %.2f%%\n",
                      cm.overall_accuracy() * 100.0);
        std::cout << line;
    });
}

void cmd_synth(const ExperimentConfig& config) {
    require_file(config.synth_spec_path, "synthetic spec");
    run_command(config, "synth", [&](OutputSession& out) {
        const SyntheticSpec spec = parse_synthetic_spec(config.synth_spec_path);
        const auto [cube, gt] = make_synthetic_cube(spec, config.seed);
        const fs::path header = out.file("synth.hdr");
        out.file("synth.raw");
        write_cube(cube, header, "synth.raw");
        write_ground_truth(gt, out.file("synth_gt.txt"));
        std::cout << "wrote synth.hdr/synth.raw/synth_gt.txt (" << cube.rows()
                  << "x" << cube.cols() << "x" << cube.n_bands() << ", "
                  << gt.n_classes << " classes)\n";
    });
}

}  // namespace bandselect

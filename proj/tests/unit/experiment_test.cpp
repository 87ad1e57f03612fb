#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "bandselect/experiment.hpp"
#include "bandselect/hypercube.hpp"
#include "support/fixtures.hpp"

using namespace bandselect;
namespace fs = std::filesystem;

namespace {

// one scratch area holding a generated cube plus a base config
struct Workspace {
    fixtures::TempDir dir;
    fs::path config_path;

    explicit Workspace(const std::string& extra = {}) {
        fixtures::write_text(dir.file("spec.txt"),
                             "rows=24\ncols=24\nclasses=3\n"
                             "bands=informative,noise,redundant(1),noise\n");
        fixtures::write_text(dir.file("synth.cfg"),
                             "seed=7\nsynth_spec=" + dir.file("spec.txt").string() +
                                 "\nout=" + dir.file("data").string() + "\n");
        cmd_synth(ExperimentConfig::load(dir.file("synth.cfg")));

        config_path = dir.file("run.cfg");
        fixtures::write_text(
            config_path,
            "cube=" + dir.file("data/synth.hdr").string() +
                "\ngt=" + dir.file("data/synth_gt.txt").string() +
                "\nout=" + dir.file("out").string() +
                "\nseed=7\nsplit_fraction=0.5\n" + extra);
    }

    ExperimentConfig config(const std::vector<std::string>& overrides = {}) const {
        return ExperimentConfig::load(config_path, overrides);
    }

    fs::path out(const std::string& name) const {
        return dir.file("out") / name;
    }
};

std::size_t line_count(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST_CASE("synth writes a loadable cube and ground truth") {
    const Workspace ws;
    const HyperCube cube = load_cube(ws.dir.file("data/synth.hdr"));
    CHECK(cube.rows() == 24);
    CHECK(cube.n_bands() == 4);
    const GroundTruth gt =
        load_ground_truth(ws.dir.file("data/synth_gt.txt"), 24, 24);
    CHECK(gt.n_classes == 3);
}

TEST_CASE("mi-curve writes one row per band") {
    const Workspace ws;
    cmd_mi_curve(ws.config());
    CHECK(line_count(ws.out("mi_curve.csv")) == 4 + 1);
    CHECK(fs::exists(ws.out("resolved_config.txt")));
    CHECK(!fs::exists(ws.out("mi_curve_est.csv")));
}

TEST_CASE("mi-curve adds the averaged-reference curve when asked") {
    const Workspace ws("band_range=1,2\n");
    cmd_mi_curve(ws.config());
    CHECK(line_count(ws.out("mi_curve_est.csv")) == 4 + 1);
}

TEST_CASE("a missing cube path fails naming the path") {
    const Workspace ws;
    CHECK_THROWS_WITH_AS(
        cmd_mi_curve(ws.config({"cube=/nonexistent/cube.hdr"})),
        doctest::Contains("/nonexistent/cube.hdr"), std::runtime_error);
}

TEST_CASE("the seed is mandatory") {
    fixtures::TempDir dir;
    fixtures::write_text(dir.file("cfg"), "out=" + dir.file("o").string() + "\n");
    CHECK_THROWS_WITH_AS(cmd_mi_curve(ExperimentConfig::load(dir.file("cfg"))),
                         doctest::Contains("seed"), std::runtime_error);
}

TEST_CASE("unknown config keys are rejected") {
    fixtures::TempDir dir;
    fixtures::write_text(dir.file("cfg"), "sede=7\n");
    CHECK_THROWS_WITH_AS(ExperimentConfig::load(dir.file("cfg")),
                         doctest::Contains("sede"), std::runtime_error);
}

TEST_CASE("overrides rewrite config entries in order") {
    const Workspace ws;
    const ExperimentConfig config =
        ws.config({"th=0.05", "bins=64", "th=0.03"});
    CHECK(config.th == 0.03);
    CHECK(config.bins == 64);
}

TEST_CASE("the output directory env var wins") {
    const Workspace ws;
    setenv("BANDSELECT_OUTPUT_DIR", "/tmp/bandselect-env-out", 1);
    const ExperimentConfig config = ws.config();
    unsetenv("BANDSELECT_OUTPUT_DIR");
    CHECK(config.output_dir == fs::path("/tmp/bandselect-env-out"));
}

TEST_CASE("select runs both algorithms and rejects unknown ones") {
    const Workspace ws("target_count=3\nth=0.01\nfilter_threshold=0.05\n");
    cmd_select(ws.config(), "fano");
    CHECK(fs::exists(ws.out("selection_trace.csv")));
    CHECK(fs::exists(ws.out("selection_summary.json")));

    cmd_select(ws.config(), "filter");
    CHECK(fs::exists(ws.out("selection_trace.csv")));

    CHECK_THROWS_WITH_AS(cmd_select(ws.config(), "grasp"),
                         doctest::Contains("unknown algorithm"),
                         std::runtime_error);
}

TEST_CASE("classify validates the 1-based band range") {
    const Workspace ws;
    CHECK_THROWS_WITH_AS(cmd_classify(ws.config({"bands=0"})),
                         doctest::Contains("1-based"), std::runtime_error);
    CHECK_THROWS_WITH_AS(cmd_classify(ws.config({"bands=5"})),
                         doctest::Contains("1-based"), std::runtime_error);
    CHECK_THROWS(cmd_classify(ws.config()));  // no bands configured
}

TEST_CASE("classify writes the report, matrices, model, and maps") {
    const Workspace ws("bands=1\n");
    cmd_classify(ws.config());
    for (const char* name : {"classification_report.txt", "confusion.csv",
                             "model.txt", "gt_map.ppm", "est_map.ppm"})
        CHECK(fs::exists(ws.out(name)));

    // both maps share the grid dimensions
    const std::string gt_map = fixtures::read_bytes(ws.out("gt_map.ppm"));
    const std::string est_map = fixtures::read_bytes(ws.out("est_map.ppm"));
    CHECK(gt_map.substr(0, 12) == est_map.substr(0, 12));
    CHECK(gt_map.size() == est_map.size());
}

TEST_CASE("sweep writes the accuracy and per-class tables") {
    const Workspace ws("thresholds=0.0,0.02\ntarget_count=4\n");
    cmd_sweep(ws.config());
    for (const char* name :
         {"sweep_table.csv", "sweep_table.txt", "sweep_per_class.csv",
          "sweep_per_class.txt", "trace_th_0.000.csv", "trace_th_0.020.csv"})
        CHECK(fs::exists(ws.out(name)));
    CHECK_THROWS(cmd_sweep(ws.config({"thresholds="})));
}

TEST_CASE("identical runs write identical bytes") {
    const Workspace ws;
    cmd_mi_curve(ws.config());
    const std::string first = fixtures::read_bytes(ws.out("mi_curve.csv"));
    const std::string first_config =
        fixtures::read_bytes(ws.out("resolved_config.txt"));
    cmd_mi_curve(ws.config());
    CHECK(fixtures::read_bytes(ws.out("mi_curve.csv")) == first);
    CHECK(fixtures::read_bytes(ws.out("resolved_config.txt")) == first_config);
}

#ifdef BANDSELECT_CLI_PATH
TEST_CASE("the command-line tool maps outcomes onto exit codes") {
    const Workspace ws;
    const std::string tool = BANDSELECT_CLI_PATH;
    auto run = [&](const std::string& args) {
        return std::system((tool + " " + args + " > /dev/null 2>&1").c_str());
    };
    CHECK(run("mi-curve -c " + ws.config_path.string()) == 0);
    CHECK(run("select -c " + ws.config_path.string() + " -a grasp") != 0);
    CHECK(run("mi-curve") != 0);       // missing required --config
    CHECK(run("unknown-cmd") != 0);
}
#endif

TEST_CASE("a failed run removes everything but the log") {
    const Workspace ws;
    fixtures::write_text(ws.dir.file("bad_gt.txt"), "1 1\n");  // wrong dims
    CHECK_THROWS(
        cmd_mi_curve(ws.config({"gt=" + ws.dir.file("bad_gt.txt").string()})));

    std::set<std::string> left;
    for (const auto& entry : fs::directory_iterator(ws.dir.file("out")))
        left.insert(entry.path().filename().string());
    CHECK(left == std::set<std::string>{"run.log"});

    // the log keeps the failure line
    const std::string log = fixtures::read_bytes(ws.out("run.log"));
    CHECK(log.find("failed") != std::string::npos);
}

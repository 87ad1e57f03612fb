#pragma once

// Shared test fixtures: scratch directories and the synthetic cubes used
// across the suites.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bandselect/synthetic.hpp"

namespace fixtures {

class TempDir {
public:
    explicit TempDir(const std::string& prefix = "bandselect-test") {
        std::random_device rd;
        std::ostringstream name;
        name << prefix << "-" << rd() << "-" << rd();
        path_ = std::filesystem::temp_directory_path() / name.str();
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const {
        return path_ / name;
    }

private:
    std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

using bandselect::SyntheticBand;
using bandselect::SyntheticSpec;

inline SyntheticBand informative() {
    return {SyntheticBand::Kind::informative, 0};
}
inline SyntheticBand noise() { return {SyntheticBand::Kind::noise, 0}; }
inline SyntheticBand redundant(int source) {
    return {SyntheticBand::Kind::redundant, source};
}

/// 64x64, 4 classes, 20 bands: 3 informative, 3 redundant copies, 14 noise.
inline SyntheticSpec standard_cube_spec() {
    SyntheticSpec spec;
    spec.rows = 64;
    spec.cols = 64;
    spec.n_classes = 4;
    spec.bands = {informative(), informative(), informative(),
                  redundant(1),  redundant(2),  redundant(3)};
    for (int i = 0; i < 14; ++i) spec.bands.push_back(noise());
    return spec;
}

constexpr std::uint64_t kStandardSeed = 2024;

/// 48x48, 3 classes: informative, noise, noise, redundant(1), noise.
inline SyntheticSpec small_cube_spec() {
    SyntheticSpec spec;
    spec.rows = 48;
    spec.cols = 48;
    spec.n_classes = 3;
    spec.bands = {informative(), noise(), noise(), redundant(1), noise()};
    return spec;
}

}  // namespace fixtures

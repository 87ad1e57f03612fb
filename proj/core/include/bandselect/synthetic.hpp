#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "bandselect/hypercube.hpp"

namespace bandselect {

/// Planted band kinds for the synthetic generator:
///   informative  - class-dependent cluster centers, fresh noise per band
///   redundant    - copy of an earlier band plus small noise (shares the
///                  source band's noise realization, so it carries almost no
///                  new evidence)
///   noise        - label-independent uniform values
struct SyntheticBand {
    enum class Kind { informative, redundant, noise };
    Kind kind = Kind::noise;
    int source_band = 0;  // 1-based, redundant only; must precede this band
};

struct SyntheticSpec {
    std::size_t rows = 64;
    std::size_t cols = 64;
    int n_classes = 4;
    std::vector<SyntheticBand> bands;
};

/// Parses a key=value spec file:
///   rows=64
///   cols=64
///   classes=4
///   bands=informative,noise,redundant(1),noise
SyntheticSpec parse_synthetic_spec(const std::filesystem::path& path);

/// Deterministic synthetic cube with planted structure. Informative bands are
/// checked post-generation to have strictly higher MI with the labels than
/// every noise band; on failure the noise is redrawn (up to 5 attempts).
/// Identical (spec, seed) inputs give identical cubes.
std::pair<HyperCube, GroundTruth> make_synthetic_cube(const SyntheticSpec& spec,
                                                      std::uint64_t seed);

}  // namespace bandselect

#include "bandselect/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "bandselect/infotheory.hpp"
#include "bandselect/rng.hpp"

namespace bandselect {

namespace {

[[noreturn]] void fail(const std::string& message) {
    throw std::runtime_error(message);
}

constexpr double kValueLo = 1000.0;
constexpr double kValueHi = 9000.0;
// Informative-band noise is a fixed fraction of the full value range, not of
// the class spacing: a 3-class cube then classifies in the mid-90s from one
// band, while denser class layouts stay noisy enough that every further
// informative band still buys a real error reduction.
constexpr double kLayoutNoiseFrac = 0.085;
// Extra noise on redundant copies; half the layout noise, so a copy ranks
// clearly below every informative band on MI without losing its resemblance.
constexpr double kRedundantNoiseFrac = 0.5 * kLayoutNoiseFrac;
constexpr int kMaxAttempts = 5;

std::uint16_t clamp_to_u16(double v) {
    v = std::clamp(v, kValueLo, kValueHi);
    return static_cast<std::uint16_t>(std::lround(v));
}

void validate(const SyntheticSpec& spec) {
    if (spec.n_classes < 2)
        fail("unsatisfiable synthetic spec: need at least 2 classes, got " +
             std::to_string(spec.n_classes));
    if (spec.rows == 0 || spec.cols == 0)
        fail("unsatisfiable synthetic spec: empty grid");
    if (spec.bands.empty())
        fail("unsatisfiable synthetic spec: no bands declared");
    for (std::size_t i = 0; i < spec.bands.size(); ++i) {
        const auto& band = spec.bands[i];
        if (band.kind != SyntheticBand::Kind::redundant) continue;
        if (band.source_band < 1 || band.source_band > static_cast<int>(i))
            fail("synthetic spec: band " + std::to_string(i + 1) +
                 " copies band " + std::to_string(band.source_band) +
                 ", which must be an earlier band");
    }
}

// Every informative band is a full class layout with its own ordering and an
// independent noise draw. Distinct orderings keep the bands complementary:
// classes confusable in one band sit far apart in the next.
std::vector<std::vector<int>> class_orderings(int n_classes, int n_informative,
                                              Rng& rng) {
    std::vector<int> identity(static_cast<std::size_t>(n_classes));
    std::iota(identity.begin(), identity.end(), 0);
    std::vector<std::vector<int>> orderings{identity};
    while (static_cast<int>(orderings.size()) < n_informative) {
        std::vector<int> candidate = identity;
        for (int tries = 0; tries < 100; ++tries) {
            rng.shuffle(std::span<int>(candidate));
            if (std::find(orderings.begin(), orderings.end(), candidate) ==
                orderings.end())
                break;
        }
        orderings.push_back(candidate);
    }
    return orderings;
}

std::pair<HyperCube, GroundTruth> generate_once(const SyntheticSpec& spec,
                                                std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n_pixels = spec.rows * spec.cols;
    const int nc = spec.n_classes;

    std::vector<int> labels(n_pixels);
    for (std::size_t i = 0; i < n_pixels; ++i)
        labels[i] = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(nc))) + 1;
    // make sure every class occurs even on tiny grids
    for (int c = 0; c < nc && static_cast<std::size_t>(c) < n_pixels; ++c)
        labels[static_cast<std::size_t>(c)] = c + 1;

    const double spacing = (kValueHi - kValueLo) / nc;
    const double layout_sigma = kLayoutNoiseFrac * (kValueHi - kValueLo);

    int n_informative = 0;
    for (const auto& band : spec.bands)
        if (band.kind == SyntheticBand::Kind::informative) ++n_informative;
    const auto orderings = class_orderings(nc, std::max(n_informative, 1), rng);

    std::vector<std::uint16_t> values(n_pixels * spec.bands.size());
    int informative_ordinal = 0;
    for (std::size_t b = 0; b < spec.bands.size(); ++b) {
        const auto& band = spec.bands[b];
        std::uint16_t* slice = values.data() + b * n_pixels;
        switch (band.kind) {
            case SyntheticBand::Kind::informative: {
                const auto& order =
                    orderings[static_cast<std::size_t>(informative_ordinal++)];
                for (std::size_t i = 0; i < n_pixels; ++i) {
                    const int slot = order[static_cast<std::size_t>(labels[i] - 1)];
                    const double center = kValueLo + (slot + 0.5) * spacing;
                    slice[i] = clamp_to_u16(rng.normal(center, layout_sigma));
                }
                break;
            }
            case SyntheticBand::Kind::redundant: {
                const std::uint16_t* source =
                    values.data() +
                    (static_cast<std::size_t>(band.source_band) - 1) * n_pixels;
                const double sigma =
                    kRedundantNoiseFrac * (kValueHi - kValueLo);
                for (std::size_t i = 0; i < n_pixels; ++i)
                    slice[i] = clamp_to_u16(source[i] + rng.normal(0.0, sigma));
                break;
            }
            case SyntheticBand::Kind::noise: {
                const auto span =
                    static_cast<std::uint64_t>(kValueHi - kValueLo) + 1;
                for (std::size_t i = 0; i < n_pixels; ++i)
                    slice[i] = static_cast<std::uint16_t>(
                        kValueLo + static_cast<double>(rng.bounded(span)));
                break;
            }
        }
    }

    return {HyperCube(spec.rows, spec.cols, spec.bands.size(), std::move(values)),
            GroundTruth::from_labels(spec.rows, spec.cols, std::move(labels))};
}

bool planted_mi_holds(const SyntheticSpec& spec, const HyperCube& cube,
                      const GroundTruth& gt) {
    bool has_informative = false;
    bool has_noise = false;
    for (const auto& band : spec.bands) {
        has_informative |= band.kind == SyntheticBand::Kind::informative;
        has_noise |= band.kind == SyntheticBand::Kind::noise;
    }
    if (!has_informative || !has_noise) return true;

    const MICurve curve = mi_curve(cube, gt, Quantizer{}, true);
    double min_informative = std::numeric_limits<double>::infinity();
    double max_noise = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < spec.bands.size(); ++b) {
        const double mi = curve.mi_bits[b];
        if (spec.bands[b].kind == SyntheticBand::Kind::informative)
            min_informative = std::min(min_informative, mi);
        else if (spec.bands[b].kind == SyntheticBand::Kind::noise)
            max_noise = std::max(max_noise, mi);
    }
    return min_informative > max_noise;
}

}  // namespace

std::pair<HyperCube, GroundTruth> make_synthetic_cube(const SyntheticSpec& spec,
                                                      std::uint64_t seed) {
    validate(spec);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const std::uint64_t attempt_seed =
            seed + static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ULL;
        auto generated = generate_once(spec, attempt_seed);
        if (planted_mi_holds(spec, generated.first, generated.second))
            return generated;
    }
    fail("synthetic generator: informative bands did not dominate noise bands "
         "after " + std::to_string(kMaxAttempts) + " attempts");
}

SyntheticSpec parse_synthetic_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open synthetic spec: " + path.string());

    auto trim = [](const std::string& s) {
        const auto first = s.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) return std::string{};
        const auto last = s.find_last_not_of(" \t\r\n");
        return s.substr(first, last - first + 1);
    };

    SyntheticSpec spec;
    spec.bands.clear();
    bool bands_seen = false;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail("synthetic spec: malformed line '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "rows") {
            spec.rows = static_cast<std::size_t>(std::stoull(value));
        } else if (key == "cols") {
            spec.cols = static_cast<std::size_t>(std::stoull(value));
        } else if (key == "classes") {
            spec.n_classes = std::stoi(value);
        } else if (key == "bands") {
            bands_seen = true;
            std::size_t pos = 0;
            while (pos <= value.size()) {
                auto comma = value.find(',', pos);
                if (comma == std::string::npos) comma = value.size();
                const std::string token = trim(value.substr(pos, comma - pos));
                pos = comma + 1;
                if (token.empty()) continue;
                SyntheticBand band;
                if (token == "informative") {
                    band.kind = SyntheticBand::Kind::informative;
                } else if (token == "noise") {
                    band.kind = SyntheticBand::Kind::noise;
                } else if (token.rfind("redundant", 0) == 0) {
                    band.kind = SyntheticBand::Kind::redundant;
                    const auto open = token.find('(');
                    const auto close = token.find(')');
                    if (open == std::string::npos || close == std::string::npos ||
                        close < open + 2)
                        fail("synthetic spec: expected redundant(K), got '" +
                             token + "'");
                    band.source_band =
                        std::stoi(token.substr(open + 1, close - open - 1));
                } else {
                    fail("synthetic spec: unknown band kind '" + token + "'");
                }
                spec.bands.push_back(band);
            }
        } else {
            fail("synthetic spec: unknown key '" + key + "'");
        }
    }
    if (!bands_seen) fail("synthetic spec: missing 'bands' entry");
    return spec;
}

}  // namespace bandselect

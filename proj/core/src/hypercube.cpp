#include "bandselect/hypercube.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bandselect {

namespace {

std::string trim(const std::string& s) {
    std::size_t first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    std::size_t last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const std::string& message) {
    throw std::runtime_error(message);
}

std::size_t parse_positive(const std::string& value, const std::string& key) {
    long long v = 0;
    try {
        v = std::stoll(value);
    } catch (const std::exception&) {
        fail("cube header: " + key + " is not an integer: '" + value + "'");
    }
    if (v <= 0) fail("cube header: " + key + " must be positive, got " + value);
    return static_cast<std::size_t>(v);
}

}  // namespace

HyperCube::HyperCube(std::size_t rows, std::size_t cols, std::size_t n_bands,
                     std::vector<std::uint16_t> values)
    : rows_(rows), cols_(cols), n_bands_(n_bands), values_(std::move(values)) {
    if (rows_ == 0 || cols_ == 0 || n_bands_ == 0)
        fail("cube dimensions must be positive");
    if (values_.size() != rows_ * cols_ * n_bands_)
        fail("cube value count " + std::to_string(values_.size()) +
             " does not match dimensions (size mismatch)");
    auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
    range_ = {*lo, *hi};
}

std::span<const std::uint16_t> HyperCube::band(int band_index) const {
    if (band_index < 1 || static_cast<std::size_t>(band_index) > n_bands_)
        fail("band index " + std::to_string(band_index) + " out of range 1.." +
             std::to_string(n_bands_));
    const std::size_t offset =
        (static_cast<std::size_t>(band_index) - 1) * rows_ * cols_;
    return {values_.data() + offset, rows_ * cols_};
}

std::uint16_t HyperCube::at(std::size_t row, std::size_t col, int band_index) const {
    return band(band_index)[row * cols_ + col];
}

GroundTruth GroundTruth::from_labels(std::size_t rows, std::size_t cols,
                                     std::vector<int> labels) {
    if (labels.size() != rows * cols)
        fail("ground truth label count does not match dimensions");
    GroundTruth gt;
    gt.rows = rows;
    gt.cols = cols;
    gt.labels = std::move(labels);
    for (int label : gt.labels) {
        if (label < 0) fail("ground truth contains a negative label");
        gt.n_classes = std::max(gt.n_classes, label);
    }
    gt.class_counts.assign(static_cast<std::size_t>(gt.n_classes) + 1, 0);
    for (int label : gt.labels) ++gt.class_counts[static_cast<std::size_t>(label)];
    for (int c = 1; c <= gt.n_classes; ++c)
        gt.labeled_total += gt.class_counts[static_cast<std::size_t>(c)];
    return gt;
}

HyperCube load_cube(const std::filesystem::path& header_path) {
    std::ifstream header(header_path);
    if (!header) fail("cannot open cube header: " + header_path.string());

    std::map<std::string, std::string> fields;
    std::string line;
    while (std::getline(header, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail("cube header: malformed line '" + line + "'");
        fields[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    for (const char* required : {"rows", "cols", "bands", "data"})
        if (!fields.count(required))
            fail("cube header: missing key '" + std::string(required) + "'");

    const std::size_t rows = parse_positive(fields["rows"], "rows");
    const std::size_t cols = parse_positive(fields["cols"], "cols");
    const std::size_t bands = parse_positive(fields["bands"], "bands");
    if (fields.count("dtype") && fields["dtype"] != "u16le")
        fail("cube header: unsupported dtype '" + fields["dtype"] + "'");
    if (fields.count("interleave") && fields["interleave"] != "bsq")
        fail("cube header: unsupported interleave '" + fields["interleave"] + "'");

    std::filesystem::path data_path(fields["data"]);
    if (data_path.is_relative())
        data_path = header_path.parent_path() / data_path;

    std::ifstream raw(data_path, std::ios::binary);
    if (!raw) fail("cannot open cube data: " + data_path.string());
    raw.seekg(0, std::ios::end);
    const std::uint64_t byte_size = static_cast<std::uint64_t>(raw.tellg());
    raw.seekg(0, std::ios::beg);

    const std::uint64_t expected = static_cast<std::uint64_t>(rows) * cols * bands;
    if (byte_size != expected * 2)
        fail("cube data size mismatch: header implies " + std::to_string(expected) +
             " u16 samples, file holds " + std::to_string(byte_size / 2));

    std::vector<std::uint8_t> bytes(byte_size);
    raw.read(reinterpret_cast<char*>(bytes.data()),
             static_cast<std::streamsize>(byte_size));
    if (!raw) fail("short read on cube data: " + data_path.string());

    std::vector<std::uint16_t> values(expected);
    for (std::uint64_t i = 0; i < expected; ++i) {
        values[i] = static_cast<std::uint16_t>(bytes[2 * i] |
                                               (bytes[2 * i + 1] << 8));
    }
    return HyperCube(rows, cols, bands, std::move(values));
}

void write_cube(const HyperCube& cube, const std::filesystem::path& header_path,
                const std::string& raw_name) {
    const std::filesystem::path raw_path = header_path.parent_path() / raw_name;
    {
        std::ofstream raw(raw_path, std::ios::binary);
        if (!raw) fail("cannot write cube data: " + raw_path.string());
        for (std::uint16_t v : cube.raw_values()) {
            const std::uint8_t bytes[2] = {static_cast<std::uint8_t>(v & 0xff),
                                           static_cast<std::uint8_t>(v >> 8)};
            raw.write(reinterpret_cast<const char*>(bytes), 2);
        }
    }
    std::ofstream header(header_path);
    if (!header) fail("cannot write cube header: " + header_path.string());
    header << "rows=" << cube.rows() << "\n"
           << "cols=" << cube.cols() << "\n"
           << "bands=" << cube.n_bands() << "\n"
           << "dtype=u16le\n"
           << "interleave=bsq\n"
           << "data=" << raw_name << "\n";
}

namespace {

GroundTruth load_gt_pgm(std::ifstream& in, const std::filesystem::path& path,
                        std::size_t expected_rows, std::size_t expected_cols) {
    std::string magic;
    in >> magic;
    // header tokens may be separated by comments
    auto next_token = [&in]() {
        std::string token;
        while (in >> token) {
            if (token[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return token;
        }
        fail("pgm: truncated header");
    };
    const std::size_t width = parse_positive(next_token(), "pgm width");
    const std::size_t height = parse_positive(next_token(), "pgm height");
    const long long maxval = std::stoll(next_token());
    if (maxval <= 0 || maxval > 255) fail("pgm: only 8-bit maps are supported");
    if (height != expected_rows || width != expected_cols)
        fail("ground truth dimension mismatch: " + path.string() + " is " +
             std::to_string(height) + "x" + std::to_string(width) + ", expected " +
             std::to_string(expected_rows) + "x" + std::to_string(expected_cols));

    std::vector<int> labels(width * height);
    if (magic == "P5") {
        in.get();  // single whitespace after maxval
        std::vector<std::uint8_t> bytes(width * height);
        in.read(reinterpret_cast<char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
        if (!in) fail("pgm: short read in " + path.string());
        std::copy(bytes.begin(), bytes.end(), labels.begin());
    } else {  // P2
        for (auto& label : labels)
            if (!(in >> label)) fail("pgm: short read in " + path.string());
    }
    return GroundTruth::from_labels(expected_rows, expected_cols, std::move(labels));
}

GroundTruth load_gt_grid(std::ifstream& in, const std::filesystem::path& path,
                         std::size_t expected_rows, std::size_t expected_cols) {
    std::vector<int> labels;
    labels.reserve(expected_rows * expected_cols);
    std::string line;
    std::size_t rows_seen = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::istringstream fields(line);
        std::size_t cols_seen = 0;
        int label = 0;
        while (fields >> label) {
            labels.push_back(label);
            ++cols_seen;
        }
        if (cols_seen != expected_cols)
            fail("ground truth dimension mismatch: row " +
                 std::to_string(rows_seen + 1) + " of " + path.string() + " has " +
                 std::to_string(cols_seen) + " values, expected " +
                 std::to_string(expected_cols));
        ++rows_seen;
    }
    if (rows_seen != expected_rows)
        fail("ground truth dimension mismatch: " + path.string() + " has " +
             std::to_string(rows_seen) + " rows, expected " +
             std::to_string(expected_rows));
    return GroundTruth::from_labels(expected_rows, expected_cols, std::move(labels));
}

}  // namespace

GroundTruth load_ground_truth(const std::filesystem::path& path,
                              std::size_t expected_rows,
                              std::size_t expected_cols) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open ground truth: " + path.string());

    char magic[2] = {0, 0};
    in.read(magic, 2);
    in.seekg(0, std::ios::beg);

    GroundTruth gt =
        (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '2'))
            ? load_gt_pgm(in, path, expected_rows, expected_cols)
            : load_gt_grid(in, path, expected_rows, expected_cols);
    if (gt.labeled_total == 0)
        fail("ground truth has no labeled pixels: " + path.string());
    return gt;
}

void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail("cannot write ground truth: " + path.string());
    for (std::size_t r = 0; r < gt.rows; ++r) {
        for (std::size_t c = 0; c < gt.cols; ++c) {
            if (c) out << ' ';
            out << gt.labels[r * gt.cols + c];
        }
        out << '\n';
    }
}

BandImage estimate_gt_by_average(const HyperCube& cube, int first_band,
                                 int last_band) {
    if (first_band < 1 || last_band > static_cast<int>(cube.n_bands()) ||
        first_band > last_band)
        fail("band range [" + std::to_string(first_band) + ", " +
             std::to_string(last_band) + "] is empty or outside 1.." +
             std::to_string(cube.n_bands()));

    BandImage image;
    image.rows = cube.rows();
    image.cols = cube.cols();
    image.values.assign(cube.n_pixels(), 0.0);
    for (int b = first_band; b <= last_band; ++b) {
        const auto slice = cube.band(b);
        for (std::size_t i = 0; i < slice.size(); ++i)
            image.values[i] += slice[i];
    }
    const double n = last_band - first_band + 1;
    for (double& v : image.values) v /= n;
    return image;
}

}  // namespace bandselect

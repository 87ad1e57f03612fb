#include "bandselect/classify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "bandselect/rng.hpp"

namespace bandselect {

namespace {

[[noreturn]] void fail(const std::string& message) {
    throw std::runtime_error(message);
}

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

constexpr double kProbEps = 1e-12;
constexpr double kCurvatureFloor = 1e-10;

}  // namespace

SplitResult split(const GroundTruth& gt, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        fail("split: train fraction must be in (0, 1)");
    if (gt.labeled_total == 0) fail("split: no labeled pixels");

    std::vector<std::vector<PixelIndex>> by_class(
        static_cast<std::size_t>(gt.n_classes) + 1);
    for (std::size_t i = 0; i < gt.labels.size(); ++i) {
        const int label = gt.labels[i];
        if (label > 0) by_class[static_cast<std::size_t>(label)].push_back(
            static_cast<PixelIndex>(i));
    }
    bool any_splittable = false;
    for (int c = 1; c <= gt.n_classes; ++c)
        any_splittable |= by_class[static_cast<std::size_t>(c)].size() >= 2;
    if (!any_splittable) fail("split: need at least one class with 2+ pixels");

    SplitResult result;
    Rng rng(spec.seed);

    auto take = [&](std::vector<PixelIndex>& pixels, int class_id) {
        rng.shuffle(std::span<PixelIndex>(pixels));
        if (pixels.size() == 1) {
            result.train.indices.push_back(pixels[0]);
            result.warnings.push_back(
                "class " + std::to_string(class_id) +
                " has a single labeled pixel; assigned to the training side");
            return;
        }
        const auto n = static_cast<long long>(pixels.size());
        long long k = std::llround(spec.train_fraction * static_cast<double>(n));
        k = std::clamp<long long>(k, 1, n - 1);
        for (long long i = 0; i < n; ++i)
            (i < k ? result.train : result.test)
                .indices.push_back(pixels[static_cast<std::size_t>(i)]);
    };

    if (spec.stratified) {
        for (int c = 1; c <= gt.n_classes; ++c) {
            auto& pixels = by_class[static_cast<std::size_t>(c)];
            if (!pixels.empty()) take(pixels, c);
        }
    } else {
        std::vector<PixelIndex> all;
        for (int c = 1; c <= gt.n_classes; ++c)
            all.insert(all.end(), by_class[static_cast<std::size_t>(c)].begin(),
                       by_class[static_cast<std::size_t>(c)].end());
        std::sort(all.begin(), all.end());
        take(all, 0);
    }

    std::sort(result.train.indices.begin(), result.train.indices.end());
    std::sort(result.test.indices.begin(), result.test.indices.end());
    return result;
}

PixelDataset PixelDataset::from_cube(const HyperCube& cube, const GroundTruth& gt,
                                     const PixelSet& pixels,
                                     std::span<const int> bands) {
    if (bands.empty()) fail("dataset: empty band subset");
    if (gt.rows != cube.rows() || gt.cols != cube.cols())
        fail("dataset: ground truth dimensions do not match the cube");
    for (int b : bands)
        if (b < 1 || static_cast<std::size_t>(b) > cube.n_bands())
            fail("dataset: band " + std::to_string(b) + " outside 1.." +
                 std::to_string(cube.n_bands()));

    PixelDataset data;
    data.bands.assign(bands.begin(), bands.end());
    data.pixels = pixels.indices;
    data.labels.reserve(pixels.size());
    data.features.reserve(pixels.size() * bands.size());
    for (PixelIndex p : pixels.indices) {
        if (p >= gt.labels.size())
            fail("dataset: pixel index " + std::to_string(p) + " out of range");
        const int label = gt.labels[p];
        if (label == 0) fail("dataset: pixel " + std::to_string(p) + " is unlabeled");
        data.labels.push_back(label);
        for (int b : bands)
            data.features.push_back(static_cast<double>(cube.band(b)[p]));
    }
    return data;
}

namespace {

// Column indices whose raw training values duplicate an earlier column.
// Training on deduplicated columns makes an exact-copy feature provably
// inert: the fitted model is identical to one trained without it.
std::vector<bool> duplicate_columns(const PixelDataset& data) {
    const std::size_t d = data.dim();
    const std::size_t n = data.n();
    std::vector<bool> duplicate(d, false);
    for (std::size_t j = 1; j < d; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            if (duplicate[i]) continue;
            bool same = true;
            for (std::size_t r = 0; r < n && same; ++r)
                same = data.features[r * d + i] == data.features[r * d + j];
            if (same) {
                duplicate[j] = true;
                break;
            }
        }
    }
    return duplicate;
}

}  // namespace

ClassifierModel train(const PixelDataset& data, const ClassifierConfig& config) {
    if (data.n() == 0) fail("train: empty dataset");
    if (config.type != "linear" && config.type != "knn")
        fail("train: unknown classifier type '" + config.type + "'");
    if (config.solver_iterations < 1) fail("train: need at least one iteration");

    std::set<int> class_set(data.labels.begin(), data.labels.end());
    if (class_set.size() < 2) fail("train: single class in training data");

    ClassifierModel model;
    model.type_ = config.type;
    model.bands_ = data.bands;
    model.classes_.assign(class_set.begin(), class_set.end());

    const std::size_t n = data.n();
    const std::size_t d = data.dim();

    model.feature_mean_.assign(d, 0.0);
    model.feature_scale_.assign(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += data.features[i * d + j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double delta = data.features[i * d + j] - mean;
            var += delta * delta;
        }
        var /= static_cast<double>(n);
        model.feature_mean_[j] = mean;
        // unit divisor for zero-variance features
        model.feature_scale_[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }

    Matrix standardized(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            standardized(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (data.features[i * d + j] - model.feature_mean_[j]) /
                model.feature_scale_[j];

    if (config.type == "knn") {
        // row-major copy for the distance loop
        model.train_features_.resize(n * d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j)
                model.train_features_[i * d + j] =
                    standardized(static_cast<Eigen::Index>(i),
                                 static_cast<Eigen::Index>(j));
        model.train_labels_ = data.labels;
        return model;
    }

    const std::vector<bool> duplicate = duplicate_columns(data);
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < d; ++j)
        if (!duplicate[j]) active.push_back(j);
    const auto da = static_cast<Eigen::Index>(active.size());

    Matrix x(n, da);
    for (Eigen::Index j = 0; j < da; ++j)
        x.col(j) = standardized.col(static_cast<Eigen::Index>(active[static_cast<std::size_t>(j)]));

    const double lambda = std::max(config.regularization, 0.0);
    model.weights_.assign(model.classes_.size() * (d + 1), 0.0);

    // One-vs-rest L2 logistic regression, fixed-count Newton steps from w = 0.
    for (std::size_t k = 0; k < model.classes_.size(); ++k) {
        const int class_id = model.classes_[k];
        Vector target(n);
        for (std::size_t i = 0; i < n; ++i)
            target(static_cast<Eigen::Index>(i)) =
                data.labels[i] == class_id ? 1.0 : 0.0;

        Vector w = Vector::Zero(da);
        double bias = 0.0;
        for (int iter = 0; iter < config.solver_iterations; ++iter) {
            Vector score = x * w;
            score.array() += bias;
            Vector prob(n);
            Vector curvature(n);
            for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
                const double p = std::clamp(1.0 / (1.0 + std::exp(-score(i))),
                                            kProbEps, 1.0 - kProbEps);
                prob(i) = p;
                curvature(i) = std::max(p * (1.0 - p), kCurvatureFloor);
            }

            Vector residual = prob - target;
            Vector grad(da + 1);
            grad.head(da) = x.transpose() * residual + lambda * w;
            grad(da) = residual.sum();

            Matrix hessian(da + 1, da + 1);
            const Matrix xw = curvature.asDiagonal() * x;
            hessian.topLeftCorner(da, da) = x.transpose() * xw;
            hessian.topLeftCorner(da, da).diagonal().array() += lambda;
            const Vector cross = xw.colwise().sum();
            hessian.block(0, da, da, 1) = cross;
            hessian.block(da, 0, 1, da) = cross.transpose();
            hessian(da, da) = curvature.sum();

            const Vector step = hessian.llt().solve(-grad);
            w += step.head(da);
            bias += step(da);
            if (step.cwiseAbs().maxCoeff() < 1e-12) break;
        }

        double* row = model.weights_.data() + k * (d + 1);
        for (Eigen::Index j = 0; j < da; ++j)
            row[active[static_cast<std::size_t>(j)]] = w(j);
        row[d] = bias;
    }
    return model;
}

std::vector<double> ClassifierModel::standardized(
    std::span<const double> features) const {
    if (features.size() != bands_.size())
        fail("predict: feature vector has " + std::to_string(features.size()) +
             " dimensions, model expects " + std::to_string(bands_.size()));
    std::vector<double> out(features.size());
    for (std::size_t j = 0; j < features.size(); ++j)
        out[j] = (features[j] - feature_mean_[j]) / feature_scale_[j];
    return out;
}

double ClassifierModel::score(std::size_t class_pos,
                              std::span<const double> std_features) const {
    const std::size_t d = bands_.size();
    const double* row = weights_.data() + class_pos * (d + 1);
    double s = row[d];
    for (std::size_t j = 0; j < d; ++j) s += row[j] * std_features[j];
    return s;
}

int ClassifierModel::predict_one(std::span<const double> features) const {
    const std::vector<double> std_features = standardized(features);

    if (type_ == "knn") {
        const std::size_t d = bands_.size();
        const std::size_t n = train_labels_.size();
        double best_distance = std::numeric_limits<double>::infinity();
        int best_label = classes_.front();
        for (std::size_t i = 0; i < n; ++i) {
            double distance = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double delta = train_features_[i * d + j] - std_features[j];
                distance += delta * delta;
            }
            if (distance < best_distance ||
                (distance == best_distance && train_labels_[i] < best_label)) {
                best_distance = distance;
                best_label = train_labels_[i];
            }
        }
        return best_label;
    }

    int best_class = classes_.front();
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < classes_.size(); ++k) {
        const double s = score(k, std_features);
        if (s > best_score) {  // ties keep the lowest class id
            best_score = s;
            best_class = classes_[k];
        }
    }
    return best_class;
}

std::vector<int> ClassifierModel::predict(const PixelDataset& data) const {
    if (data.dim() != bands_.size())
        fail("predict: dataset has " + std::to_string(data.dim()) +
             " features, model expects " + std::to_string(bands_.size()));
    std::vector<int> labels(data.n());
    for (std::size_t i = 0; i < data.n(); ++i)
        labels[i] = predict_one(data.row(i));
    return labels;
}

TrainerFn make_trainer(const ClassifierConfig& config) {
    return [config](const PixelDataset& data) { return train(data, config); };
}

std::vector<int> build_estimated_map(const HyperCube& cube, const GroundTruth& gt,
                                     std::span<const int> bands,
                                     const ClassifierModel& model) {
    if (bands.empty()) fail("estimated map: empty band subset");
    if (!std::equal(bands.begin(), bands.end(), model.bands().begin(),
                    model.bands().end()))
        fail("estimated map: model was trained on a different band subset");

    PixelSet labeled;
    for (std::size_t i = 0; i < gt.labels.size(); ++i)
        if (gt.labels[i] != 0) labeled.indices.push_back(static_cast<PixelIndex>(i));

    const PixelDataset data = PixelDataset::from_cube(cube, gt, labeled, bands);
    const std::vector<int> predicted = model.predict(data);

    std::vector<int> map(gt.labels.size(), 0);
    for (std::size_t k = 0; k < labeled.indices.size(); ++k)
        map[labeled.indices[k]] = predicted[k];
    return map;
}

namespace {

void write_doubles(std::ofstream& out, std::span<const double> values) {
    char buffer[40];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buffer, sizeof(buffer), "%.17g", values[i]);
        out << (i ? " " : "") << buffer;
    }
    out << "\n";
}

}  // namespace

void ClassifierModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) fail("cannot write model: " + path.string());
    out << "bandselect-model 1\n";
    out << "type " << type_ << "\n";
    out << "bands " << bands_.size();
    for (int b : bands_) out << " " << b;
    out << "\nclasses " << classes_.size();
    for (int c : classes_) out << " " << c;
    out << "\nstandardize\n";
    write_doubles(out, feature_mean_);
    write_doubles(out, feature_scale_);
    if (type_ == "linear") {
        out << "weights\n";
        const std::size_t stride = bands_.size() + 1;
        for (std::size_t k = 0; k < classes_.size(); ++k)
            write_doubles(out, {weights_.data() + k * stride, stride});
    } else {
        out << "train " << train_labels_.size() << "\n";
        const std::size_t d = bands_.size();
        for (std::size_t i = 0; i < train_labels_.size(); ++i) {
            out << train_labels_[i] << " ";
            write_doubles(out, {train_features_.data() + i * d, d});
        }
    }
}

ClassifierModel ClassifierModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open model: " + path.string());
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "bandselect-model" || version != 1)
        fail("unrecognized model file: " + path.string());

    ClassifierModel model;
    std::string key;
    in >> key >> model.type_;
    if (key != "type" || (model.type_ != "linear" && model.type_ != "knn"))
        fail("model file: bad type section");

    std::size_t count = 0;
    in >> key >> count;
    if (key != "bands") fail("model file: bad bands section");
    model.bands_.resize(count);
    for (auto& b : model.bands_) in >> b;

    in >> key >> count;
    if (key != "classes") fail("model file: bad classes section");
    model.classes_.resize(count);
    for (auto& c : model.classes_) in >> c;

    in >> key;
    if (key != "standardize") fail("model file: bad standardize section");
    const std::size_t d = model.bands_.size();
    model.feature_mean_.resize(d);
    model.feature_scale_.resize(d);
    for (auto& v : model.feature_mean_) in >> v;
    for (auto& v : model.feature_scale_) in >> v;

    in >> key;
    if (model.type_ == "linear") {
        if (key != "weights") fail("model file: bad weights section");
        model.weights_.resize(model.classes_.size() * (d + 1));
        for (auto& w : model.weights_) in >> w;
    } else {
        std::size_t n = 0;
        if (key != "train") fail("model file: bad train section");
        in >> n;
        model.train_labels_.resize(n);
        model.train_features_.resize(n * d);
        for (std::size_t i = 0; i < n; ++i) {
            in >> model.train_labels_[i];
            for (std::size_t j = 0; j < d; ++j)
                in >> model.train_features_[i * d + j];
        }
    }
    if (!in) fail("model file: truncated: " + path.string());
    return model;
}

}  // namespace bandselect

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bandselect/hypercube.hpp"

namespace bandselect {

using PixelIndex = std::uint32_t;  // row * cols + col

struct PixelSet {
    std::vector<PixelIndex> indices;  // ascending

    std::size_t size() const { return indices.size(); }
};

struct SplitSpec {
    double train_fraction = 0.5;
    std::uint64_t seed = 0;
    bool stratified = true;
};

struct SplitResult {
    PixelSet train;
    PixelSet test;
    std::vector<std::string> warnings;
};

/// Deterministic train/test split over labeled pixels. Stratified mode keeps
/// per-class counts within one pixel of the requested fraction and puts at
/// least one pixel of every >=2-pixel class on each side. A single-pixel
/// class goes to train with a warning.
SplitResult split(const GroundTruth& gt, const SplitSpec& spec);

/// Labeled pixels restricted to a band subset. Features are raw reflectance
/// values (quantization is an information-theory concern, not a classifier
/// one); one row per pixel, |bands| columns.
struct PixelDataset {
    std::vector<int> bands;          // 1-based band indices, column order
    std::vector<double> features;    // n x dim, row-major
    std::vector<int> labels;         // >= 1
    std::vector<PixelIndex> pixels;  // coordinates for map reconstruction

    std::size_t n() const { return labels.size(); }
    std::size_t dim() const { return bands.size(); }
    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * dim(), dim()};
    }

    static PixelDataset from_cube(const HyperCube& cube, const GroundTruth& gt,
                                  const PixelSet& pixels,
                                  std::span<const int> bands);
};

struct ClassifierConfig {
    std::string type = "linear";  // "linear" (one-vs-rest logistic) or "knn"
    double regularization = 1.0;
    std::uint64_t seed = 0;
    int solver_iterations = 25;
};

/// Trained pixel classifier over a fixed band subset. The baseline "linear"
/// model is a one-vs-rest L2-regularized logistic classifier fit by a fixed
/// number of Newton steps on standardized features; "knn" is 1-nearest
/// neighbor on the same standardized features. Both are deterministic.
/// Prediction ties break toward the lowest class id.
class ClassifierModel {
public:
    const std::vector<int>& bands() const { return bands_; }
    const std::vector<int>& classes() const { return classes_; }
    const std::string& type() const { return type_; }

    int predict_one(std::span<const double> features) const;
    std::vector<int> predict(const PixelDataset& data) const;

    void save(const std::filesystem::path& path) const;
    static ClassifierModel load(const std::filesystem::path& path);

private:
    friend ClassifierModel train(const PixelDataset&, const ClassifierConfig&);

    std::string type_;
    std::vector<int> bands_;
    std::vector<int> classes_;
    // per-feature standardization, from the training split only
    std::vector<double> feature_mean_;
    std::vector<double> feature_scale_;
    // linear: one row of dim+1 weights per class (bias last)
    std::vector<double> weights_;
    // knn: standardized training matrix + labels
    std::vector<double> train_features_;
    std::vector<int> train_labels_;

    std::vector<double> standardized(std::span<const double> features) const;
    double score(std::size_t class_pos, std::span<const double> std_features) const;
};

ClassifierModel train(const PixelDataset& data, const ClassifierConfig& config);

using TrainerFn = std::function<ClassifierModel(const PixelDataset&)>;

TrainerFn make_trainer(const ClassifierConfig& config);

/// Predicted class map over the full grid: model predictions on every labeled
/// pixel, 0 everywhere else. The model must have been trained on exactly
/// `bands`.
std::vector<int> build_estimated_map(const HyperCube& cube, const GroundTruth& gt,
                                     std::span<const int> bands,
                                     const ClassifierModel& model);

}  // namespace bandselect

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rtk/dataset.hpp"
#include "rtk/image.hpp"

namespace rtk {

struct Prediction {
    int label = 0;
    std::vector<double> scores;

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Index of the largest score, lowest index on ties. Throws DomainError on
/// an empty or non-finite score vector.
int argmax_lowest(std::span<const double> scores);
Prediction prediction_from_scores(std::vector<double> scores);

/// Black-box prediction interface. A single instance is not thread-safe;
/// workers each create their own through make_classifier.
class Classifier {
public:
    virtual ~Classifier() = default;
    /// One prediction per image, in order.
    virtual std::vector<Prediction> predict_batch(std::span<const Image> images) = 0;
    virtual int num_classes() const = 0;
};

/// Per-class mean images at 8x8, flattened row-major RGB (192 values each).
struct CentroidTable {
    static constexpr int kSide = 8;
    static constexpr std::size_t kLength = kSide * kSide * 3;

    std::vector<std::vector<double>> centroids;

    int num_classes() const noexcept { return static_cast<int>(centroids.size()); }
    friend bool operator==(const CentroidTable&, const CentroidTable&) = default;
};

/// Throws FitError if any class in [0, num_classes) has no sample.
CentroidTable fit_centroid(std::span<const Image> images, std::span<const int> labels, int num_classes);
CentroidTable fit_centroid(const DatasetManifest& dataset, const ImageLoader& loader = load_sample_image);

class ConstantClassifier final : public Classifier {
public:
    ConstantClassifier(int label, int num_classes);
    std::vector<Prediction> predict_batch(std::span<const Image> images) override;
    int num_classes() const override { return num_classes_; }

private:
    int label_;
    int num_classes_;
};

/// Nearest centroid by squared Euclidean distance on the 8x8 resize. Scores
/// are negated distances, so the argmax rule picks the nearest centroid.
class CentroidClassifier final : public Classifier {
public:
    explicit CentroidClassifier(CentroidTable table);
    std::vector<Prediction> predict_batch(std::span<const Image> images) override;
    int num_classes() const override { return table_.num_classes(); }

private:
    CentroidTable table_;
};

/// Label = labels[number of thresholds strictly below the mean intensity].
/// Scores are one-hot. thresholds ascending, labels.size() == thresholds.size() + 1.
class ThresholdClassifier final : public Classifier {
public:
    ThresholdClassifier(std::vector<double> thresholds, std::vector<int> labels, int num_classes);
    std::vector<Prediction> predict_batch(std::span<const Image> images) override;
    int num_classes() const override { return num_classes_; }

private:
    std::vector<double> thresholds_;
    std::vector<int> labels_;
    int num_classes_;
};

enum class EndpointKind { builtin_constant, builtin_centroid, builtin_threshold, external_stdio, external_http };

std::string_view to_string(EndpointKind kind) noexcept;

struct EndpointConfig {
    EndpointKind kind = EndpointKind::builtin_constant;
    int num_classes = 2;
    /// Resolution the model expects; 0 keeps native size.
    int input_width = 0;
    int input_height = 0;

    int constant_label = 0;
    CentroidTable centroids;
    std::vector<double> thresholds;
    std::vector<int> threshold_labels;
    std::vector<std::string> command;  ///< external_stdio argv
    std::string url;                   ///< external_http base URL
    std::chrono::milliseconds timeout{30000};
};

/// Fresh connection/instance for one worker.
std::unique_ptr<Classifier> make_classifier(const EndpointConfig& config);

/// Resizes to the endpoint resolution when one is set.
Image prepare_for_endpoint(const Image& img, const EndpointConfig& config);

}  // namespace rtk

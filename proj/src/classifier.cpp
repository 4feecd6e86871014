#include "rtk/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "rtk/error.hpp"
#include "rtk/geometry.hpp"
#include "rtk/protocol.hpp"

namespace rtk {

int argmax_lowest(std::span<const double> scores) {
    if (scores.empty()) throw DomainError("empty score vector");
    int best = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) throw DomainError("non-finite score at index " + std::to_string(i));
        if (scores[i] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}

Prediction prediction_from_scores(std::vector<double> scores) {
    const int label = argmax_lowest(scores);
    return {label, std::move(scores)};
}

namespace {

std::vector<double> one_hot(int label, int num_classes) {
    std::vector<double> scores(static_cast<std::size_t>(num_classes), 0.0);
    scores[static_cast<std::size_t>(label)] = 1.0;
    return scores;
}

std::vector<double> centroid_features(const Image& img) {
    const Image small = resize_bilinear(img, CentroidTable::kSide, CentroidTable::kSide);
    return {small.values().begin(), small.values().end()};
}

}  // namespace

// ---------------------------------------------------------------------------

CentroidTable fit_centroid(std::span<const Image> images, std::span<const int> labels, int num_classes) {
    if (images.size() != labels.size()) throw FitError("image/label count mismatch");
    if (num_classes < 1) throw FitError("num_classes must be >= 1");
    CentroidTable table;
    table.centroids.assign(static_cast<std::size_t>(num_classes), std::vector<double>(CentroidTable::kLength, 0.0));
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (std::size_t i = 0; i < images.size(); ++i) {
        const int label = labels[i];
        if (label < 0 || label >= num_classes) throw FitError("label out of range at sample " + std::to_string(i));
        const auto features = centroid_features(images[i]);
        auto& centroid = table.centroids[static_cast<std::size_t>(label)];
        for (std::size_t k = 0; k < features.size(); ++k) centroid[k] += features[k];
        ++counts[static_cast<std::size_t>(label)];
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) throw FitError("class " + std::to_string(c) + " has no samples");
        for (auto& v : table.centroids[c]) v /= static_cast<double>(counts[c]);
    }
    return table;
}

CentroidTable fit_centroid(const DatasetManifest& dataset, const ImageLoader& loader) {
    std::vector<Image> images;
    std::vector<int> labels;
    for (const auto& sample : dataset.samples) {
        images.push_back(loader(sample));
        labels.push_back(sample.label);
    }
    return fit_centroid(images, labels, dataset.num_classes);
}

ConstantClassifier::ConstantClassifier(int label, int num_classes) : label_(label), num_classes_(num_classes) {
    if (num_classes < 1 || label < 0 || label >= num_classes) {
        throw ConfigError("constant classifier label out of range");
    }
}

std::vector<Prediction> ConstantClassifier::predict_batch(std::span<const Image> images) {
    return std::vector<Prediction>(images.size(), Prediction{label_, one_hot(label_, num_classes_)});
}

CentroidClassifier::CentroidClassifier(CentroidTable table) : table_(std::move(table)) {
    if (table_.centroids.empty()) throw ConfigError("centroid table is empty");
    for (const auto& c : table_.centroids) {
        if (c.size() != CentroidTable::kLength) throw ConfigError("centroid length must be 192");
    }
}

std::vector<Prediction> CentroidClassifier::predict_batch(std::span<const Image> images) {
    std::vector<Prediction> out;
    out.reserve(images.size());
    for (const auto& img : images) {
        const auto features = centroid_features(img);
        std::vector<double> scores;
        scores.reserve(table_.centroids.size());
        for (const auto& centroid : table_.centroids) {
            double dist = 0.0;
            for (std::size_t k = 0; k < features.size(); ++k) {
                const double d = features[k] - centroid[k];
                dist += d * d;
            }
            scores.push_back(-dist);
        }
        out.push_back(prediction_from_scores(std::move(scores)));
    }
    return out;
}

ThresholdClassifier::ThresholdClassifier(std::vector<double> thresholds, std::vector<int> labels, int num_classes)
    : thresholds_(std::move(thresholds)), labels_(std::move(labels)), num_classes_(num_classes) {
    if (labels_.size() != thresholds_.size() + 1) {
        throw ConfigError("threshold classifier needs one more label than thresholds");
    }
    if (!std::is_sorted(thresholds_.begin(), thresholds_.end())) {
        throw ConfigError("threshold classifier thresholds must be ascending");
    }
    for (int label : labels_) {
        if (label < 0 || label >= num_classes_) throw ConfigError("threshold classifier label out of range");
    }
}

std::vector<Prediction> ThresholdClassifier::predict_batch(std::span<const Image> images) {
    std::vector<Prediction> out;
    out.reserve(images.size());
    for (const auto& img : images) {
        const double mean = mean_intensity(img);
        const auto above = std::count_if(thresholds_.begin(), thresholds_.end(), [&](double t) { return mean > t; });
        const int label = labels_[static_cast<std::size_t>(above)];
        out.push_back({label, one_hot(label, num_classes_)});
    }
    return out;
}

std::string_view to_string(EndpointKind kind) noexcept {
    switch (kind) {
        case EndpointKind::builtin_constant: return "builtin_constant";
        case EndpointKind::builtin_centroid: return "builtin_centroid";
        case EndpointKind::builtin_threshold: return "builtin_threshold";
        case EndpointKind::external_stdio: return "external_stdio";
        case EndpointKind::external_http: return "external_http";
    }
    return "?";
}

std::unique_ptr<Classifier> make_classifier(const EndpointConfig& config) {
    switch (config.kind) {
        case EndpointKind::builtin_constant:
            return std::make_unique<ConstantClassifier>(config.constant_label, config.num_classes);
        case EndpointKind::builtin_centroid:
            return std::make_unique<CentroidClassifier>(config.centroids);
        case EndpointKind::builtin_threshold:
            return std::make_unique<ThresholdClassifier>(config.thresholds, config.threshold_labels, config.num_classes);
        case EndpointKind::external_stdio:
            return std::make_unique<StdioClassifier>(config.command, config.num_classes, config.timeout);
        case EndpointKind::external_http:
            return std::make_unique<HttpClassifier>(config.url, config.num_classes, config.timeout);
    }
    throw ConfigError("unknown endpoint kind");
}

Image prepare_for_endpoint(const Image& img, const EndpointConfig& config) {
    if (config.input_width <= 0 || config.input_height <= 0) return img;
    return resize_bilinear(img, config.input_width, config.input_height);
}

}  // namespace rtk

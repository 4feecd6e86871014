#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rtk/classifier.hpp"
#include "rtk/error.hpp"
#include "support.hpp"

namespace rtk {
namespace {

std::vector<double> constant_centroid(double v) { return std::vector<double>(CentroidTable::kLength, v); }

TEST(Argmax, LowestIndexWinsTies) {
    const std::vector<double> tie{0.2, 0.9, 0.9, 0.1};
    EXPECT_EQ(argmax_lowest(tie), 1);
    const std::vector<double> zeros(4, 0.0);
    EXPECT_EQ(argmax_lowest(zeros), 0);
    const std::vector<double> neg{-3.0, -1.0, -2.0};
    EXPECT_EQ(argmax_lowest(neg), 1);
}

TEST(Argmax, RejectsEmptyAndNonFinite) {
    EXPECT_THROW(argmax_lowest(std::vector<double>{}), DomainError);
    EXPECT_THROW(argmax_lowest(std::vector<double>{0.1, std::numeric_limits<double>::quiet_NaN()}), DomainError);
    EXPECT_THROW(argmax_lowest(std::vector<double>{std::numeric_limits<double>::infinity()}), DomainError);
}

TEST(Constant, OneHotForEveryImage) {
    ConstantClassifier c(3, 5);
    std::vector<Image> batch{Image(2, 2, 0.1f), Image(4, 1, 0.9f), Image(1, 1, 0.0f)};
    const auto out = c.predict_batch(batch);
    ASSERT_EQ(out.size(), 3u);
    for (const auto& p : out) {
        EXPECT_EQ(p.label, 3);
        EXPECT_EQ(p.scores, (std::vector<double>{0, 0, 0, 1, 0}));
    }
    EXPECT_THROW(ConstantClassifier(5, 5), ConfigError);
}

TEST(Centroid, NearestIntensity) {
    CentroidTable table;
    table.centroids = {constant_centroid(0.25), constant_centroid(0.75)};
    CentroidClassifier c(table);
    const Image img(8, 8, 0.2f);
    const auto p = c.predict_batch(std::span(&img, 1)).at(0);
    EXPECT_EQ(p.label, 0);
    const double d0 = 192.0 * (0.2 - 0.25) * (0.2 - 0.25);
    const double d1 = 192.0 * (0.2 - 0.75) * (0.2 - 0.75);
    EXPECT_NEAR(p.scores[0], -d0, 1e-5);
    EXPECT_NEAR(p.scores[1], -d1, 1e-5);
}

TEST(Centroid, EquidistantPicksLowerClass) {
    CentroidTable table;
    table.centroids = {constant_centroid(0.25), constant_centroid(0.75)};
    CentroidClassifier c(table);
    const Image img(8, 8, 0.5f);
    EXPECT_EQ(c.predict_batch(std::span(&img, 1)).at(0).label, 0);
}

TEST(Centroid, FitOnSyntheticLevels) {
    testing::Gen gen(3);
    const SyntheticSpec spec{4, 6, 8, 8, 5};
    std::vector<Image> images;
    std::vector<int> labels;
    for (int k = 0; k < 4; ++k) {
        for (int i = 0; i < 6; ++i) {
            images.push_back(synthetic_image(spec, k, i));
            labels.push_back(k);
        }
    }
    const auto table = fit_centroid(images, labels, 4);
    ASSERT_EQ(table.num_classes(), 4);
    for (int k = 0; k < 4; ++k) {
        for (double v : table.centroids[k]) EXPECT_NEAR(v, (k + 0.5) / 4.0, 0.02);
    }
    EXPECT_EQ(fit_centroid(images, labels, 4), table);
    CentroidClassifier c(table);
    const auto predictions = c.predict_batch(images);
    for (std::size_t i = 0; i < images.size(); ++i) EXPECT_EQ(predictions[i].label, labels[i]);
}

TEST(Centroid, FitResizesToEightByEight) {
    const std::vector<Image> images{Image(16, 4, 0.3f), Image(3, 3, 0.9f)};
    const std::vector<int> labels{0, 1};
    const auto table = fit_centroid(images, labels, 2);
    EXPECT_NEAR(table.centroids[0][0], 0.3, 1e-6);
    EXPECT_NEAR(table.centroids[1][100], 0.9, 1e-6);
}

TEST(Centroid, SingleClassAlwaysPredictsIt) {
    const std::vector<Image> images{Image(8, 8, 0.4f)};
    const std::vector<int> labels{0};
    CentroidClassifier c(fit_centroid(images, labels, 1));
    testing::Gen gen(4);
    for (int i = 0; i < 10; ++i) {
        const Image img = gen.image();
        EXPECT_EQ(c.predict_batch(std::span(&img, 1)).at(0).label, 0);
    }
}

TEST(Centroid, EmptyClassIsFitError) {
    const std::vector<Image> images{Image(8, 8, 0.4f)};
    const std::vector<int> labels{0};
    EXPECT_THROW(fit_centroid(images, labels, 2), FitError);
}

TEST(Threshold, CountsThresholdsBelowMean) {
    ThresholdClassifier c({0.25, 0.5, 0.75}, {3, 2, 1, 0}, 4);
    std::vector<Image> batch{Image(2, 2, 0.1f), Image(2, 2, 0.3f), Image(2, 2, 0.5f), Image(2, 2, 0.6f),
                             Image(2, 2, 0.99f)};
    const auto out = c.predict_batch(batch);
    std::vector<int> labels;
    for (const auto& p : out) labels.push_back(p.label);
    EXPECT_EQ(labels, (std::vector<int>{3, 2, 2, 1, 0}));
    EXPECT_THROW(ThresholdClassifier({0.5}, {0}, 2), ConfigError);
    EXPECT_THROW(ThresholdClassifier({0.6, 0.5}, {0, 1, 1}, 2), ConfigError);
}

TEST(Builtins, BatchPreservesOrderAndIsPure) {
    testing::Gen gen(5);
    std::vector<Image> batch;
    for (int i = 0; i < 20; ++i) batch.push_back(gen.image(8, 8));
    CentroidTable table;
    table.centroids = {constant_centroid(0.3), constant_centroid(0.5), constant_centroid(0.7)};
    CentroidClassifier c(table);
    const auto all = c.predict_batch(batch);
    ASSERT_EQ(all.size(), batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        EXPECT_EQ(c.predict_batch(std::span(&batch[i], 1)).at(0), all[i]);
    }
    EXPECT_EQ(c.predict_batch(batch), all);
}

TEST(Endpoint, MakeClassifierAndPrepare) {
    EndpointConfig cfg;
    cfg.kind = EndpointKind::builtin_threshold;
    cfg.num_classes = 2;
    cfg.thresholds = {0.5};
    cfg.threshold_labels = {0, 1};
    cfg.input_width = 4;
    cfg.input_height = 2;
    auto c = make_classifier(cfg);
    EXPECT_EQ(c->num_classes(), 2);
    const Image prepared = prepare_for_endpoint(Image(10, 10, 0.6f), cfg);
    EXPECT_EQ(prepared.width(), 4);
    EXPECT_EQ(prepared.height(), 2);
    EXPECT_EQ(c->predict_batch(std::span(&prepared, 1)).at(0).label, 1);
    cfg.input_width = cfg.input_height = 0;
    const Image native(5, 3, 0.2f);
    EXPECT_EQ(prepare_for_endpoint(native, cfg), native);
}

}  // namespace
}  // namespace rtk

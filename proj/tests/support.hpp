#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "rtk/classifier.hpp"
#include "rtk/dataset.hpp"
#include "rtk/image.hpp"

namespace rtk::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "rtk") {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                (tag + "_" + std::to_string(rd()) + "_" + std::to_string(++counter));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Hand-rolled generators for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    std::uint64_t u64() { return engine_(); }
    bool coin() { return integer(0, 1) == 1; }

    Image image(int w, int h) {
        std::vector<float> data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
        for (auto& v : data) v = static_cast<float>(uniform(0.0, 1.0));
        return Image(w, h, std::move(data));
    }
    Image image(int max_side = 12) { return image(integer(1, max_side), integer(1, max_side)); }
    /// Values on the 8-bit lattice c/255.
    Image image_8bit(int w, int h) {
        std::vector<float> data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
        for (auto& v : data) v = static_cast<float>(integer(0, 255) / 255.0);
        return Image(w, h, std::move(data));
    }

private:
    std::mt19937_64 engine_;
};

/// Dataset held in memory; the loader serves images by sample id.
struct MemoryDataset {
    DatasetManifest manifest;
    std::map<std::string, Image> images;

    explicit MemoryDataset(int num_classes) {
        manifest.num_classes = num_classes;
        for (int k = 0; k < num_classes; ++k) manifest.class_names.push_back("class" + std::to_string(k));
    }
    void add(const std::string& id, int label, Image img, Split split = Split::test) {
        manifest.samples.push_back({id, id + ".ppm", label, split});
        images.insert_or_assign(id, std::move(img));
    }
    ImageLoader loader() const {
        return [this](const LabeledSample& s) { return images.at(s.sample_id); };
    }
};

/// Label 1 iff mean intensity > t.
inline EndpointConfig threshold_endpoint(double t = 0.5) {
    EndpointConfig e;
    e.kind = EndpointKind::builtin_threshold;
    e.num_classes = 2;
    e.thresholds = {t};
    e.threshold_labels = {0, 1};
    return e;
}

inline EndpointConfig constant_endpoint(int label, int num_classes) {
    EndpointConfig e;
    e.kind = EndpointKind::builtin_constant;
    e.num_classes = num_classes;
    e.constant_label = label;
    return e;
}

}  // namespace rtk::testing

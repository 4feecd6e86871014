#include "rtk/image.hpp"

#include <cmath>
#include <string>

#include "rtk/error.hpp"

namespace rtk {

namespace {

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw DomainError("image dimensions must be >= 1, got " + std::to_string(width) + "x" +
                          std::to_string(height));
    }
}

}  // namespace

Image::Image(int width, int height, float value) : width_(width), height_(height) {
    check_dims(width, height);
    if (!(value >= 0.0f && value <= 1.0f)) {
        throw DomainError("image fill value outside [0,1]");
    }
    data_.assign(pixel_count() * kChannels, value);
}

Image::Image(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != pixel_count() * kChannels) {
        throw DomainError("image data length " + std::to_string(data_.size()) + " != " +
                          std::to_string(pixel_count() * kChannels));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!(data_[i] >= 0.0f && data_[i] <= 1.0f)) {
            throw DomainError("image value at index " + std::to_string(i) + " outside [0,1]");
        }
    }
}

float clip_unit(double v) noexcept {
    if (!(v > 0.0)) return 0.0f;
    if (v >= 1.0) return 1.0f;
    return static_cast<float>(v);
}

Image clipped_image(int width, int height, std::vector<double> values) {
    std::vector<float> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = clip_unit(values[i]);
    return Image(width, height, std::move(out));
}

double mean_intensity(const Image& img) noexcept {
    double sum = 0.0;
    for (float v : img.values()) sum += v;
    return img.empty() ? 0.0 : sum / static_cast<double>(img.size());
}

}  // namespace rtk

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rtk {

/// RGB raster with float channel values in [0,1], row-major and
/// channel-interleaved. Every constructor enforces the range invariant, so an
/// Image that exists is always valid.
class Image {
public:
    static constexpr int kChannels = 3;

    Image() = default;
    /// Filled with a constant value.
    Image(int width, int height, float value = 0.0f);
    /// Takes ownership of `data`; throws DomainError on bad size or range.
    Image(int width, int height, std::vector<float> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float at(int x, int y, int c) const noexcept { return data_[index(x, y, c)]; }
    std::span<const float> values() const noexcept { return data_; }

    std::size_t index(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) * kChannels + static_cast<std::size_t>(c);
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

/// Clamp to [0,1]; NaN maps to 0.
float clip_unit(double v) noexcept;

/// Build an image from unclamped values, clipping each to [0,1].
Image clipped_image(int width, int height, std::vector<double> values);

/// Mean of all channel values.
double mean_intensity(const Image& img) noexcept;

}  // namespace rtk

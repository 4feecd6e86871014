#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rtk/image.hpp"

namespace rtk {

enum class ImageFormat { png, ppm };

/// Decode 8-bit PNG (RGB or RGBA, alpha dropped) or binary PPM (P6, maxval
/// 255). Channel value c becomes c/255.
Image decode_image(std::span<const std::uint8_t> bytes, ImageFormat format);
/// Format picked from the magic bytes.
Image decode_image(std::span<const std::uint8_t> bytes);

/// Channel value v is stored as round(v*255).
std::vector<std::uint8_t> encode_image(const Image& img, ImageFormat format);

Image read_image(const std::filesystem::path& path);
/// Format chosen from the extension (.png, otherwise PPM).
void write_image(const Image& img, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);

/// v -> round(v*255) clamped to [0,255].
std::uint8_t quantize_channel(float v) noexcept;
/// c -> c/255 as float.
float dequantize_channel(std::uint8_t c) noexcept;
/// The image an 8-bit codec round trip would produce.
Image quantize_8bit(const Image& img);

}  // namespace rtk

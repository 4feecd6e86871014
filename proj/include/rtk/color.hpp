#pragma once

namespace rtk {

struct Rgb {
    double r = 0.0, g = 0.0, b = 0.0;
};

/// h in [0,1) (fraction of a turn), s and v in [0,1].
struct Hsv {
    double h = 0.0, s = 0.0, v = 0.0;
};

/// Hexcone conversion. Achromatic pixels get h = 0.
Hsv rgb_to_hsv(const Rgb& p) noexcept;
Rgb hsv_to_rgb(const Hsv& p) noexcept;

/// ITU-R BT.601 luma weights.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline double luminance(double r, double g, double b) noexcept {
    return kLumaR * r + kLumaG * g + kLumaB * b;
}

}  // namespace rtk

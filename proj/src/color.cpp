#include "rtk/color.hpp"

#include <algorithm>
#include <cmath>

namespace rtk {

Hsv rgb_to_hsv(const Rgb& p) noexcept {
    const double max = std::max({p.r, p.g, p.b});
    const double min = std::min({p.r, p.g, p.b});
    const double chroma = max - min;
    Hsv out;
    out.v = max;
    out.s = max > 0.0 ? chroma / max : 0.0;
    if (chroma <= 0.0) return out;

    double sector = 0.0;
    if (max == p.r) {
        sector = (p.g - p.b) / chroma;
        if (sector < 0.0) sector += 6.0;
    } else if (max == p.g) {
        sector = (p.b - p.r) / chroma + 2.0;
    } else {
        sector = (p.r - p.g) / chroma + 4.0;
    }
    out.h = sector / 6.0;
    if (out.h >= 1.0) out.h -= 1.0;
    return out;
}

Rgb hsv_to_rgb(const Hsv& p) noexcept {
    double h = p.h - std::floor(p.h);
    const double sector = h * 6.0;
    const double chroma = p.v * p.s;
    const double x = chroma * (1.0 - std::abs(std::fmod(sector, 2.0) - 1.0));
    const double m = p.v - chroma;
    double r = 0.0, g = 0.0, b = 0.0;
    switch (std::min(static_cast<int>(sector), 5)) {
        case 0: r = chroma; g = x; break;
        case 1: r = x; g = chroma; break;
        case 2: g = chroma; b = x; break;
        case 3: g = x; b = chroma; break;
        case 4: r = x; b = chroma; break;
        default: r = chroma; b = x; break;
    }
    return {r + m, g + m, b + m};
}

}  // namespace rtk

#include "rtk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rtk/error.hpp"

namespace rtk {

namespace {

// Source sample position for output index i, clamped to [0, in - 1].
double source_coord(int i, int in, int out) {
    const double s = (static_cast<double>(i) + 0.5) * static_cast<double>(in) / static_cast<double>(out) - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(in - 1));
}

struct Tap {
    int lo;
    int hi;
    double t;
};

// Bilinear tap for a clamped coordinate.
Tap tap_for(double s, int size) {
    s = std::clamp(s, 0.0, static_cast<double>(size - 1));
    const int lo = static_cast<int>(std::floor(s));
    const int hi = std::min(lo + 1, size - 1);
    return {lo, hi, s - lo};
}

// a + t (b - a) keeps constants exact.
inline double lerp(double a, double b, double t) { return a + t * (b - a); }

// Exact sin/cos for multiples of 90 degrees.
void sin_cos_deg(double deg, double& s, double& c) {
    const double turns = deg / 90.0;
    if (turns == std::floor(turns) && std::abs(turns) < 1e9) {
        const long q = ((static_cast<long>(turns) % 4) + 4) % 4;
        constexpr double kSin[4] = {0.0, 1.0, 0.0, -1.0};
        constexpr double kCos[4] = {1.0, 0.0, -1.0, 0.0};
        s = kSin[q];
        c = kCos[q];
        return;
    }
    const double rad = deg * std::numbers::pi / 180.0;
    s = std::sin(rad);
    c = std::cos(rad);
}

}  // namespace

Image resize_bilinear(const Image& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw DomainError("resize target must be at least 1x1");
    if (out_w == img.width() && out_h == img.height()) return img;

    std::vector<Tap> xs(static_cast<std::size_t>(out_w));
    std::vector<Tap> ys(static_cast<std::size_t>(out_h));
    for (int i = 0; i < out_w; ++i) xs[i] = tap_for(source_coord(i, img.width(), out_w), img.width());
    for (int j = 0; j < out_h; ++j) ys[j] = tap_for(source_coord(j, img.height(), out_h), img.height());

    std::vector<float> out(static_cast<std::size_t>(out_w) * out_h * 3);
    std::size_t k = 0;
    for (int j = 0; j < out_h; ++j) {
        const Tap& ty = ys[j];
        for (int i = 0; i < out_w; ++i) {
            const Tap& tx = xs[i];
            for (int c = 0; c < 3; ++c) {
                const double top = lerp(img.at(tx.lo, ty.lo, c), img.at(tx.hi, ty.lo, c), tx.t);
                const double bottom = lerp(img.at(tx.lo, ty.hi, c), img.at(tx.hi, ty.hi, c), tx.t);
                out[k++] = clip_unit(lerp(top, bottom, ty.t));
            }
        }
    }
    return Image(out_w, out_h, std::move(out));
}

std::vector<double> resize_field_bilinear(std::span<const double> field, int in_w, int in_h, int out_w,
                                          int out_h) {
    if (in_w < 1 || in_h < 1 || out_w < 1 || out_h < 1 ||
        field.size() != static_cast<std::size_t>(in_w) * static_cast<std::size_t>(in_h)) {
        throw DomainError("resize_field_bilinear: bad dimensions");
    }
    auto at = [&](int x, int y) { return field[static_cast<std::size_t>(y) * in_w + x]; };
    std::vector<double> out(static_cast<std::size_t>(out_w) * out_h);
    for (int j = 0; j < out_h; ++j) {
        const Tap ty = tap_for(source_coord(j, in_h, out_h), in_h);
        for (int i = 0; i < out_w; ++i) {
            const Tap tx = tap_for(source_coord(i, in_w, out_w), in_w);
            const double top = lerp(at(tx.lo, ty.lo), at(tx.hi, ty.lo), tx.t);
            const double bottom = lerp(at(tx.lo, ty.hi), at(tx.hi, ty.hi), tx.t);
            out[static_cast<std::size_t>(j) * out_w + i] = lerp(top, bottom, ty.t);
        }
    }
    return out;
}

AffineMap AffineMap::inverse() const {
    const double det = a * d - b * c;
    if (det == 0.0 || !std::isfinite(det)) throw DomainError("affine map is singular");
    AffineMap inv;
    inv.a = d / det;
    inv.b = -b / det;
    inv.c = -c / det;
    inv.d = a / det;
    inv.tx = -(inv.a * tx + inv.b * ty);
    inv.ty = -(inv.c * tx + inv.d * ty);
    return inv;
}

AffineMap AffineMap::then(const AffineMap& next) const {
    AffineMap r;
    r.a = next.a * a + next.b * c;
    r.b = next.a * b + next.b * d;
    r.c = next.c * a + next.d * c;
    r.d = next.c * b + next.d * d;
    r.tx = next.a * tx + next.b * ty + next.tx;
    r.ty = next.c * tx + next.d * ty + next.ty;
    return r;
}

AffineMap affine_map_for(const AffineParams& p, int width, int height) {
    if (!(p.scale > 0.0)) throw DomainError("affine_warp: scale must be > 0");
    double s = 0.0;
    double co = 1.0;
    sin_cos_deg(p.rotation_deg, s, co);

    // Rotation (counter-clockwise on screen with y down), then shear, then scale.
    const double r00 = co, r01 = s, r10 = -s, r11 = co;
    const double h00 = r00 + p.shear_x * r10, h01 = r01 + p.shear_x * r11;
    const double h10 = r10, h11 = r11;
    AffineMap m;
    m.a = p.scale * h00;
    m.b = p.scale * h01;
    m.c = p.scale * h10;
    m.d = p.scale * h11;

    // Centre of the pixel grid in pixel-centre coordinates.
    const double cx = (width - 1) / 2.0;
    const double cy = (height - 1) / 2.0;
    m.tx = cx - (m.a * cx + m.b * cy) + p.translate_x * width;
    m.ty = cy - (m.c * cx + m.d * cy) + p.translate_y * height;
    return m;
}

Image warp_affine(const Image& img, const AffineMap& forward) {
    const AffineMap inv = forward.inverse();
    const int w = img.width();
    const int h = img.height();
    std::vector<float> out(img.size());
    std::size_t k = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double sx = inv.a * x + inv.b * y + inv.tx;
            const double sy = inv.c * x + inv.d * y + inv.ty;
            const Tap tx = tap_for(sx, w);
            const Tap ty = tap_for(sy, h);
            for (int c = 0; c < 3; ++c) {
                const double top = lerp(img.at(tx.lo, ty.lo, c), img.at(tx.hi, ty.lo, c), tx.t);
                const double bottom = lerp(img.at(tx.lo, ty.hi, c), img.at(tx.hi, ty.hi, c), tx.t);
                out[k++] = clip_unit(lerp(top, bottom, ty.t));
            }
        }
    }
    return Image(w, h, std::move(out));
}

Image affine_warp(const Image& img, const AffineParams& params) {
    return warp_affine(img, affine_map_for(params, img.width(), img.height()));
}

}  // namespace rtk

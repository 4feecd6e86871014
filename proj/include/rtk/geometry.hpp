#pragma once

#include <span>
#include <vector>

#include "rtk/image.hpp"

namespace rtk {

/// Bilinear resize with half-pixel-centred sampling
/// (source = (i + 0.5) * in / out - 0.5), clamped to the edge.
Image resize_bilinear(const Image& img, int out_w, int out_h);

/// Single-channel variant used for upsampling scalar fields such as the
/// adaptive brightness grid. `field` is row-major, in_w * in_h values.
std::vector<double> resize_field_bilinear(std::span<const double> field, int in_w, int in_h, int out_w,
                                          int out_h);

/// Forward 2x3 map in pixel-centre coordinates: p' = linear * p + offset.
struct AffineMap {
    double a = 1.0, b = 0.0, tx = 0.0;  // x' = a x + b y + tx
    double c = 0.0, d = 1.0, ty = 0.0;  // y' = c x + d y + ty

    AffineMap inverse() const;
    AffineMap then(const AffineMap& next) const;  // next applied after *this
};

struct AffineParams {
    double rotation_deg = 0.0;  ///< counter-clockwise as displayed (y axis points down)
    double translate_x = 0.0;   ///< fraction of width
    double translate_y = 0.0;   ///< fraction of height
    double scale = 1.0;
    double shear_x = 0.0;
};

/// Forward map about the image centre: scale * shear * rotation, then translation.
AffineMap affine_map_for(const AffineParams& params, int width, int height);

/// Inverse-mapped warp with bilinear sampling and edge-replicate fill.
Image warp_affine(const Image& img, const AffineMap& forward);

/// Throws DomainError when scale <= 0.
Image affine_warp(const Image& img, const AffineParams& params);

}  // namespace rtk

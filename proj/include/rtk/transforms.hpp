#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rtk/color.hpp"
#include "rtk/image.hpp"
#include "rtk/random.hpp"

namespace rtk {

// ---------------------------------------------------------------------------
// Individual perturbations. All return images in [0,1]; stochastic ones draw
// from `stream` in row-major, channel-interleaved order.

Image gaussian_noise(const Image& img, double sigma, RandomStream& stream);
Image uniform_noise(const Image& img, double amp, RandomStream& stream);
/// Per pixel: one selection uniform; selected pixels (u < p) draw a second
/// uniform for polarity and become black (u < 0.5) or white.
Image impulse_noise(const Image& img, double p, RandomStream& stream);

enum class LinfMode { corner, uniform };
/// corner: every value moves by +-eps (sign from the stream); uniform: by
/// U(-eps, eps). The stored change never exceeds eps.
Image pixel_linf_candidate(const Image& img, double eps, RandomStream& stream, LinfMode mode);
/// k distinct pixels (partial Fisher-Yates on the stream), each channel then
/// set to 0 or 1 by one draw.
Image pixel_l0_candidate(const Image& img, long k, RandomStream& stream);

/// Separable Gaussian, radius ceil(3 sigma), normalised, edge replicate.
Image blur(const Image& img, double sigma);
/// Normalised 1-D kernel of length 2 * ceil(3 sigma) + 1.
std::vector<double> gaussian_kernel(double sigma);
/// Unsharp mask: x + alpha (x - blur(x, 1)).
Image sharpen(const Image& img, double alpha);

Image flip_horizontal(const Image& img);

/// Brightness (x * b), then contrast about the mean image luminance, then
/// saturation about per-pixel luminance. A factor of exactly 1 skips its stage.
Image color_adjust(const Image& img, double brightness_f, double contrast_f, double saturation_f);
/// dh in [-0.5, 0.5], a fraction of a full hue turn.
Image hue_shift(const Image& img, double dh);
Image grayscale(const Image& img);
/// bits in [1, 8]: v -> round(v (2^bits - 1)) / (2^bits - 1).
/// round(v (2^bits - 1)) / (2^bits - 1); 8 bits is the native depth and
/// returns the image unchanged.
Image color_depth(const Image& img, int bits);
/// `grid` is m x m row-major factors, upsampled bilinearly to a full field.
Image adaptive_brightness(const Image& img, std::span<const double> grid, int m);

struct StickerParams {
    double cx = 0.5, cy = 0.5;  ///< centre, fraction of width/height
    double w = 0.0, h = 0.0;    ///< size, fraction of width/height
    double phi_deg = 0.0;
    Rgb color{1.0, 1.0, 1.0};
};
/// Pixels whose centre lies inside the rotated rectangle take the colour.
Image sticker(const Image& img, const StickerParams& params);

// ---------------------------------------------------------------------------
// Property catalog.

enum class TransformKind {
    gaussian_noise,
    uniform_noise,
    impulse_noise,
    pixel_l0,
    pixel_linf,
    rotate,
    translate,
    scale,
    shear,
    blur,
    sharpen,
    flip,
    brightness,
    contrast,
    saturation,
    hue,
    grayscale,
    color_depth,
    adaptive_brightness,
    sticker,
};

std::string_view to_string(TransformKind kind) noexcept;
std::optional<TransformKind> parse_transform_kind(std::string_view name) noexcept;
std::span<const TransformKind> all_transform_kinds() noexcept;
bool is_stochastic(TransformKind kind) noexcept;

enum class DimKind { continuous, integer, categorical, binary };
std::string_view to_string(DimKind kind) noexcept;

/// One axis of a parameter domain. Categorical values are indices into
/// `choices`; binary values are 0 or 1.
struct ParamDim {
    std::string name;
    DimKind kind = DimKind::continuous;
    double low = 0.0;
    double high = 0.0;
    std::vector<std::string> choices;

    bool contains(double value) const noexcept;
    /// Number of distinct values for discrete kinds.
    std::size_t cardinality() const noexcept;
};

struct ParamDomain {
    std::vector<ParamDim> dims;
    bool includes_identity = true;

    bool contains(std::span<const double> theta) const noexcept;
};

/// Kind-specific settings that shape the schema rather than the search.
struct TransformOptions {
    int grid_size = 4;  ///< adaptive_brightness: m for the m x m grid
};

struct TransformSpec {
    TransformKind kind = TransformKind::brightness;
    ParamDomain domain;
    TransformOptions options;

    bool stochastic() const noexcept { return is_stochastic(kind); }
};

/// Default bounds for a kind. The L0 pixel budget defaults to 1% of a
/// 32x32 image (k in [0, 11]).
TransformSpec make_transform(TransformKind kind, TransformOptions options = {});

/// Dimension layout (names, kinds, categorical choices) a kind requires.
std::vector<ParamDim> schema_for(TransformKind kind, const TransformOptions& options);
/// Parameter point that leaves every image unchanged.
std::vector<double> identity_point(const TransformSpec& spec);

/// Throws ConfigError when the domain does not match the kind's schema,
/// bounds are inverted, or includes_identity is claimed but false.
void check_schema(const TransformSpec& spec);

/// Parses sticker colour choices: "white", "black", "yellow", or "#rrggbb".
Rgb parse_color(std::string_view text);

/// Dispatches to the operation for spec.kind. Throws DomainError when theta
/// lies outside spec.domain. An L0 budget above the pixel count
/// changes every pixel.
Image apply(const TransformSpec& spec, const Image& img, std::span<const double> theta, RandomStream& stream);

}  // namespace rtk

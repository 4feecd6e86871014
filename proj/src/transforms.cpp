#include "rtk/transforms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "rtk/error.hpp"
#include "rtk/geometry.hpp"

namespace rtk {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw DomainError(message);
}

Image map_values(const Image& img, auto&& fn) {
    std::vector<float> out(img.size());
    auto in = img.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = clip_unit(fn(static_cast<double>(in[i])));
    return Image(img.width(), img.height(), std::move(out));
}

}  // namespace

// ---------------------------------------------------------------------------
// Noise and pixel perturbations

Image gaussian_noise(const Image& img, double sigma, RandomStream& stream) {
    require(sigma >= 0.0, "gaussian_noise: sigma must be >= 0");
    return map_values(img, [&](double v) { return v + stream.next_normal(sigma); });
}

Image uniform_noise(const Image& img, double amp, RandomStream& stream) {
    require(amp >= 0.0, "uniform_noise: amp must be >= 0");
    if (amp == 0.0) return img;
    return map_values(img, [&](double v) { return v + amp * (2.0 * stream.next_uniform() - 1.0); });
}

Image impulse_noise(const Image& img, double p, RandomStream& stream) {
    require(p >= 0.0 && p <= 1.0, "impulse_noise: p must lie in [0,1]");
    std::vector<float> out(img.values().begin(), img.values().end());
    for (std::size_t px = 0; px < img.pixel_count(); ++px) {
        if (stream.next_uniform() < p) {
            const float value = stream.next_uniform() < 0.5 ? 0.0f : 1.0f;
            std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(px * 3), 3, value);
        }
    }
    return Image(img.width(), img.height(), std::move(out));
}

Image pixel_linf_candidate(const Image& img, double eps, RandomStream& stream, LinfMode mode) {
    require(eps >= 0.0, "pixel_linf: eps must be >= 0");
    if (eps == 0.0) return img;
    std::vector<float> out(img.size());
    auto in = img.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double u = stream.next_uniform();
        const double delta = mode == LinfMode::corner ? (u < 0.5 ? -eps : eps) : eps * (2.0 * u - 1.0);
        const double x = in[i];
        float y = clip_unit(x + delta);
        // float rounding may push the stored value just past the budget
        while (std::abs(static_cast<double>(y) - x) > eps) y = std::nextafter(y, in[i]);
        out[i] = y;
    }
    return Image(img.width(), img.height(), std::move(out));
}

Image pixel_l0_candidate(const Image& img, long k, RandomStream& stream) {
    const std::size_t n = img.pixel_count();
    require(k >= 0 && static_cast<std::size_t>(k) <= n, "pixel_l0: k must lie in [0, width*height]");
    if (k == 0) return img;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
        const auto span = static_cast<double>(n - i);
        const std::size_t j = i + std::min(static_cast<std::size_t>(stream.next_uniform() * span), n - i - 1);
        std::swap(order[i], order[j]);
    }
    std::vector<float> out(img.values().begin(), img.values().end());
    for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
        for (std::size_t c = 0; c < 3; ++c) out[order[i] * 3 + c] = stream.next_uniform() < 0.5 ? 0.0f : 1.0f;
    }
    return Image(img.width(), img.height(), std::move(out));
}

// ---------------------------------------------------------------------------
// Filters

std::vector<double> gaussian_kernel(double sigma) {
    require(sigma > 0.0, "gaussian_kernel: sigma must be > 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[static_cast<std::size_t>(i + radius)];
    }
    for (auto& v : k) v /= sum;
    return k;
}

Image blur(const Image& img, double sigma) {
    require(sigma >= 0.0, "blur: sigma must be >= 0");
    if (sigma == 0.0) return img;
    const auto kernel = gaussian_kernel(sigma);
    const int radius = static_cast<int>(kernel.size() / 2);
    const int w = img.width();
    const int h = img.height();

    std::vector<double> horizontal(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int t = -radius; t <= radius; ++t) {
                    const int sx = std::clamp(x + t, 0, w - 1);
                    acc += kernel[static_cast<std::size_t>(t + radius)] * img.at(sx, y, c);
                }
                horizontal[img.index(x, y, c)] = acc;
            }
        }
    }
    std::vector<double> out(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int t = -radius; t <= radius; ++t) {
                    const int sy = std::clamp(y + t, 0, h - 1);
                    acc += kernel[static_cast<std::size_t>(t + radius)] * horizontal[img.index(x, sy, c)];
                }
                out[img.index(x, y, c)] = acc;
            }
        }
    }
    return clipped_image(w, h, std::move(out));
}

Image sharpen(const Image& img, double alpha) {
    require(alpha >= 0.0, "sharpen: alpha must be >= 0");
    if (alpha == 0.0) return img;
    const Image soft = blur(img, 1.0);
    std::vector<double> out(img.size());
    auto x = img.values();
    auto b = soft.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x[i] + alpha * (static_cast<double>(x[i]) - b[i]);
    }
    return clipped_image(img.width(), img.height(), std::move(out));
}

Image flip_horizontal(const Image& img) {
    std::vector<float> out(img.size());
    const int w = img.width();
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) out[img.index(x, y, c)] = img.at(w - 1 - x, y, c);
        }
    }
    return Image(w, img.height(), std::move(out));
}

// ---------------------------------------------------------------------------
// Colour

Image color_adjust(const Image& img, double brightness_f, double contrast_f, double saturation_f) {
    require(brightness_f >= 0.0 && contrast_f >= 0.0 && saturation_f >= 0.0,
            "color_adjust: factors must be >= 0");
    Image out = img;
    if (brightness_f != 1.0) {
        out = map_values(out, [&](double v) { return v * brightness_f; });
    }
    if (contrast_f != 1.0) {
        double mean = 0.0;
        auto v = out.values();
        for (std::size_t p = 0; p < out.pixel_count(); ++p) mean += luminance(v[3 * p], v[3 * p + 1], v[3 * p + 2]);
        mean /= static_cast<double>(out.pixel_count());
        out = map_values(out, [&](double x) { return mean + contrast_f * (x - mean); });
    }
    if (saturation_f != 1.0) {
        auto v = out.values();
        std::vector<double> next(out.size());
        for (std::size_t p = 0; p < out.pixel_count(); ++p) {
            const double g = luminance(v[3 * p], v[3 * p + 1], v[3 * p + 2]);
            for (std::size_t c = 0; c < 3; ++c) next[3 * p + c] = g + saturation_f * (v[3 * p + c] - g);
        }
        out = clipped_image(out.width(), out.height(), std::move(next));
    }
    return out;
}

Image hue_shift(const Image& img, double dh) {
    require(dh >= -0.5 && dh <= 0.5, "hue_shift: dh must lie in [-0.5, 0.5]");
    if (dh == 0.0) return img;
    auto v = img.values();
    std::vector<double> out(img.size());
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        Hsv hsv = rgb_to_hsv({v[3 * p], v[3 * p + 1], v[3 * p + 2]});
        hsv.h += dh;
        hsv.h -= std::floor(hsv.h);
        const Rgb rgb = hsv_to_rgb(hsv);
        out[3 * p] = rgb.r;
        out[3 * p + 1] = rgb.g;
        out[3 * p + 2] = rgb.b;
    }
    return clipped_image(img.width(), img.height(), std::move(out));
}

Image grayscale(const Image& img) {
    auto v = img.values();
    std::vector<float> out(img.size());
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const float g = clip_unit(luminance(v[3 * p], v[3 * p + 1], v[3 * p + 2]));
        out[3 * p] = out[3 * p + 1] = out[3 * p + 2] = g;
    }
    return Image(img.width(), img.height(), std::move(out));
}

Image color_depth(const Image& img, int bits) {
    require(bits >= 1 && bits <= 8, "color_depth: bits must lie in [1, 8]");
    if (bits == 8) return img;
    const double levels = static_cast<double>((1 << bits) - 1);
    return map_values(img, [&](double v) { return std::round(v * levels) / levels; });
}

Image adaptive_brightness(const Image& img, std::span<const double> grid, int m) {
    require(m >= 1 && grid.size() == static_cast<std::size_t>(m) * static_cast<std::size_t>(m),
            "adaptive_brightness: grid must hold m*m factors");
    require(std::all_of(grid.begin(), grid.end(), [](double f) { return f >= 0.0; }),
            "adaptive_brightness: factors must be >= 0");
    const auto field = resize_field_bilinear(grid, m, m, img.width(), img.height());
    auto v = img.values();
    std::vector<float> out(img.size());
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        for (std::size_t c = 0; c < 3; ++c) out[3 * p + c] = clip_unit(static_cast<double>(v[3 * p + c]) * field[p]);
    }
    return Image(img.width(), img.height(), std::move(out));
}

Image sticker(const Image& img, const StickerParams& s) {
    require(s.w >= 0.0 && s.h >= 0.0, "sticker: size must be >= 0");
    require(s.color.r >= 0 && s.color.r <= 1 && s.color.g >= 0 && s.color.g <= 1 && s.color.b >= 0 &&
                s.color.b <= 1,
            "sticker: colour must lie in [0,1]");
    const int width = img.width();
    const int height = img.height();
    const double cx = s.cx * width;
    const double cy = s.cy * height;
    const double half_w = s.w * width / 2.0;
    const double half_h = s.h * height / 2.0;
    const double rad = s.phi_deg * 3.14159265358979323846 / 180.0;
    const double co = std::cos(rad);
    const double si = std::sin(rad);

    std::vector<float> out(img.values().begin(), img.values().end());
    const std::array<float, 3> color{static_cast<float>(s.color.r), static_cast<float>(s.color.g),
                                     static_cast<float>(s.color.b)};
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            // Pixel centre relative to the sticker centre, in the sticker's frame.
            const double dx = x + 0.5 - cx;
            const double dy = y + 0.5 - cy;
            const double u = co * dx + si * dy;
            const double v = -si * dx + co * dy;
            if (u >= -half_w && u < half_w && v >= -half_h && v < half_h) {
                for (int c = 0; c < 3; ++c) out[img.index(x, y, c)] = color[static_cast<std::size_t>(c)];
            }
        }
    }
    return Image(width, height, std::move(out));
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

struct KindInfo {
    TransformKind kind;
    std::string_view name;
    bool stochastic;
};

constexpr std::array<KindInfo, 20> kKinds{{
    {TransformKind::gaussian_noise, "gaussian_noise", true},
    {TransformKind::uniform_noise, "uniform_noise", true},
    {TransformKind::impulse_noise, "impulse_noise", true},
    {TransformKind::pixel_l0, "pixel_l0", true},
    {TransformKind::pixel_linf, "pixel_linf", true},
    {TransformKind::rotate, "rotate", false},
    {TransformKind::translate, "translate", false},
    {TransformKind::scale, "scale", false},
    {TransformKind::shear, "shear", false},
    {TransformKind::blur, "blur", false},
    {TransformKind::sharpen, "sharpen", false},
    {TransformKind::flip, "flip", false},
    {TransformKind::brightness, "brightness", false},
    {TransformKind::contrast, "contrast", false},
    {TransformKind::saturation, "saturation", false},
    {TransformKind::hue, "hue", false},
    {TransformKind::grayscale, "grayscale", false},
    {TransformKind::color_depth, "color_depth", false},
    {TransformKind::adaptive_brightness, "adaptive_brightness", false},
    {TransformKind::sticker, "sticker", false},
}};

constexpr std::array<TransformKind, 20> kAllKinds = [] {
    std::array<TransformKind, 20> out{};
    for (std::size_t i = 0; i < kKinds.size(); ++i) out[i] = kKinds[i].kind;
    return out;
}();

const KindInfo& info(TransformKind kind) {
    return kKinds[static_cast<std::size_t>(kind)];
}

ParamDim continuous(std::string name, double low, double high) {
    return {std::move(name), DimKind::continuous, low, high, {}};
}
ParamDim integer(std::string name, double low, double high) {
    return {std::move(name), DimKind::integer, low, high, {}};
}
ParamDim binary(std::string name) { return {std::move(name), DimKind::binary, 0.0, 1.0, {}}; }
ParamDim categorical(std::string name, std::vector<std::string> choices) {
    const double high = static_cast<double>(choices.size()) - 1.0;
    return {std::move(name), DimKind::categorical, 0.0, high, std::move(choices)};
}

long as_long(double v) { return std::lround(v); }

}  // namespace

std::string_view to_string(TransformKind kind) noexcept { return info(kind).name; }

std::optional<TransformKind> parse_transform_kind(std::string_view name) noexcept {
    for (const auto& k : kKinds) {
        if (k.name == name) return k.kind;
    }
    return std::nullopt;
}

std::span<const TransformKind> all_transform_kinds() noexcept { return kAllKinds; }

bool is_stochastic(TransformKind kind) noexcept { return info(kind).stochastic; }

std::string_view to_string(DimKind kind) noexcept {
    switch (kind) {
        case DimKind::continuous: return "continuous";
        case DimKind::integer: return "integer";
        case DimKind::categorical: return "categorical";
        case DimKind::binary: return "binary";
    }
    return "?";
}

bool ParamDim::contains(double value) const noexcept {
    if (!std::isfinite(value)) return false;
    switch (kind) {
        case DimKind::continuous:
            return value >= low && value <= high;
        case DimKind::integer:
        case DimKind::binary:
            return value == std::round(value) && value >= low && value <= high;
        case DimKind::categorical:
            return value == std::round(value) && value >= 0.0 && value < static_cast<double>(choices.size());
    }
    return false;
}

std::size_t ParamDim::cardinality() const noexcept {
    switch (kind) {
        case DimKind::categorical: return choices.size();
        case DimKind::integer:
        case DimKind::binary: return static_cast<std::size_t>(std::max(0.0, high - low + 1.0));
        case DimKind::continuous: return low == high ? 1 : 0;
    }
    return 0;
}

bool ParamDomain::contains(std::span<const double> theta) const noexcept {
    if (theta.size() != dims.size()) return false;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (!dims[i].contains(theta[i])) return false;
    }
    return true;
}

std::vector<ParamDim> schema_for(TransformKind kind, const TransformOptions& options) {
    switch (kind) {
        case TransformKind::gaussian_noise: return {continuous("sigma", 0.0, 0.1)};
        case TransformKind::uniform_noise: return {continuous("amp", 0.0, 0.1)};
        case TransformKind::impulse_noise: return {continuous("p", 0.0, 0.05)};
        case TransformKind::pixel_l0: return {integer("k", 0.0, 11.0)};
        case TransformKind::pixel_linf:
            return {continuous("eps", 0.0, 8.0 / 255.0), categorical("mode", {"corner", "uniform"})};
        case TransformKind::rotate: return {continuous("angle", -15.0, 15.0)};
        case TransformKind::translate: return {continuous("dx", -0.1, 0.1), continuous("dy", -0.1, 0.1)};
        case TransformKind::scale: return {continuous("factor", 0.6, 1.4)};
        case TransformKind::shear: return {continuous("shear_x", -0.2, 0.2)};
        case TransformKind::blur: return {continuous("sigma", 0.0, 2.0)};
        case TransformKind::sharpen: return {continuous("alpha", 0.0, 2.0)};
        case TransformKind::flip: return {binary("flip")};
        case TransformKind::brightness:
        case TransformKind::contrast:
        case TransformKind::saturation: return {continuous("factor", 0.5, 1.5)};
        case TransformKind::hue: return {continuous("dh", -0.1, 0.1)};
        case TransformKind::grayscale: return {binary("apply")};
        case TransformKind::color_depth: return {integer("bits", 4.0, 8.0)};
        case TransformKind::adaptive_brightness: {
            std::vector<ParamDim> dims;
            for (int r = 0; r < options.grid_size; ++r) {
                for (int c = 0; c < options.grid_size; ++c) {
                    dims.push_back(continuous("f_" + std::to_string(r) + "_" + std::to_string(c), 0.5, 1.5));
                }
            }
            return dims;
        }
        case TransformKind::sticker:
            return {continuous("cx", 0.0, 1.0),  continuous("cy", 0.0, 1.0),   continuous("w", 0.05, 0.3),
                    continuous("h", 0.05, 0.3),  continuous("phi", -45.0, 45.0),
                    categorical("color", {"white", "black", "yellow"})};
    }
    return {};
}

std::vector<double> identity_point(const TransformSpec& spec) {
    switch (spec.kind) {
        case TransformKind::pixel_linf: return {0.0, 0.0};
        case TransformKind::translate: return {0.0, 0.0};
        case TransformKind::scale:
        case TransformKind::brightness:
        case TransformKind::contrast:
        case TransformKind::saturation: return {1.0};
        case TransformKind::color_depth: return {8.0};
        case TransformKind::adaptive_brightness:
            return std::vector<double>(static_cast<std::size_t>(spec.options.grid_size * spec.options.grid_size), 1.0);
        case TransformKind::sticker: return {0.5, 0.5, 0.0, 0.0, 0.0, 0.0};
        default: return {0.0};
    }
}

TransformSpec make_transform(TransformKind kind, TransformOptions options) {
    TransformSpec spec;
    spec.kind = kind;
    spec.options = options;
    spec.domain.dims = schema_for(kind, options);
    spec.domain.includes_identity = spec.domain.contains(identity_point(spec));
    return spec;
}

Rgb parse_color(std::string_view text) {
    if (text == "white") return {1.0, 1.0, 1.0};
    if (text == "black") return {0.0, 0.0, 0.0};
    if (text == "yellow") return {1.0, 1.0, 0.2};
    if (text.size() == 7 && text[0] == '#') {
        auto hex = [&](std::size_t at) {
            int value = 0;
            for (std::size_t i = at; i < at + 2; ++i) {
                const char ch = text[i];
                int digit = 0;
                if (ch >= '0' && ch <= '9') digit = ch - '0';
                else if (ch >= 'a' && ch <= 'f') digit = ch - 'a' + 10;
                else if (ch >= 'A' && ch <= 'F') digit = ch - 'A' + 10;
                else throw ConfigError("bad colour '" + std::string(text) + "'");
                value = value * 16 + digit;
            }
            return value / 255.0;
        };
        return {hex(1), hex(3), hex(5)};
    }
    throw ConfigError("unknown colour '" + std::string(text) + "'");
}

void check_schema(const TransformSpec& spec) {
    const std::string kind(to_string(spec.kind));
    if (spec.kind == TransformKind::adaptive_brightness && (spec.options.grid_size < 1 || spec.options.grid_size > 16)) {
        throw ConfigError(kind + ": grid_size must lie in [1, 16]");
    }
    const auto schema = schema_for(spec.kind, spec.options);
    if (schema.size() != spec.domain.dims.size()) {
        throw ConfigError(kind + ": expected " + std::to_string(schema.size()) + " dimensions, got " +
                          std::to_string(spec.domain.dims.size()));
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const ParamDim& want = schema[i];
        const ParamDim& got = spec.domain.dims[i];
        const std::string field = kind + ".domain." + want.name;
        if (got.name != want.name) throw ConfigError(kind + ": dimension " + std::to_string(i) + " must be '" + want.name + "'");
        if (got.kind != want.kind) {
            throw ConfigError(field + ": must be " + std::string(to_string(want.kind)));
        }
        if (!std::isfinite(got.low) || !std::isfinite(got.high)) throw ConfigError(field + ": bounds must be finite");
        if (got.low > got.high) throw ConfigError(field + ": low > high");
        switch (got.kind) {
            case DimKind::integer:
            case DimKind::binary:
                if (got.low != std::round(got.low) || got.high != std::round(got.high)) {
                    throw ConfigError(field + ": bounds must be integers");
                }
                if (got.kind == DimKind::binary && (got.low < 0.0 || got.high > 1.0)) {
                    throw ConfigError(field + ": binary bounds must lie in {0, 1}");
                }
                break;
            case DimKind::categorical:
                if (got.choices.empty()) throw ConfigError(field + ": needs at least one choice");
                for (const auto& choice : got.choices) {
                    if (spec.kind == TransformKind::sticker) {
                        parse_color(choice);
                    } else if (std::find(want.choices.begin(), want.choices.end(), choice) == want.choices.end()) {
                        throw ConfigError(field + ": unknown choice '" + choice + "'");
                    }
                }
                break;
            case DimKind::continuous:
                break;
        }
    }
    if (spec.domain.includes_identity && !spec.domain.contains(identity_point(spec))) {
        throw ConfigError(kind + ": includes_identity is set but the identity point lies outside the domain");
    }
}

Image apply(const TransformSpec& spec, const Image& img, std::span<const double> theta, RandomStream& stream) {
    if (!spec.domain.contains(theta)) {
        throw DomainError(std::string(to_string(spec.kind)) + ": parameter point outside the domain");
    }
    switch (spec.kind) {
        case TransformKind::gaussian_noise: return gaussian_noise(img, theta[0], stream);
        case TransformKind::uniform_noise: return uniform_noise(img, theta[0], stream);
        case TransformKind::impulse_noise: return impulse_noise(img, theta[0], stream);
        case TransformKind::pixel_l0:
            return pixel_l0_candidate(img, std::min<long>(as_long(theta[0]), static_cast<long>(img.pixel_count())),
                                      stream);
        case TransformKind::pixel_linf: {
            const auto& mode = spec.domain.dims[1].choices[static_cast<std::size_t>(as_long(theta[1]))];
            return pixel_linf_candidate(img, theta[0], stream, mode == "uniform" ? LinfMode::uniform : LinfMode::corner);
        }
        case TransformKind::rotate: return affine_warp(img, {.rotation_deg = theta[0]});
        case TransformKind::translate: return affine_warp(img, {.translate_x = theta[0], .translate_y = theta[1]});
        case TransformKind::scale: return affine_warp(img, {.scale = theta[0]});
        case TransformKind::shear: return affine_warp(img, {.shear_x = theta[0]});
        case TransformKind::blur: return blur(img, theta[0]);
        case TransformKind::sharpen: return sharpen(img, theta[0]);
        case TransformKind::flip: return as_long(theta[0]) ? flip_horizontal(img) : img;
        case TransformKind::brightness: return color_adjust(img, theta[0], 1.0, 1.0);
        case TransformKind::contrast: return color_adjust(img, 1.0, theta[0], 1.0);
        case TransformKind::saturation: return color_adjust(img, 1.0, 1.0, theta[0]);
        case TransformKind::hue: return hue_shift(img, theta[0]);
        case TransformKind::grayscale: return as_long(theta[0]) ? grayscale(img) : img;
        case TransformKind::color_depth: return color_depth(img, static_cast<int>(as_long(theta[0])));
        case TransformKind::adaptive_brightness: return adaptive_brightness(img, theta, spec.options.grid_size);
        case TransformKind::sticker: {
            const auto& color = spec.domain.dims[5].choices[static_cast<std::size_t>(as_long(theta[5]))];
            return sticker(img, {theta[0], theta[1], theta[2], theta[3], theta[4], parse_color(color)});
        }
    }
    throw DomainError("unknown transform kind");
}

}  // namespace rtk

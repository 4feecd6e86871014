#include "rtk/codec.hpp"

#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "rtk/error.hpp"

namespace rtk {

std::uint8_t quantize_channel(float v) noexcept {
    const double scaled = std::round(static_cast<double>(v) * 255.0);
    if (!(scaled > 0.0)) return 0;
    if (scaled >= 255.0) return 255;
    return static_cast<std::uint8_t>(scaled);
}

float dequantize_channel(std::uint8_t c) noexcept {
    return static_cast<float>(static_cast<double>(c) / 255.0);
}

Image quantize_8bit(const Image& img) {
    std::vector<float> out(img.size());
    auto in = img.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = dequantize_channel(quantize_channel(in[i]));
    return Image(img.width(), img.height(), std::move(out));
}

namespace {

// ---------------------------------------------------------------------------
// PPM (P6)

class PpmReader {
public:
    explicit PpmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void expect_magic() {
        if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '6') {
            throw DecodeError("PPM: missing P6 magic", 0);
        }
        pos_ = 2;
    }

    // Skips whitespace and '#' comments, then parses a decimal integer.
    long header_int(const char* field) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000) throw DecodeError(std::string("PPM: ") + field + " too large", start);
            ++pos_;
        }
        if (pos_ == start) throw DecodeError(std::string("PPM: expected ") + field, pos_);
        return value;
    }

    void single_whitespace() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw DecodeError("PPM: expected whitespace after maxval", pos_);
        }
        ++pos_;
    }

    std::size_t pos() const noexcept { return pos_; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

Image decode_ppm(std::span<const std::uint8_t> bytes) {
    PpmReader reader(bytes);
    reader.expect_magic();
    const long width = reader.header_int("width");
    const long height = reader.header_int("height");
    const std::size_t maxval_at = reader.pos();
    const long maxval = reader.header_int("maxval");
    if (width < 1 || height < 1) throw DecodeError("PPM: zero dimension", maxval_at);
    if (maxval != 255) {
        throw UnsupportedFormatError("PPM: only maxval 255 is supported, got " + std::to_string(maxval));
    }
    reader.single_whitespace();
    const std::size_t payload = reader.pos();
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
    if (bytes.size() - payload < count) {
        throw DecodeError("PPM: truncated payload, expected " + std::to_string(count) + " bytes, have " +
                              std::to_string(bytes.size() - payload),
                          bytes.size());
    }
    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) data[i] = dequantize_channel(bytes[payload + i]);
    return Image(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

std::vector<std::uint8_t> encode_ppm(const Image& img) {
    const std::string header =
        "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + img.size());
    for (float v : img.values()) out.push_back(quantize_channel(v));
    return out;
}

// ---------------------------------------------------------------------------
// PNG via libpng, reading from and writing to memory.

// libpng reports errors through longjmp; the setjmp frames below hold only
// trivially destructible locals.
struct PngIo {
    std::span<const std::uint8_t> input;
    std::size_t pos = 0;
    std::vector<std::uint8_t>* output = nullptr;
    std::string message;
};

void png_read_callback(png_structp png, png_bytep out, png_size_t length) {
    auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
    if (io->input.size() - io->pos < length) {
        io->pos = io->input.size();
        png_error(png, "unexpected end of data");
    }
    std::memcpy(out, io->input.data() + io->pos, length);
    io->pos += length;
}

void png_write_callback(png_structp png, png_bytep data, png_size_t length) {
    auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
    io->output->insert(io->output->end(), data, data + length);
}

void png_flush_callback(png_structp) {}

void png_error_callback(png_structp png, png_const_charp message) {
    auto* io = static_cast<PngIo*>(png_get_error_ptr(png));
    io->message = message ? message : "libpng error";
    png_longjmp(png, 1);
}

void png_warning_callback(png_structp, png_const_charp) {}

bool png_read_header(png_structp png, png_infop info) {
    if (setjmp(png_jmpbuf(png))) return false;
    png_read_info(png, info);
    return true;
}

bool png_read_body(png_structp png, png_infop info, png_bytepp rows) {
    if (setjmp(png_jmpbuf(png))) return false;
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    png_read_image(png, rows);
    png_read_end(png, nullptr);
    return true;
}

bool png_write_all(png_structp png, png_infop info, png_uint_32 width, png_uint_32 height, png_bytepp rows) {
    if (setjmp(png_jmpbuf(png))) return false;
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    png_write_image(png, rows);
    png_write_end(png, nullptr);
    return true;
}

class PngReadHandle {
public:
    explicit PngReadHandle(PngIo& io) {
        png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, &io, png_error_callback, png_warning_callback);
        if (png_) info_ = png_create_info_struct(png_);
        if (!png_ || !info_) {
            png_destroy_read_struct(&png_, &info_, nullptr);
            throw Error("PNG: libpng initialisation failed");
        }
        png_set_read_fn(png_, &io, png_read_callback);
    }
    ~PngReadHandle() { png_destroy_read_struct(&png_, &info_, nullptr); }
    PngReadHandle(const PngReadHandle&) = delete;
    PngReadHandle& operator=(const PngReadHandle&) = delete;

    png_structp png() const noexcept { return png_; }
    png_infop info() const noexcept { return info_; }

private:
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

class PngWriteHandle {
public:
    explicit PngWriteHandle(PngIo& io) {
        png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, &io, png_error_callback, png_warning_callback);
        if (png_) info_ = png_create_info_struct(png_);
        if (!png_ || !info_) {
            png_destroy_write_struct(&png_, &info_);
            throw Error("PNG: libpng initialisation failed");
        }
        png_set_write_fn(png_, &io, png_write_callback, png_flush_callback);
    }
    ~PngWriteHandle() { png_destroy_write_struct(&png_, &info_); }
    PngWriteHandle(const PngWriteHandle&) = delete;
    PngWriteHandle& operator=(const PngWriteHandle&) = delete;

    png_structp png() const noexcept { return png_; }
    png_infop info() const noexcept { return info_; }

private:
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

Image decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        throw DecodeError("PNG: bad signature", 0);
    }
    PngIo io;
    io.input = bytes;
    PngReadHandle handle(io);
    if (!png_read_header(handle.png(), handle.info())) throw DecodeError("PNG: " + io.message, io.pos);

    const auto width = png_get_image_width(handle.png(), handle.info());
    const auto height = png_get_image_height(handle.png(), handle.info());
    const int depth = png_get_bit_depth(handle.png(), handle.info());
    const int color = png_get_color_type(handle.png(), handle.info());
    if (depth != 8) {
        throw UnsupportedFormatError("PNG: only 8-bit channels are supported, got " + std::to_string(depth));
    }
    if (color != PNG_COLOR_TYPE_RGB && color != PNG_COLOR_TYPE_RGBA) {
        throw UnsupportedFormatError("PNG: only RGB/RGBA colour types are supported");
    }

    const std::size_t stride = static_cast<std::size_t>(width) * 3;
    std::vector<std::uint8_t> raw(stride * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + y * stride;
    if (!png_read_body(handle.png(), handle.info(), rows.data())) {
        throw DecodeError("PNG: " + io.message, io.pos);
    }

    std::vector<float> data(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) data[i] = dequantize_channel(raw[i]);
    return Image(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

std::vector<std::uint8_t> encode_png(const Image& img) {
    std::vector<std::uint8_t> raw(img.size());
    auto in = img.values();
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = quantize_channel(in[i]);
    const std::size_t stride = static_cast<std::size_t>(img.width()) * 3;
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
    for (std::size_t y = 0; y < rows.size(); ++y) rows[y] = raw.data() + y * stride;

    std::vector<std::uint8_t> out;
    PngIo io;
    io.output = &out;
    PngWriteHandle handle(io);
    if (!png_write_all(handle.png(), handle.info(), static_cast<png_uint_32>(img.width()),
                       static_cast<png_uint_32>(img.height()), rows.data())) {
        throw IoError("PNG encode: " + io.message);
    }
    return out;
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes, ImageFormat format) {
    return format == ImageFormat::png ? decode_png(bytes) : decode_ppm(bytes);
}

Image decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P') return decode_ppm(bytes);
    throw UnsupportedFormatError("unrecognised image format (expected PNG or P6 PPM)");
}

std::vector<std::uint8_t> encode_image(const Image& img, ImageFormat format) {
    return format == ImageFormat::png ? encode_png(img) : encode_ppm(img);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Image read_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return decode_image(bytes);
    } catch (const DecodeError& e) {
        throw DecodeError(path.string() + ": " + e.detail(), e.offset());
    }
}

void write_image(const Image& img, const std::filesystem::path& path) {
    const auto format = path.extension() == ".png" ? ImageFormat::png : ImageFormat::ppm;
    write_file(path, encode_image(img, format));
}

}  // namespace rtk

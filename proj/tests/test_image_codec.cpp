#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>

#include "rtk/codec.hpp"
#include "rtk/error.hpp"
#include "rtk/image.hpp"
#include "support.hpp"

namespace rtk {
namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

std::vector<std::uint8_t> ppm(const std::string& header, std::initializer_list<int> payload) {
    auto out = bytes_of(header);
    for (int v : payload) out.push_back(static_cast<std::uint8_t>(v));
    return out;
}

TEST(Image, ConstructorEnforcesRangeAndSize) {
    EXPECT_NO_THROW(Image(2, 1, std::vector<float>{0, 0, 0, 1, 1, 1}));
    EXPECT_THROW(Image(2, 1, std::vector<float>{0, 0, 0}), DomainError);
    EXPECT_THROW(Image(1, 1, std::vector<float>{0, 1.5f, 0}), DomainError);
    EXPECT_THROW(Image(1, 1, std::vector<float>{0, -0.01f, 0}), DomainError);
    EXPECT_THROW(Image(1, 1, std::vector<float>{std::numeric_limits<float>::quiet_NaN(), 0, 0}), DomainError);
    EXPECT_THROW(Image(0, 3, 0.0f), DomainError);
    EXPECT_THROW(Image(2, 2, 1.25f), DomainError);
}

TEST(Image, IndexingIsRowMajorInterleaved) {
    std::vector<float> data(2 * 2 * 3);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(i) / 16.0f;
    const Image img(2, 2, data);
    EXPECT_EQ(img.at(1, 0, 2), 5.0f / 16.0f);
    EXPECT_EQ(img.at(0, 1, 0), 6.0f / 16.0f);
    EXPECT_EQ(img.pixel_count(), 4u);
}

TEST(Image, ClipUnit) {
    EXPECT_EQ(clip_unit(-3.0), 0.0f);
    EXPECT_EQ(clip_unit(7.0), 1.0f);
    EXPECT_EQ(clip_unit(0.25), 0.25f);
    EXPECT_EQ(clip_unit(std::nan("")), 0.0f);
    const Image img = clipped_image(1, 1, {-1.0, 0.5, 2.0});
    EXPECT_EQ(img.values()[0], 0.0f);
    EXPECT_EQ(img.values()[2], 1.0f);
}

TEST(Ppm, DecodesPureRed) {
    const Image img = decode_image(ppm("P6\n1 1\n255\n", {255, 0, 0}), ImageFormat::ppm);
    EXPECT_EQ(img, Image(1, 1, std::vector<float>{1.0f, 0.0f, 0.0f}));
}

TEST(Ppm, DecodesMidGrayAsCOver255) {
    const Image img = decode_image(ppm("P6 2 1 255\n", {0, 0, 0, 128, 128, 128}), ImageFormat::ppm);
    const float g = static_cast<float>(128.0 / 255.0);
    EXPECT_EQ(img, Image(2, 1, std::vector<float>{0, 0, 0, g, g, g}));
}

TEST(Ppm, AcceptsHeaderComments) {
    const Image img = decode_image(ppm("P6\n# made by hand\n1 # width done\n1\n255\n", {0, 255, 0}));
    EXPECT_EQ(img.at(0, 0, 1), 1.0f);
}

TEST(Ppm, TruncatedPayloadIsDecodeErrorWithOffset) {
    try {
        decode_image(ppm("P6\n2 1\n255\n", {1, 2, 3, 4}), ImageFormat::ppm);
        FAIL() << "expected DecodeError";
    } catch (const DecodeError& e) {
        EXPECT_EQ(e.offset(), 11u + 4u);
        EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
    }
}

TEST(Ppm, MalformedHeaderNamesOffset) {
    try {
        decode_image(bytes_of("P6\n1 x\n255\n"), ImageFormat::ppm);
        FAIL() << "expected DecodeError";
    } catch (const DecodeError& e) {
        EXPECT_EQ(e.offset(), 5u);
    }
    EXPECT_THROW(decode_image(bytes_of("P3\n1 1\n255\n0 0 0"), ImageFormat::ppm), DecodeError);
}

TEST(Ppm, SixteenBitIsUnsupported) {
    EXPECT_THROW(decode_image(ppm("P6\n1 1\n65535\n", {0, 0, 0, 0, 0, 0}), ImageFormat::ppm),
                 UnsupportedFormatError);
}

TEST(Ppm, EncodesWhiteAndHalf) {
    const auto white = encode_image(Image(1, 1, 1.0f), ImageFormat::ppm);
    EXPECT_EQ(white, ppm("P6\n1 1\n255\n", {255, 255, 255}));
    const auto half = encode_image(Image(1, 1, 0.5f), ImageFormat::ppm);
    EXPECT_EQ(half, ppm("P6\n1 1\n255\n", {128, 128, 128}));
}

TEST(Codec, QuantizedImagesRoundTripExactly) {
    testing::Gen gen(11);
    for (int i = 0; i < 50; ++i) {
        const Image img = gen.image_8bit(gen.integer(1, 9), gen.integer(1, 9));
        for (auto fmt : {ImageFormat::ppm, ImageFormat::png}) {
            EXPECT_EQ(decode_image(encode_image(img, fmt), fmt), img);
        }
    }
}

TEST(Codec, RoundTripEqualsQuantization) {
    testing::Gen gen(12);
    for (int i = 0; i < 50; ++i) {
        const Image img = gen.image();
        const Image q = quantize_8bit(img);
        EXPECT_EQ(decode_image(encode_image(img, ImageFormat::png)), q);
        EXPECT_EQ(decode_image(encode_image(img, ImageFormat::ppm)), q);
        for (std::size_t k = 0; k < img.size(); ++k) {
            EXPECT_EQ(q.values()[k], static_cast<float>(std::lround(img.values()[k] * 255.0) / 255.0));
        }
    }
}

TEST(Codec, QuantizeChannelRoundsAndClamps) {
    EXPECT_EQ(quantize_channel(0.5f), 128);
    EXPECT_EQ(quantize_channel(1.0f), 255);
    EXPECT_EQ(quantize_channel(0.0f), 0);
    EXPECT_EQ(quantize_channel(1.0f / 510.0f), 1);
    EXPECT_EQ(dequantize_channel(255), 1.0f);
}

TEST(Png, DropsAlpha) {
    const Image img = read_image(std::string(RTK_TEST_DATA) + "/rgba_2x1.png");
    const float mid = static_cast<float>(128.0 / 255.0);
    EXPECT_EQ(img, Image(2, 1, std::vector<float>{1, 0, 0, 0, mid, 1}));
}

TEST(Png, RejectsSixteenBitAndGray) {
    EXPECT_THROW(read_image(std::string(RTK_TEST_DATA) + "/rgb16.png"), UnsupportedFormatError);
    EXPECT_THROW(read_image(std::string(RTK_TEST_DATA) + "/gray8.png"), UnsupportedFormatError);
}

TEST(Png, CorruptDataIsDecodeError) {
    auto bytes = encode_image(Image(4, 4, 0.3f), ImageFormat::png);
    EXPECT_THROW(decode_image(std::span(bytes.data(), bytes.size() / 2)), DecodeError);
    bytes[20] ^= 0xFF;  // corrupt IHDR
    EXPECT_THROW(decode_image(bytes), DecodeError);
}

TEST(Codec, UnknownMagicIsUnsupported) {
    EXPECT_THROW(decode_image(bytes_of("GIF89a....")), UnsupportedFormatError);
}

TEST(Codec, FileRoundTripPicksFormatFromExtension) {
    testing::TempDir dir;
    const Image img = testing::Gen(3).image_8bit(5, 3);
    write_image(img, dir / "a.png");
    write_image(img, dir / "a.ppm");
    EXPECT_EQ(read_file(dir / "a.png")[1], 'P');
    EXPECT_EQ(read_file(dir / "a.ppm")[0], 'P');
    EXPECT_EQ(read_image(dir / "a.png"), img);
    EXPECT_EQ(read_image(dir / "a.ppm"), img);
}

TEST(Codec, MissingFileIsIoError) {
    EXPECT_THROW(read_file("/nonexistent/dir/x.ppm"), IoError);
}

}  // namespace
}  // namespace rtk

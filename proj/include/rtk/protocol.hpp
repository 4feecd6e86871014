#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

#include "rtk/classifier.hpp"

namespace rtk {

// Wire protocol shared by the stdio and HTTP transports. One JSON object per
// line (UTF-8, LF terminated):
//
//   request:  {"id":<u64>,"images":[{"h":H,"w":W,"data":"<base64>"}]}
//   response: {"id":<u64>,"predictions":[{"label":L,"scores":[...]}]}
//   failure:  {"id":<u64>,"error":"<message>"}
//
// `data` is base64 of H*W*3 little-endian float32 values, row-major RGB.

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ProtocolError on invalid input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Little-endian float32 bytes of the image values.
std::vector<std::uint8_t> image_tensor_bytes(const Image& img);

/// Request line without the trailing LF.
std::string encode_request(std::uint64_t id, std::span<const Image> images);

struct DecodedRequest {
    std::uint64_t id = 0;
    std::vector<Image> images;
};
DecodedRequest decode_request(std::string_view line);

std::string encode_response(std::uint64_t id, std::span<const Prediction> predictions);

/// Validates id echo, batch length, finiteness and label/score consistency.
/// Throws ProtocolError quoting an excerpt of the payload.
std::vector<Prediction> decode_response(std::string_view line, std::uint64_t expected_id,
                                        std::size_t expected_count);

/// external_stdio: one child process, requests serialized over its pipes.
class StdioClassifier final : public Classifier {
public:
    StdioClassifier(std::vector<std::string> argv, int num_classes, std::chrono::milliseconds timeout);
    ~StdioClassifier() override;
    StdioClassifier(const StdioClassifier&) = delete;
    StdioClassifier& operator=(const StdioClassifier&) = delete;

    std::vector<Prediction> predict_batch(std::span<const Image> images) override;
    int num_classes() const override { return num_classes_; }

private:
    std::string read_line();
    void write_all(std::string_view data);

    int num_classes_;
    std::chrono::milliseconds timeout_;
    pid_t child_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::uint64_t next_id_ = 1;
};

/// external_http: POST <url>/predict with the same JSON bodies.
class HttpClassifier final : public Classifier {
public:
    HttpClassifier(std::string url, int num_classes, std::chrono::milliseconds timeout);
    std::vector<Prediction> predict_batch(std::span<const Image> images) override;
    int num_classes() const override { return num_classes_; }

private:
    std::string url_;
    int num_classes_;
    std::chrono::milliseconds timeout_;
    std::uint64_t next_id_ = 1;
};

}  // namespace rtk

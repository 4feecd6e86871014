#include "rtk/protocol.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <mutex>

#include <httplib.h>
#include <json.hpp>

#include "rtk/error.hpp"

namespace rtk {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// base64 (RFC 4648, padded)

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr std::array<int, 256> kReverse = [] {
    std::array<int, 256> table{};
    table.fill(-1);
    for (int i = 0; i < 64; ++i) table[static_cast<unsigned char>(kAlphabet[i])] = i;
    return table;
}();

std::string excerpt(std::string_view payload) {
    constexpr std::size_t kMax = 120;
    if (payload.size() <= kMax) return std::string(payload);
    return std::string(payload.substr(0, kMax)) + "...";
}

[[noreturn]] void protocol_failure(const std::string& what, std::string_view payload) {
    throw ProtocolError(what + " in payload: " + excerpt(payload));
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kAlphabet[(n >> 18) & 63];
        out += kAlphabet[(n >> 12) & 63];
        out += kAlphabet[(n >> 6) & 63];
        out += kAlphabet[n & 63];
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t n = bytes[i] << 16;
        out += kAlphabet[(n >> 18) & 63];
        out += kAlphabet[(n >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out += kAlphabet[(n >> 18) & 63];
        out += kAlphabet[(n >> 12) & 63];
        out += kAlphabet[(n >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw ProtocolError("base64 length is not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        std::uint32_t n = 0;
        int padding = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            const char ch = text[i + k];
            int v = 0;
            if (ch == '=' && i + 4 == text.size() && k >= 2) {
                ++padding;
            } else {
                if (padding) throw ProtocolError("base64 data after padding");
                v = kReverse[static_cast<unsigned char>(ch)];
                if (v < 0) throw ProtocolError("invalid base64 character at " + std::to_string(i + k));
            }
            n = (n << 6) | static_cast<std::uint32_t>(v);
        }
        out.push_back(static_cast<std::uint8_t>(n >> 16));
        if (padding < 2) out.push_back(static_cast<std::uint8_t>(n >> 8));
        if (padding < 1) out.push_back(static_cast<std::uint8_t>(n));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Messages

std::vector<std::uint8_t> image_tensor_bytes(const Image& img) {
    std::vector<std::uint8_t> out(img.size() * 4);
    std::size_t k = 0;
    for (float v : img.values()) {
        auto bits = std::bit_cast<std::uint32_t>(v);
        for (int b = 0; b < 4; ++b) {
            out[k++] = static_cast<std::uint8_t>(bits & 0xFF);
            bits >>= 8;
        }
    }
    return out;
}

std::string encode_request(std::uint64_t id, std::span<const Image> images) {
    ordered_json request;
    request["id"] = id;
    request["images"] = ordered_json::array();
    for (const auto& img : images) {
        ordered_json entry;
        entry["h"] = img.height();
        entry["w"] = img.width();
        entry["data"] = base64_encode(image_tensor_bytes(img));
        request["images"].push_back(std::move(entry));
    }
    return request.dump();
}

DecodedRequest decode_request(std::string_view line) {
    DecodedRequest out;
    nlohmann::json request;
    try {
        request = nlohmann::json::parse(line);
        out.id = request.at("id").get<std::uint64_t>();
        for (const auto& entry : request.at("images")) {
            const int h = entry.at("h").get<int>();
            const int w = entry.at("w").get<int>();
            const auto bytes = base64_decode(entry.at("data").get<std::string>());
            if (h < 1 || w < 1 || bytes.size() != static_cast<std::size_t>(h) * w * 3 * 4) {
                protocol_failure("image data length does not match h*w*3 floats", line);
            }
            std::vector<float> values(bytes.size() / 4);
            for (std::size_t i = 0; i < values.size(); ++i) {
                std::uint32_t bits = 0;
                for (int b = 3; b >= 0; --b) bits = (bits << 8) | bytes[i * 4 + static_cast<std::size_t>(b)];
                values[i] = std::bit_cast<float>(bits);
            }
            out.images.emplace_back(w, h, std::move(values));
        }
    } catch (const nlohmann::json::exception& e) {
        protocol_failure(std::string("malformed request (") + e.what() + ")", line);
    } catch (const DomainError& e) {
        protocol_failure(std::string("invalid image (") + e.what() + ")", line);
    }
    return out;
}

std::string encode_response(std::uint64_t id, std::span<const Prediction> predictions) {
    ordered_json response;
    response["id"] = id;
    response["predictions"] = ordered_json::array();
    for (const auto& p : predictions) {
        ordered_json entry;
        entry["label"] = p.label;
        entry["scores"] = p.scores;
        response["predictions"].push_back(std::move(entry));
    }
    return response.dump();
}

std::vector<Prediction> decode_response(std::string_view line, std::uint64_t expected_id,
                                        std::size_t expected_count) {
    nlohmann::json response;
    try {
        response = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
        protocol_failure("response is not valid JSON", line);
    }
    if (!response.is_object() || !response.contains("id") || !response["id"].is_number_unsigned()) {
        protocol_failure("response lacks an unsigned id", line);
    }
    const auto id = response["id"].get<std::uint64_t>();
    if (id != expected_id) {
        protocol_failure("response id " + std::to_string(id) + " does not echo request id " +
                             std::to_string(expected_id),
                         line);
    }
    if (response.contains("error")) {
        protocol_failure("classifier reported error '" + response["error"].dump() + "'", line);
    }
    if (!response.contains("predictions") || !response["predictions"].is_array()) {
        protocol_failure("response lacks a predictions array", line);
    }
    const auto& items = response["predictions"];
    if (items.size() != expected_count) {
        protocol_failure("expected " + std::to_string(expected_count) + " predictions, got " +
                             std::to_string(items.size()),
                         line);
    }
    std::vector<Prediction> out;
    out.reserve(items.size());
    for (const auto& item : items) {
        if (!item.is_object() || !item.contains("label") || !item["label"].is_number_integer() ||
            !item.contains("scores") || !item["scores"].is_array() || item["scores"].empty()) {
            protocol_failure("prediction lacks label or scores", line);
        }
        Prediction p;
        p.label = item["label"].get<int>();
        for (const auto& s : item["scores"]) {
            if (!s.is_number()) protocol_failure("non-numeric score", line);
            const double v = s.get<double>();
            if (!std::isfinite(v)) protocol_failure("non-finite score", line);
            p.scores.push_back(v);
        }
        if (argmax_lowest(p.scores) != p.label) {
            protocol_failure("label " + std::to_string(p.label) + " is not the argmax of its scores", line);
        }
        out.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// stdio transport

namespace {

std::vector<Prediction> check_width(std::vector<Prediction> predictions, int num_classes, std::string_view line) {
    for (const auto& p : predictions) {
        if (p.scores.size() != static_cast<std::size_t>(num_classes)) {
            throw ProtocolError("expected " + std::to_string(num_classes) + " scores per prediction, got " +
                                std::to_string(p.scores.size()) + "; payload: " + excerpt(line));
        }
    }
    return predictions;
}

void ignore_sigpipe() {
    static std::once_flag once;
    std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

}  // namespace

StdioClassifier::StdioClassifier(std::vector<std::string> argv, int num_classes, std::chrono::milliseconds timeout)
    : num_classes_(num_classes), timeout_(timeout) {
    if (argv.empty()) throw ConfigError("external_stdio endpoint needs a command");
    ignore_sigpipe();

    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw TransportError("pipe failed: " + std::string(std::strerror(errno)));
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw TransportError("pipe failed: " + std::string(std::strerror(errno)));
    }

    std::vector<char*> args;
    for (auto& a : argv) args.push_back(a.data());
    args.push_back(nullptr);

    child_ = ::fork();
    if (child_ < 0) throw TransportError("fork failed: " + std::string(std::strerror(errno)));
    if (child_ == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::execvp(args[0], args.data());
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
}

StdioClassifier::~StdioClassifier() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (child_ > 0) {
        // Closing stdin asks the adapter to exit; give it a moment, then kill.
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(child_, nullptr, WNOHANG) == child_) return;
            ::usleep(10000);
        }
        ::kill(child_, SIGKILL);
        ::waitpid(child_, nullptr, 0);
    }
}

void StdioClassifier::write_all(std::string_view data) {
    while (!data.empty()) {
        const ssize_t n = ::write(to_child_, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError("writing to classifier process failed: " + std::string(std::strerror(errno)));
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

std::string StdioClassifier::read_line() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        const auto newline = buffer_.find('\n');
        if (newline != std::string::npos) {
            std::string line = buffer_.substr(0, newline);
            buffer_.erase(0, newline + 1);
            return line;
        }
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) throw TransportError("classifier process timed out");
        pollfd fd{from_child_, POLLIN, 0};
        const int ready = ::poll(&fd, 1, static_cast<int>(remaining.count()));
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw TransportError("poll failed: " + std::string(std::strerror(errno)));
        }
        if (ready == 0) throw TransportError("classifier process timed out");
        char chunk[65536];
        const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError("reading from classifier process failed: " + std::string(std::strerror(errno)));
        }
        if (n == 0) throw TransportError("classifier process closed its output");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::vector<Prediction> StdioClassifier::predict_batch(std::span<const Image> images) {
    if (images.empty()) return {};
    const std::uint64_t id = next_id_++;
    write_all(encode_request(id, images) + "\n");
    const std::string line = read_line();
    return check_width(decode_response(line, id, images.size()), num_classes_, line);
}

// ---------------------------------------------------------------------------
// HTTP transport

HttpClassifier::HttpClassifier(std::string url, int num_classes, std::chrono::milliseconds timeout)
    : url_(std::move(url)), num_classes_(num_classes), timeout_(timeout) {
    if (url_.empty()) throw ConfigError("external_http endpoint needs a url");
    while (!url_.empty() && url_.back() == '/') url_.pop_back();
}

std::vector<Prediction> HttpClassifier::predict_batch(std::span<const Image> images) {
    if (images.empty()) return {};
    const std::uint64_t id = next_id_++;
    httplib::Client client(url_);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    auto result = client.Post("/predict", encode_request(id, images), "application/json");
    if (!result) {
        throw TransportError("HTTP request to " + url_ + "/predict failed: " + httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw ProtocolError("HTTP status " + std::to_string(result->status) + " from " + url_ +
                            "/predict: " + excerpt(result->body));
    }
    std::string_view body = result->body;
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.remove_suffix(1);
    return check_width(decode_response(body, id, images.size()), num_classes_, body);
}

}  // namespace rtk

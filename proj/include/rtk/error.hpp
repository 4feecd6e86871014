#pragma once

#include <stdexcept>
#include <string>

namespace rtk {

// Base for every error the harness raises. Subclasses map onto the CLI exit
// codes: configuration/input problems exit 2, transport problems exit 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DecodeError : public Error {
public:
    DecodeError(const std::string& detail, std::size_t offset)
        : Error(detail + " (at byte offset " + std::to_string(offset) + ")"),
          detail_(detail),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t offset_;
};

class UnsupportedFormatError : public Error {
public:
    using Error::Error;
};

/// A parameter lies outside the domain an operation accepts.
class DomainError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Manifest or GTSRB ingestion failure.
class LoadError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ReportError : public Error {
public:
    using Error::Error;
};

/// External classifier unreachable, timed out or died.
class TransportError : public Error {
public:
    using Error::Error;
};

/// External classifier answered with something that violates the wire protocol.
class ProtocolError : public Error {
public:
    using Error::Error;
};

}  // namespace rtk

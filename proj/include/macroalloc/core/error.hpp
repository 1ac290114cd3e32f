#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace macroalloc {

/// Root of the project's exception hierarchy. Each subclass maps to one CLI exit code family.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input row. `line` is 1-based; 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
    explicit ParseError(const std::string& what) : Error(what) {}
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_ = 0;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

/// No calendar predecessor exists for the queried date.
class BoundaryError : public Error {
public:
    using Error::Error;
};

/// Price bar missing for a (ticker, date) pair.
class DataGapError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// No JSON value could be recovered from model output.
class ExtractionError : public Error {
public:
    ExtractionError(const std::string& what, std::string raw)
        : Error(what), raw_(std::move(raw)) {}
    [[nodiscard]] const std::string& raw_text() const { return raw_; }

private:
    std::string raw_;
};

class GatewayError : public Error {
public:
    using Error::Error;
};

class TransportError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

/// Replay mode found no recording for a request hash.
class CassetteMissError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class EmptyResponseError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class ReflectionFailure : public Error {
public:
    using Error::Error;
};

class UndefinedSharpeError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace macroalloc

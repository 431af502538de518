#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pegscope {

enum class ErrorKind {
    domain,
    parse,
    integrity,
    not_found,
    extraction,
    config,
    transport,
    context,
    analysis,
    io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base for every error raised by the library. The CLI maps all of these to
/// exit code 2 (data error).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& message) : Error(ErrorKind::domain, message) {}
};

/// Malformed input. `line` is 1-based for line-oriented files and the
/// 0-based record index for JSON arrays; 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line = 0)
        : Error(ErrorKind::parse, message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& message) : Error(ErrorKind::integrity, message) {}
};

class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& message) : Error(ErrorKind::not_found, message) {}
};

class ExtractionError : public Error {
public:
    ExtractionError(const std::string& message, std::string field)
        : Error(ErrorKind::extraction, message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error(ErrorKind::config, message) {}
};

class TransportError : public Error {
public:
    explicit TransportError(const std::string& message) : Error(ErrorKind::transport, message) {}
};

class ContextError : public Error {
public:
    explicit ContextError(const std::string& message) : Error(ErrorKind::context, message) {}
};

class AnalysisError : public Error {
public:
    explicit AnalysisError(const std::string& message) : Error(ErrorKind::analysis, message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(ErrorKind::io, message) {}
};

}  // namespace pegscope

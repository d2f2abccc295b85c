#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lta {

/// Base class for all recoverable toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed file content. Carries a 1-based line number when known (0 = unknown).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class InvalidCodeError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

/// Raised when clone/substitute is invoked for a code the other strategy owns.
class WrongStrategyError : public Error {
public:
    using Error::Error;
};

/// No donor code could be found in any fallback tier for a zero-shot anchor.
class NoDonorError : public Error {
public:
    using Error::Error;
};

class TemplateError : public Error {
public:
    using Error::Error;
};

/// A stage artifact carries an unknown or missing schema version.
class SchemaError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Backend transport problem. Transient failures are eligible for retry.
class TransportError : public Error {
public:
    TransportError(const std::string& what, bool transient)
        : Error(what), transient_(transient) {}
    bool transient() const noexcept { return transient_; }

private:
    bool transient_;
};

/// A prompt exhausted its transport retries or hard-failed at the backend.
class GenerationFailedError : public Error {
public:
    GenerationFailedError(const std::string& what, std::string anchor, int attempts)
        : Error(what), anchor_(std::move(anchor)), attempts_(attempts) {}
    const std::string& anchor() const noexcept { return anchor_; }
    int attempts() const noexcept { return attempts_; }

private:
    std::string anchor_;
    int attempts_;
};

}  // namespace lta

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prism {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ArgumentError : public Error {
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

/// Raised when a dataset record cannot be read at all; the message names the line.
class DatasetError : public Error {
public:
    using Error::Error;
};

/// Rendered prompt exceeded the configured character budget.
class BudgetError : public Error {
public:
    BudgetError(const std::string& what, std::size_t overflow_chars)
        : Error(what), overflow_chars_(overflow_chars) {}
    std::size_t overflow_chars() const { return overflow_chars_; }

private:
    std::size_t overflow_chars_;
};

/// Model output has no extractable structured payload. Retryable.
class ParseFailure : public Error {
public:
    using Error::Error;
};

/// Model output was extractable but violates its schema contract. Not retryable.
class ContractViolation : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

class RateLimitError : public Error {
public:
    using Error::Error;
};

class AuthError : public Error {
public:
    using Error::Error;
};

class BadRequestError : public Error {
public:
    using Error::Error;
};

/// All retry attempts failed; carries the last underlying cause in the message.
class ProviderExhausted : public Error {
public:
    using Error::Error;
};

/// Every agent in a graph stage failed.
class EmptyStageError : public Error {
public:
    EmptyStageError(const std::string& what, int stage) : Error(what), stage_(stage) {}
    int stage() const { return stage_; }

private:
    int stage_;
};

}  // namespace prism

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wattsentry {

// Input file / stream could not be parsed. Carries source name and 1-based
// line number so operators can fix the offending record.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
          source_(std::move(source)),
          line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_ = 0;
};

// Invalid run configuration: bad flag combination, missing profile band,
// unsupported source kind, and similar operator errors.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Baseline extrema unusable for normalization (max <= min).
class InvalidBaselineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Not enough data to complete a calculation (learning needs >= 3 slots,
// window averages need >= 1 slot).
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Event or sample stream violated ordering guarantees mid-run.
class MalformedStreamError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Persistence failure in the record store.
class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wattsentry

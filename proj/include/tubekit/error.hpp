#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tubekit {

// Base class for everything the toolkit throws on purpose. The CLI maps
// these to the data/validation exit code; anything else is internal.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A value handed to an in-memory operation violates its contract
// (degenerate box, threshold out of range, dimension mismatch, ...).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

// Malformed on-disk artifact. line() is 1-based; 0 means the failure is
// not line-oriented (binary header, truncated payload).
class ParseError : public Error {
public:
    ParseError(std::string file, std::size_t line, const std::string& reason)
        : Error(line > 0 ? file + ":" + std::to_string(line) + ": " + reason
                         : file + ": " + reason),
          file_(std::move(file)),
          line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

// A frame with no candidate regions makes path extraction impossible.
class NoFeasiblePathError : public Error {
public:
    using Error::Error;
};

}  // namespace tubekit

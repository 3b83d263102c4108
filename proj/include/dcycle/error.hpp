#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dcycle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based and counts the header.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Input that parses but violates a domain invariant (negative speed,
/// non-monotone timestamps, out-of-range coordinates).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Segment or point set with no usable structure (all idle, all identical).
class DegenerateError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class ZeroVarianceError : public Error {
public:
    explicit ZeroVarianceError(std::string feature)
        : Error("zero variance in feature '" + feature + "'"), feature_(std::move(feature)) {}

    const std::string& feature() const noexcept { return feature_; }

private:
    std::string feature_;
};

/// Iterative numeric routine failed to converge.
class NumericError : public Error {
public:
    using Error::Error;
};

class SelectionError : public Error {
public:
    using Error::Error;
};

class SynthesisError : public Error {
public:
    using Error::Error;
};

/// The corpus cannot fill the requested cycle duration.
class ShortfallError : public SynthesisError {
public:
    ShortfallError(std::size_t achieved, double target_min)
        : SynthesisError("cycle duration shortfall: achieved " + std::to_string(achieved) +
                         " s, need at least " + std::to_string(target_min) + " s"),
          achieved_(achieved) {}

    std::size_t achieved() const noexcept { return achieved_; }

private:
    std::size_t achieved_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace dcycle

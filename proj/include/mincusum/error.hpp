#pragma once

#include <stdexcept>
#include <string>

namespace mincusum {

// Precondition violations (bad parameters, malformed scenarios) surface as
// std::invalid_argument; evaluation outside a support or domain as
// std::domain_error. The types below cover the remaining distinguished cases.

/// The positive root of a cumulant generating function could not be bracketed.
class RootNotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A brute-force computation would exceed its size guard.
class SizeGuardExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Invalid experiment configuration; `field()` names the offending entry.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace mincusum

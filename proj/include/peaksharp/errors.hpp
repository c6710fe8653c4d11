#pragma once

#include <stdexcept>
#include <string>

namespace peaksharp {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid parameters, malformed configuration, out-of-domain arguments. CLI exit code 2.
class config_error : public error {
public:
    explicit config_error(const std::string& msg) : error(msg) {}
};

/// Structurally bad or missing data: dimension mismatches, empty inputs,
/// degenerate spectra, selection shortfalls. CLI exit code 3.
class data_error : public error {
public:
    explicit data_error(const std::string& msg) : error(msg) {}
};

/// Numerical failures: iteration limits, singular or rank-deficient systems. CLI exit code 4.
class numerical_error : public error {
public:
    explicit numerical_error(const std::string& msg) : error(msg) {}
};

} // namespace peaksharp

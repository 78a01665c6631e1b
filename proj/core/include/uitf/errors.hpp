#pragma once

#include <stdexcept>
#include <string>

namespace uitf {

/// Invalid configuration value (odd axis_dim, base <= 1, bad focus bounds, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside its documented domain (index out of range, s < 1, empty input).
class ArgumentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector/tensor shapes that do not line up.
class DimensionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite data or an undefined numeric result.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Problem size exceeds a configured cap (dense-oracle cap, bench budget).
class SizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed on-disk data (bad magic, version, dtype, truncation, bad JSON).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem-level failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace uitf

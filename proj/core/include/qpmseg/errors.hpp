#pragma once

#include <stdexcept>
#include <string>

namespace qpmseg {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration value or unparseable config file. CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An image file could not be read or failed validation.
class LoadError : public Error {
public:
    using Error::Error;
};

/// All background estimates are exactly zero, so t = 2|c_b| is unusable.
/// Callers must supply a fallback threshold to proceed. CLI exit code 3.
class DegenerateThresholdError : public Error {
public:
    using Error::Error;
};

/// A measurement with zero images was handed to a stage that needs at least one.
class EmptyMeasurementError : public Error {
public:
    using Error::Error;
};

/// No loadable image was found in the input directory. CLI exit code 4.
class NoImagesError : public Error {
public:
    using Error::Error;
};

} // namespace qpmseg

#pragma once

#include <stdexcept>
#include <string>

namespace maxgen {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape/size preconditions (zero dimension, length mismatch).
struct DimensionError : Error {
    using Error::Error;
};

// Malformed or truncated file contents.
struct FormatError : Error {
    using Error::Error;
};

// File parsed but violates an invariant (e.g. duplicate tokens).
struct IntegrityError : Error {
    using Error::Error;
};

// Bad run configuration (missing files, inconsistent knobs).
struct ConfigError : Error {
    using Error::Error;
};

// Network/HTTP failure talking to a remote endpoint.
struct TransportError : Error {
    TransportError(const std::string& msg, double retry_after_s = 0.0)
        : Error(msg), retry_after_s(retry_after_s) {}
    double retry_after_s;
};

// Operation refused because a safety gate was not explicitly opened.
struct SafetyError : Error {
    using Error::Error;
};

// A condition the code guarantees cannot happen did happen.
struct InternalError : Error {
    using Error::Error;
};

} // namespace maxgen

#pragma once

#include <stdexcept>
#include <string>

namespace rkmix {

// File/format problems raised by grid and population I/O.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingHeader : IoError {
    explicit MissingHeader(const std::string& what) : IoError(what) {}
};

struct ShapeMismatch : IoError {
    explicit ShapeMismatch(const std::string& what) : IoError(what) {}
};

struct InvalidQuantity : IoError {
    explicit InvalidQuantity(const std::string& what) : IoError(what) {}
};

// Estimation failures.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientData : FitError {
    explicit InsufficientData(const std::string& what) : FitError(what) {}
};

struct NonFiniteLikelihood : FitError {
    explicit NonFiniteLikelihood(const std::string& what) : FitError(what) {}
};

}  // namespace rkmix

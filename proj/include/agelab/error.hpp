#pragma once

#include <stdexcept>
#include <string>

namespace agelab {

// Base for every error the toolkit raises on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/layer dimension mismatches.
struct ShapeError : Error {
    using Error::Error;
};

// Unreadable or malformed files (images, checkpoints, CSVs).
struct FormatError : Error {
    using Error::Error;
};

// Bad run configuration: unknown keys, out-of-range settings, conflicting inputs.
struct ConfigError : Error {
    using Error::Error;
};

// Operation called in the wrong order (e.g. backward before forward).
struct StateError : Error {
    using Error::Error;
};

// Value outside its domain (ages, rates).
struct RangeError : Error {
    using Error::Error;
};

// A requested split or architecture cannot be satisfied by the data at hand.
struct SizingError : Error {
    using Error::Error;
};

// Statistics undefined on the given data (e.g. zero variance).
struct DegenerateDataError : Error {
    using Error::Error;
};

} // namespace agelab

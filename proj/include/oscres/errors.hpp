#pragma once

#include <stdexcept>
#include <string>

namespace oscres {

// Base class for all library errors. The CLI maps these to exit codes:
// ConfigError -> 2, DataError -> 3, anything else -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inconsistent or invalid configuration values.
struct ConfigError : Error {
    using Error::Error;
};

// Vector/matrix size mismatches and wrong image shapes.
struct DimensionError : Error {
    using Error::Error;
};

// Dataset problems: bad IDX magic, count mismatches, truncated or
// unwritable files.
struct DataError : Error {
    using Error::Error;
};

// Invalid network construction requests (ring sizes, Watts-Strogatz degree).
struct TopologyError : Error {
    using Error::Error;
};

// Non-finite or malformed drive passed to the simulation boundary.
struct InputError : Error {
    using Error::Error;
};

// Sliding-window embedding cannot satisfy the requested frame count.
struct EmbeddingError : Error {
    using Error::Error;
};

// Readout training/evaluation failures, including divergence.
struct TrainingError : Error {
    using Error::Error;
};

}  // namespace oscres

#pragma once

#include <stdexcept>

namespace sncnet {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension, coordinate or size mismatch between operands.
struct ShapeError : Error {
  using Error::Error;
};

// File could not be opened, created or written.
struct IoError : Error {
  using Error::Error;
};

// Unrecognised magic bytes or unsupported format version.
struct FormatError : Error {
  using Error::Error;
};

// Stream ended before the declared payload was fully read.
struct TruncationError : Error {
  using Error::Error;
};

// Payload parsed but the values are unusable (NaN/Inf, singular matrix,
// out-of-range configuration and the like).
struct DataError : Error {
  using Error::Error;
};

} // namespace sncnet

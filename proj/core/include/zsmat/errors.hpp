#pragma once

#include <stdexcept>
#include <string>

namespace zsmat {

/// Malformed input: bad file records, out-of-range values, duplicate ids.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run configuration that violates a constraint; the message names the keys.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Score list that cannot be split into two clusters.
class DegenerateDistribution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands with different raster dimensions.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Violation of the segmenter protocol (frame order, unknown sequence, bad message).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unrecoverable segmenter failure; the current sequence is abandoned.
class TrackingAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace zsmat

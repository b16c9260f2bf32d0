#pragma once

#include <stdexcept>
#include <string>

namespace polygrid {

/// Rejected input data or configuration. The message carries indices or field
/// names where the offending value can be located.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Input whose shape does not match what the model or operation expects.
class DimensionMismatch : public InvalidInput {
 public:
  explicit DimensionMismatch(const std::string& what) : InvalidInput(what) {}
};

}  // namespace polygrid

#pragma once

#include <stdexcept>
#include <string>

namespace subgrad {

/// Invalid argument values or mismatched dimensions.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Index outside the valid range (e.g. an exhausted explicit step list).
class RangeError : public std::out_of_range {
 public:
  explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

/// Problem too large for a dense desk-scale computation.
class SizeError : public std::length_error {
 public:
  explicit SizeError(const std::string& what) : std::length_error(what) {}
};

}  // namespace subgrad

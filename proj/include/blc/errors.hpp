#pragma once

#include <stdexcept>
#include <string>

namespace blc {

/// Malformed input: ragged matrices, wrong row lengths, missing JSON fields.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A well-formed datum that violates a semantic invariant (rank, exponent range).
class InvalidDatum : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure of an evaluation, e.g. a singular Gram matrix.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace blc

#pragma once

#include <stdexcept>
#include <string>

namespace edog {

// Invalid arguments or unusable inputs (bad probabilities, out-of-range ids,
// degenerate graphs). CLI maps these to exit code 2.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally well-formed input that violates a documented file schema
// (inconsistent feature dimensions, out-of-range node ids, self-loops in a
// graph file). CLI maps these to exit code 3.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input that could not be parsed at all. Also exit code 3.
struct ParseError : SchemaError {
  using SchemaError::SchemaError;
};

}  // namespace edog

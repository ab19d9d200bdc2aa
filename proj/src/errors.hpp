// Error taxonomy shared across the library. The C API maps these onto
// gl_status codes and the CLI maps them onto process exit codes.
#pragma once

#include <stdexcept>

namespace ganlink {

// Bad configuration value or constraint violation.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor/vector dimension mismatch.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// API misuse: wrong call order, empty input, missing prerequisite.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values where finite arithmetic is required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File IO, serialization and integrity failures.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training did not reach a required quality target.
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ganlink

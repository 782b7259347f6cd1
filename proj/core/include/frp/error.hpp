#pragma once

#include <stdexcept>
#include <string>

namespace frp {

// Error categories map onto CLI exit codes: config/usage -> 1,
// data/geometry -> 2, training/numeric -> 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

struct GeometryError : DataError {
  using DataError::DataError;
};

struct TrainingError : Error {
  using Error::Error;
};

}  // namespace frp

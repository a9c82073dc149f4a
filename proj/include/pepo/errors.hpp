#ifndef PEPO_ERRORS_HPP
#define PEPO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pepo {

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnvironmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pepo

#endif

#pragma once

#include <stdexcept>

namespace thermonet {

/// Training produced a non-finite loss or gradient.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace thermonet

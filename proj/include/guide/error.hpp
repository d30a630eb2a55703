#pragma once

#include <stdexcept>
#include <string>

namespace guide {

/// Raised for malformed input and violated preconditions across the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace guide

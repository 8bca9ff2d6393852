#pragma once

#include <stdexcept>
#include <string>

namespace gbcm {

// Raised when an input violates a mathematical precondition. The message
// names the check that failed so callers can surface it verbatim.
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace gbcm

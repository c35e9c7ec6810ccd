#pragma once

#include <stdexcept>
#include <string>

namespace supercrit {

// Violated precondition or out-of-domain request (CLI exit code 1).
class domain_error : public std::runtime_error {
 public:
  explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// A computation that started from valid inputs failed to converge or ran out
// of precision (CLI exit code 2).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace supercrit

#pragma once

#include <stdexcept>
#include <string>

namespace ua {

// Caller asked an operation of a model variant it is not defined for.
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Instance exceeds a documented enumeration guard; the request is valid but
// not answerable at this size.
class GuardError : public std::runtime_error {
 public:
  explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

// Invariant that should hold by construction failed (algorithm bug trap).
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace ua

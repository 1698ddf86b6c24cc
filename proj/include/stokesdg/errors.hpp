// ============================================================================
// errors.hpp - Exception types shared by all stokesdg modules
//
// Every message is prefixed with "<module>::<operation>: " so that a failure
// surfacing in the CLI names where it came from.
// ============================================================================
#pragma once

#include <stdexcept>
#include <string>

namespace stokesdg {

class Error : public std::runtime_error {
public:
  Error(const std::string& module, const std::string& operation, const std::string& what)
      : std::runtime_error(module + "::" + operation + ": " + what), module_(module),
        operation_(operation) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }

private:
  std::string module_;
  std::string operation_;
};

/// Bad input or violated precondition. The CLI maps this to exit code 1.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Time partition violates one of the three grid assumptions (item = 1, 2 or 3).
class GridAssumptionError : public InvalidArgument {
public:
  GridAssumptionError(int item, const std::string& what)
      : InvalidArgument("timedg", "make_time_grid",
                        "grid assumption " + std::to_string(item) + " violated: " + what),
        item_(item) {}

  int item() const noexcept { return item_; }

private:
  int item_;
};

/// Factorization, solver or eigensolver breakdown. The CLI maps this to exit code 2.
class NumericalFailure : public Error {
public:
  using Error::Error;
};

} // namespace stokesdg

#pragma once

#include <stdexcept>
#include <string>

namespace graphprior {

// Base of every error thrown by the library. `kind()` is a stable short tag
// used by the CLI and the HTTP layer when reporting structured errors.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct ArgumentError : Error {
  explicit ArgumentError(const std::string& what) : Error("argument", what) {}
};

// Requested size is beyond what exact enumeration supports.
struct CapabilityError : Error {
  explicit CapabilityError(const std::string& what)
      : Error("capability", what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error("data", what) {}
};

struct NotFoundError : Error {
  explicit NotFoundError(const std::string& what) : Error("not_found", what) {}
};

struct ProtocolError : Error {
  explicit ProtocolError(const std::string& what) : Error("protocol", what) {}
};

struct NonErgodicError : Error {
  explicit NonErgodicError(const std::string& what)
      : Error("non_ergodic", what) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& what)
      : Error("convergence", what) {}
};

}  // namespace graphprior

#ifndef SBWALK_ERRORS_HPP
#define SBWALK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sbwalk {

// Bad user input: malformed vectors, norm violations, out-of-range parameters.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejected run configuration (e.g. a bias scale below 1).
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// File and stream problems. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Internal contract violation (a precondition the caller must uphold).
// Always on; these guard invariants that silent corruption would hide.
#define SBWALK_ASSERT(cond, msg)                                  \
  do {                                                            \
    if (!(cond)) throw std::logic_error(std::string("sbwalk: ") + (msg)); \
  } while (0)

}  // namespace sbwalk

#endif  // SBWALK_ERRORS_HPP

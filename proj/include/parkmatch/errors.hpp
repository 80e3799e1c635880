#pragma once

#include <stdexcept>
#include <string>

namespace parkmatch {

// Malformed input: unknown vertex ids, bad files, invalid trees.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A precondition of an algorithm step was violated by the caller.
class LogicError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DegenerateInputError : public InputError {
 public:
  using InputError::InputError;
};

// No alive expert remains, so the search has nowhere to go.
class SearchTerminatedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A request arrived with no unmatched server left.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double last_iterate)
      : std::runtime_error(what), last_iterate_(last_iterate) {}
  double last_iterate() const { return last_iterate_; }

 private:
  double last_iterate_;
};

// Probability matrix failed monotonicity or stochasticity checks.
class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace parkmatch

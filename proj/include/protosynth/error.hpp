#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace protosynth {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One or more invariant violations in user-supplied model data.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// A dependency cycle; `cycle` lists module names with the first repeated last.
class CycleError : public Error {
 public:
  explicit CycleError(std::vector<std::string> cycle);
  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

// Malformed text input (regex pattern, test file, dictionary literal, ...).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Something outside the process is missing or broken (toolchain, runtime,
// network endpoint). The CLI maps these to exit code 3.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

}  // namespace protosynth

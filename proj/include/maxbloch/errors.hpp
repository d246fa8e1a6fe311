#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace maxbloch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Carries every violation found, not only the first one.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

class ResonantDivisionError : public Error {
 public:
  using Error::Error;
};

class StepError : public Error {
 public:
  using Error::Error;
};

}  // namespace maxbloch

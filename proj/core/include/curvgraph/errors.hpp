#pragma once

#include <stdexcept>
#include <string>

namespace curvgraph {

// A point or scalar left the valid region of the current geometry.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The excluded antipodal configuration of spherical Mobius addition.
class SingularPairError : public DomainError {
 public:
  using DomainError::DomainError;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, long line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace curvgraph

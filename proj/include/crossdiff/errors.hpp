#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace crossdiff {

/// Invalid argument to a numerical primitive (bad grid, p < 1, s = 0 in a singular branch, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The explicit update produced a negative density beyond the floor, or a non-finite value.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MaxStepsExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration failed validation. Carries every violation, each prefixed by its field path.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = "schema violations:";
    for (const auto& item : items) {
      out += "\n  ";
      out += item;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

class IOError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crossdiff

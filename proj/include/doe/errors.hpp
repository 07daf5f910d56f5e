#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace doe {

// Malformed input document or non-radial network. CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// The network violates an operating limit before any envelope is allocated.
// Carries the violated quantity so callers can report it. CLI exit code 2.
class PreViolationError : public std::runtime_error {
 public:
  PreViolationError(std::string quantity, double value, int node = -1)
      : std::runtime_error(format(quantity, value, node)),
        quantity_(std::move(quantity)),
        value_(value),
        node_(node) {}

  const std::string& quantity() const { return quantity_; }
  double value() const { return value_; }
  int node() const { return node_; }  // -1 when not tied to one node

 private:
  static std::string format(const std::string& quantity, double value, int node) {
    char buf[160];
    if (node >= 0) {
      std::snprintf(buf, sizeof buf, "pre-violation: %s = %.6g at node %d",
                    quantity.c_str(), value, node);
    } else {
      std::snprintf(buf, sizeof buf, "pre-violation: %s = %.6g", quantity.c_str(), value);
    }
    return buf;
  }

  std::string quantity_;
  double value_;
  int node_;
};

// An engine gave up: divergent power flow, iteration limit, infeasible
// subproblem. CLI exit code 3.
class SolverFailure : public std::runtime_error {
 public:
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace doe

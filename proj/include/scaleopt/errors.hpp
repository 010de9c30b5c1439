#pragma once

#include <stdexcept>
#include <string>

namespace scaleopt {

/// Malformed or inconsistent input files. Carries file and line context.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}
  explicit ParseError(std::string file, const std::string& what)
      : std::runtime_error(file + ": " + what), file_(std::move(file)), line_(-1) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

/// Violated precondition or invalid configuration value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Algorithmic failure of an optimization or matching routine.
class OptimizationError : public std::runtime_error {
 public:
  enum class Kind {
    insufficient_overlap,       // too few points project into the valid region
    degenerate_normal_equation, // sum of weighted squared Jacobians ~ 0
    scale_out_of_bounds,        // iterate left [1e-4, 1e4]
    baseline_failure,           // stereo block-matching produced too few matches
    oracle_failure,             // every brute-force grid cell was invalid
  };

  OptimizationError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

  static const char* kind_name(Kind k) {
    switch (k) {
      case Kind::insufficient_overlap: return "insufficient-overlap";
      case Kind::degenerate_normal_equation: return "degenerate-normal-equation";
      case Kind::scale_out_of_bounds: return "scale-out-of-bounds";
      case Kind::baseline_failure: return "baseline-failure";
      case Kind::oracle_failure: return "oracle-failure";
    }
    return "unknown";
  }

 private:
  Kind kind_;
};

}  // namespace scaleopt

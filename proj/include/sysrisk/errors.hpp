#pragma once

#include <stdexcept>
#include <string>

namespace sysrisk {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two random quantities live on different scenario spaces.
struct MismatchedSpace : Error {
  using Error::Error;
};

struct BadGroupStructure : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// An iterative scheme hit its budget without meeting its tolerance.
struct NoConvergence : Error {
  using Error::Error;
};

struct Infeasible : Error {
  using Error::Error;
};

struct Unbounded : Error {
  using Error::Error;
};

struct NoBracket : Error {
  using Error::Error;
};

struct NotDifferentiable : Error {
  using Error::Error;
};

struct UnsupportedRule : Error {
  using Error::Error;
};

struct Unsupported : Error {
  using Error::Error;
};

struct ScaleTooLarge : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& msg, int line_no = 0)
      : Error(line_no > 0 ? msg + " (line " + std::to_string(line_no) + ")" : msg),
        line(line_no) {}
  int line;
};

}  // namespace sysrisk

#pragma once

#include <stdexcept>
#include <string>

namespace hocbf {

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Relative-degree certification failed on the supplied samples.
struct DegreeViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonHurwitz : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotInInterior : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& file, int line, const std::string& msg)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg),
        line(line) {}
  int line;
};

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hocbf

#pragma once

#include <stdexcept>
#include <string>

namespace gcnabft {

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct BitOutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct IndexOutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct EmptyPopulation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// dataio errors -------------------------------------------------------------

struct ParseError : std::runtime_error {
  std::size_t line;
  ParseError(std::size_t line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
        line(line_no) {}
};

struct ShapeInconsistent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExplicitZero : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownKey : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingKey : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigTypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gcnabft

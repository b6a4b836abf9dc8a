#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace termrank {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text: constraint strings, JSON documents, CHC listings.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error(msg + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed input that violates a model invariant (unknown variable,
/// dangling location, duplicate edge id, ...).
class SemanticError : public Error {
 public:
  using Error::Error;
};

/// A configured resource cap was exceeded (FM row cap, version cap, ...).
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A result contradicted a theorem the implementation relies on.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace termrank

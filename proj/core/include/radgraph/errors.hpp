#pragma once

#include <stdexcept>
#include <string>

namespace radgraph {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scalar argument fell outside the open range on which a formula is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The principal curvatures left the admissible cone (or strict convexity was lost).
class AdmissibilityError : public Error {
 public:
  AdmissibilityError(const std::string& what, int node = -1) : Error(what), node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

/// A finite-difference stencil or linear system could not be built or solved.
class AssemblyError : public Error {
 public:
  AssemblyError(const std::string& what, int node = -1) : Error(what), node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Syntax or semantic error in a text input, with a 1-based location (0 = unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(format(what, line, column)), message_(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    if (line <= 0) return what;
    return std::to_string(line) + ":" + std::to_string(column) + ": " + what;
  }
  std::string message_;
  int line_;
  int column_;
};

/// Expression evaluation failure (missing variable, division by zero, non-finite value).
class EvalError : public Error {
 public:
  EvalError(const std::string& what, int column) : Error(what), column_(column) {}
  int column() const { return column_; }

 private:
  int column_;
};

}  // namespace radgraph

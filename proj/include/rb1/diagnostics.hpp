#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rb1 {

struct SourcePos {
  int line = 0;
  int column = 0;

  bool valid() const { return line > 0 && column > 0; }
  friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

/// Base of every error raised by the toolchain. `kind()` is a stable,
/// machine-readable tag used by the CLI and the serve protocol.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, SourcePos pos, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)), pos_(pos) {}

  const std::string& kind() const { return kind_; }
  SourcePos pos() const { return pos_; }

 private:
  std::string kind_;
  SourcePos pos_;
};

class LexError : public Error {
 public:
  LexError(SourcePos pos, const std::string& message) : Error("lex", pos, message) {}
};

class ParseError : public Error {
 public:
  ParseError(SourcePos pos, const std::string& expected, const std::string& found)
      : Error("parse", pos, "expected " + expected + ", found " + found),
        expected_(expected),
        found_(found) {}

  const std::string& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  std::string expected_;
  std::string found_;
};

class TypeError : public Error {
 public:
  TypeError(SourcePos pos, const std::string& message) : Error("type", pos, message) {}
};

class ActionCycleError : public TypeError {
 public:
  ActionCycleError(SourcePos pos, std::vector<std::string> cycle);

  const std::vector<std::string>& cycle() const { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

/// Raised while executing DSL code. `kind()` is one of: division-by-zero,
/// overflow, range, index, step-limit, call-depth, precondition, poisoned.
class RuntimeError : public Error {
 public:
  RuntimeError(std::string kind, SourcePos pos, const std::string& message)
      : Error(std::move(kind), pos, message) {}
};

class PreconditionViolated : public Error {
 public:
  PreconditionViolated(std::string action, std::int64_t suspension_index);

  const std::string& action() const { return action_; }
  std::int64_t suspension_index() const { return suspension_index_; }

 private:
  std::string action_;
  std::int64_t suspension_index_;
};

class ArityError : public Error {
 public:
  explicit ArityError(const std::string& message) : Error("arity", {}, message) {}
};

class TypeMismatch : public Error {
 public:
  explicit TypeMismatch(const std::string& message) : Error("type-mismatch", {}, message) {}
};

class PathError : public Error {
 public:
  explicit PathError(const std::string& message) : Error("path", {}, message) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& message) : Error("range", {}, message) {}
};

class DecodeError : public Error {
 public:
  DecodeError(std::size_t offset, const std::string& reason);

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Non-fatal compiler finding (e.g. an unreachable action statement).
struct Diagnostic {
  SourcePos pos;
  std::string message;
};

/// `file:line:col: error: message`
std::string format_diagnostic(const std::string& file, const Error& error);
std::string format_warning(const std::string& file, const Diagnostic& warning);

}  // namespace rb1

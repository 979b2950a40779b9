#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skillshift {

/// Base of every error raised for bad input. The CLI maps these to exit
/// code 1; anything else escaping is treated as an internal error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(int line, int column, const std::string& expected,
              const std::string& found);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class UnknownEntity : public ValidationError {
 public:
  explicit UnknownEntity(const std::string& name)
      : ValidationError("unknown entity '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Operator literals do not resolve against the target problem.
class BindError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A protected operator does not bind to the scene being modified.
class UnboundOperator : public BindError {
 public:
  using BindError::BindError;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class InconsistentEffects : public Error {
 public:
  using Error::Error;
};

/// rule is one of 'a' (touches protected Pre/Eff), 'b' (state
/// consistency) or 'c' (capacity).
class IllegalModification : public Error {
 public:
  IllegalModification(char rule, const std::string& detail)
      : Error(std::string("illegal modification (rule ") + rule + "): " + detail),
        rule_(rule) {}
  char rule() const { return rule_; }

 private:
  char rule_;
};

class NoCandidates : public Error {
 public:
  explicit NoCandidates(std::size_t round)
      : Error("no legal modification candidates at round " + std::to_string(round)),
        round_(round) {}
  std::size_t round() const { return round_; }

 private:
  std::size_t round_;
};

class UnknownOperator : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class MissingCondition : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class MissingBase : public Error {
 public:
  using Error::Error;
};

}  // namespace skillshift

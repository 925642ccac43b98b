#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rcndl {

enum class ErrorKind {
  scope_mismatch,
  arity,
  syntax,
  range,
  undeclared_variable,
  redefinition,
  cycle,
  ordering,
  multiply_connected,
  unknown_entries,
  infeasible,
  absolute_continuity,
  constraint_form,
  non_convergence,
  size_limit,
  unknown_variable,
  io,
  internal,
};

const char* to_string(ErrorKind kind);

// 1-based line/column; line 0 means "no position".
struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;

  bool valid() const { return line != 0; }
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, SourcePos pos = {});

  ErrorKind kind() const { return kind_; }
  const SourcePos& pos() const { return pos_; }

 private:
  ErrorKind kind_;
  SourcePos pos_;
};

}  // namespace rcndl

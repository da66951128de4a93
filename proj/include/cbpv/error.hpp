#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cbpv/syntax.hpp"

namespace cbpv {

// Base of every diagnostic. `code` is a stable identifier such as
// "TypeMismatch"; what() renders "line:col: code: message".
class Error : public std::runtime_error {
 public:
  Error(std::string code, Span span, std::string message);

  const std::string& code() const { return code_; }
  Span span() const { return span_; }
  const std::string& message() const { return message_; }

 private:
  std::string code_;
  Span span_;
  std::string message_;
};

class LexError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(Span span, std::vector<std::string> expected, std::string found);
  std::vector<std::string> expected;
  std::string found;
};

class KindError : public Error {
 public:
  KindError(std::string code, Span span, std::string message, KindPtr expected = nullptr,
            KindPtr found = nullptr);
  KindPtr expected;
  KindPtr found;
};

class TypeError : public Error {
 public:
  TypeError(std::string code, Span span, std::string message, bool computation,
            TypePtr expected = nullptr, TypePtr found = nullptr);
  bool computation;
  TypePtr expected;
  TypePtr found;
};

class ElabError : public Error {
 public:
  using Error::Error;
};

// Module-level problems (duplicate definitions, alias cycles, manifest
// mismatches). Wraps the underlying diagnostic with its file and definition.
class LoadError : public Error {
 public:
  LoadError(std::string code, Span span, std::string message, std::string file = {},
            std::string definition = {});
  std::string file;
  std::string definition;
};

}  // namespace cbpv

#include "cbpv/error.hpp"

#include <sstream>

namespace cbpv {

namespace {

std::string render(const std::string& code, Span span, const std::string& message) {
  std::ostringstream out;
  if (span.line > 0) out << span.line << ":" << span.column << ": ";
  out << code << ": " << message;
  return out.str();
}

std::string expected_list(const std::vector<std::string>& expected) {
  std::string out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i > 0) out += ", ";
    out += expected[i];
  }
  return out;
}

}  // namespace

Error::Error(std::string code, Span span, std::string message)
    : std::runtime_error(render(code, span, message)),
      code_(std::move(code)),
      span_(span),
      message_(std::move(message)) {}

SyntaxError::SyntaxError(Span span, std::vector<std::string> expected_, std::string found_)
    : Error("SyntaxError", span,
            "expected one of {" + expected_list(expected_) + "}, found " + found_),
      expected(std::move(expected_)),
      found(std::move(found_)) {}

KindError::KindError(std::string code, Span span, std::string message, KindPtr expected_,
                     KindPtr found_)
    : Error(std::move(code), span, std::move(message)),
      expected(std::move(expected_)),
      found(std::move(found_)) {}

TypeError::TypeError(std::string code, Span span, std::string message, bool computation_,
                     TypePtr expected_, TypePtr found_)
    : Error(std::move(code), span, std::move(message)),
      computation(computation_),
      expected(std::move(expected_)),
      found(std::move(found_)) {}

LoadError::LoadError(std::string code, Span span, std::string message, std::string file_,
                     std::string definition_)
    : Error(std::move(code), span, std::move(message)),
      file(std::move(file_)),
      definition(std::move(definition_)) {}

}  // namespace cbpv

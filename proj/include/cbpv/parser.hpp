#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbpv/syntax.hpp"

namespace cbpv {

enum class TokenKind { Keyword, Ident, Ctor, Dtor, Int, String, Symbol, End };

struct Token {
  TokenKind kind;
  std::string text;  // dtor tokens keep the leading '.'; strings are unescaped
  Span span;
  std::int64_t value = 0;
};

// Elaborated output starts with this line; it admits `$` in identifiers.
inline constexpr std::string_view kElaboratedPragma = "--# elaborated";

std::vector<Token> tokenize(std::string_view text);

struct AliasDecl {
  std::string name;
  std::vector<std::pair<std::string, KindPtr>> params;
  TypePtr body;
  Span span;
};

struct DefDecl {
  std::string name;
  TypePtr type;
  ValuePtr value;
  Span span;
};

struct Module {
  std::vector<AliasDecl> aliases;
  std::vector<DefDecl> defs;
  CompPtr main;
  bool elaborated = false;
};

Module parse_module(std::string_view text);
Module parse_tokens(const std::vector<Token>& tokens, bool elaborated = false);
TypePtr parse_type(std::string_view text);
ValuePtr parse_value(std::string_view text);
CompPtr parse_computation(std::string_view text);
KindPtr parse_kind(std::string_view text);

std::string print(const KindPtr& k);
std::string print(const TypePtr& t);
std::string print(const ValuePtr& v);
std::string print(const CompPtr& c);
std::string print(const Module& m);

bool alpha_eq(const Module& a, const Module& b);

}  // namespace cbpv

#include <cctype>
#include <set>

#include "cbpv/error.hpp"
#include "cbpv/parser.hpp"

namespace cbpv {

namespace {

const std::set<std::string, std::less<>> kKeywords = {
    "ret",    "do",     "let",     "in",    "fn",   "comatch", "match", "end",
    "forall", "tyfn",   "exists",  "pack",  "unpack", "rec",   "roll",  "unroll",
    "fix",    "monadic", "def",    "type",  "data", "codata",  "true",  "false"};

bool is_lower(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_word(char c) { return is_lower(c) || is_upper(c) || is_digit(c) || c == '\''; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {
    elaborated_ = text.substr(0, kElaboratedPragma.size()) == kElaboratedPragma;
  }

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Span span{line_, col_};
      if (pos_ >= text_.size()) {
        out.push_back({TokenKind::End, "<end of input>", span});
        return out;
      }
      out.push_back(next(span));
    }
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  bool elaborated_ = false;

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia() {
    for (;;) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '-' && peek(1) == '-') {
        while (pos_ < text_.size() && peek() != '\n') advance();
      } else if (c == '{' && peek(1) == '-') {
        Span start{line_, col_};
        int depth = 0;
        do {
          if (pos_ >= text_.size()) throw LexError("UnterminatedComment", start, "unterminated block comment");
          if (peek() == '{' && peek(1) == '-') {
            ++depth;
            advance();
            advance();
          } else if (peek() == '-' && peek(1) == '}') {
            --depth;
            advance();
            advance();
          } else {
            advance();
          }
        } while (depth > 0);
      } else {
        return;
      }
    }
  }

  std::string word() {
    std::string out;
    if (elaborated_) {
      while (is_word(peek()) || peek() == '$' || peek() == '?') {
        out += peek();
        advance();
      }
      return out;
    }
    while (is_word(peek())) {
      out += peek();
      advance();
    }
    if (peek() == '?') {
      out += '?';
      advance();
    }
    return out;
  }

  Token next(Span span) {
    char c = peek();
    if (c == '"') return string_literal(span);
    if (is_digit(c) || (c == '-' && is_digit(peek(1)))) return integer(span);
    if (c == '.' && is_lower(peek(1))) {
      advance();
      return {TokenKind::Dtor, "." + word(), span};
    }
    if (c == '$' && elaborated_) {
      std::size_t i = pos_;
      while (i < text_.size() && text_[i] == '$') ++i;
      bool upper = i < text_.size() && is_upper(text_[i]);
      return {upper ? TokenKind::Ctor : TokenKind::Ident, word(), span};
    }
    if (is_lower(c)) {
      std::string w = word();
      return {kKeywords.count(w) ? TokenKind::Keyword : TokenKind::Ident, w, span};
    }
    if (is_upper(c)) return {TokenKind::Ctor, word(), span};
    if (c == '-' && peek(1) == '>') return symbol("->", span);
    if (c == '<' && peek(1) == '-') return symbol("<-", span);
    static const std::string singles = "(){},:;|=!@*+&.";
    if (singles.find(c) != std::string::npos) return symbol(std::string(1, c), span);
    std::string shown = std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c) : "\\x" + std::to_string(static_cast<unsigned char>(c));
    throw LexError("IllegalCharacter", span, "illegal character '" + shown + "'");
  }

  Token symbol(std::string text, Span span) {
    for (std::size_t i = 0; i < text.size(); ++i) advance();
    return {TokenKind::Symbol, std::move(text), span};
  }

  Token integer(Span span) {
    std::string digits;
    if (peek() == '-') {
      digits += '-';
      advance();
    }
    while (is_digit(peek())) {
      digits += peek();
      advance();
    }
    Token t{TokenKind::Int, digits, span};
    try {
      t.value = std::stoll(digits);
    } catch (const std::out_of_range&) {
      throw LexError("IntegerOverflow", span, "integer literal out of range");
    }
    return t;
  }

  Token string_literal(Span span) {
    advance();
    std::string out;
    for (;;) {
      if (pos_ >= text_.size() || peek() == '\n')
        throw LexError("UnterminatedString", span, "unterminated string literal");
      char c = peek();
      advance();
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (pos_ >= text_.size()) throw LexError("UnterminatedString", span, "unterminated string literal");
      char e = peek();
      Span at{line_, col_};
      advance();
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '\\': out += '\\'; break;
        case '"': out += '"'; break;
        default: throw LexError("IllegalEscape", at, std::string("unknown escape \\") + e);
      }
    }
    return {TokenKind::String, out, span};
  }
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

}  // namespace cbpv

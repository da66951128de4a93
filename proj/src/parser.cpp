#include <set>

#include "cbpv/error.hpp"
#include "cbpv/parser.hpp"

namespace cbpv {

namespace {

const std::set<std::string, std::less<>> kReservedTypeNames = {
    "Unit", "Int", "String", "Bool", "OS", "Thk", "Ret", "VTy", "CTy"};

class Parser {
 public:
  Parser(const std::vector<Token>& tokens, bool elaborated) : toks_(tokens), elaborated_(elaborated) {}

  Module module() {
    Module m;
    m.elaborated = elaborated_;
    while (!at_end()) item(m);
    return m;
  }

  TypePtr whole_type() {
    TypePtr t = type();
    expect_end();
    return t;
  }
  ValuePtr whole_value() {
    ValuePtr v = value();
    expect_end();
    return v;
  }
  CompPtr whole_comp() {
    CompPtr c = comp();
    expect_end();
    return c;
  }
  KindPtr whole_kind() {
    KindPtr k = kind();
    expect_end();
    return k;
  }

 private:
  const std::vector<Token>& toks_;
  bool elaborated_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at_end() const { return peek().kind == TokenKind::End; }
  Span span() const { return peek().span; }

  bool is_sym(const char* s, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Symbol && t.text == s;
  }
  bool is_kw(const char* s, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Keyword && t.text == s;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    std::string found = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(t.span, std::move(expected), found);
  }

  void expect_sym(const char* s) {
    if (!is_sym(s)) fail({std::string("'") + s + "'"});
    ++pos_;
  }
  void expect_kw(const char* s) {
    if (!is_kw(s)) fail({std::string("'") + s + "'"});
    ++pos_;
  }
  void expect_end() {
    if (!at_end()) fail({"end of input"});
  }

  std::string ident() {
    if (peek().kind != TokenKind::Ident) fail({"identifier"});
    return toks_[pos_++].text;
  }

  // Type variable or alias name: any non-reserved identifier or ctor-like word.
  bool at_type_name(std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    if (t.kind == TokenKind::Ident) {
      // `main =` starts the entry item, not a type application argument.
      const Token& n = peek(ahead + 1);
      return !(t.text == "main" && n.kind == TokenKind::Symbol && n.text == "=");
    }
    return t.kind == TokenKind::Ctor && !kReservedTypeNames.count(t.text);
  }
  std::string type_name() {
    if (!at_type_name()) fail({"type variable"});
    return toks_[pos_++].text;
  }

  // Items

  void item(Module& m) {
    Span s = span();
    if (is_kw("type") || is_kw("data") || is_kw("codata")) {
      std::string which = peek().text;
      ++pos_;
      AliasDecl a;
      a.span = s;
      if (peek().kind != TokenKind::Ctor || kReservedTypeNames.count(peek().text)) fail({"type name"});
      a.name = toks_[pos_++].text;
      while (is_sym("(") || at_type_name()) {
        for (auto& b : type_binder_group(k_vty())) a.params.push_back(std::move(b));
      }
      expect_sym("=");
      if (which == "type")
        a.body = type();
      else
        a.body = which == "data" ? data_body() : codata_body();
      m.aliases.push_back(std::move(a));
      return;
    }
    if (is_kw("def")) {
      ++pos_;
      DefDecl d;
      d.span = s;
      d.name = ident();
      expect_sym(":");
      d.type = type();
      expect_sym("=");
      d.value = value();
      m.defs.push_back(std::move(d));
      return;
    }
    if (peek().kind == TokenKind::Ident && peek().text == "main" && is_sym("=", 1)) {
      if (m.main) throw SyntaxError(s, {"definition"}, "a second 'main'");
      pos_ += 2;
      m.main = comp();
      return;
    }
    fail({"'type'", "'data'", "'codata'", "'def'", "'main'"});
  }

  TypePtr data_body() {
    Span s = span();
    TypeFields fields;
    while (is_sym("|")) {
      ++pos_;
      if (peek().kind != TokenKind::Ctor) fail({"constructor"});
      std::string tag = toks_[pos_++].text;
      expect_sym(":");
      fields.emplace_back(tag, type());
    }
    return t_sum(std::move(fields), s);
  }

  TypePtr codata_body() {
    Span s = span();
    TypeFields fields;
    while (is_sym("|")) {
      ++pos_;
      if (peek().kind != TokenKind::Dtor) fail({"destructor"});
      std::string tag = toks_[pos_++].text.substr(1);
      expect_sym(":");
      fields.emplace_back(tag, type());
    }
    return t_with(std::move(fields), s);
  }

  // Kinds

  KindPtr kind() {
    KindPtr dom = kind_atom();
    if (is_sym("->")) {
      ++pos_;
      return k_arrow(dom, kind());
    }
    return dom;
  }

  KindPtr kind_atom() {
    if (is_sym("(")) {
      ++pos_;
      KindPtr k = kind();
      expect_sym(")");
      return k;
    }
    if (peek().kind == TokenKind::Ctor && peek().text == "VTy") {
      ++pos_;
      return k_vty();
    }
    if (peek().kind == TokenKind::Ctor && peek().text == "CTy") {
      ++pos_;
      return k_cty();
    }
    fail({"'VTy'", "'CTy'", "'('"});
  }

  // `(X Y: K)` or a bare name defaulting to `dflt`.
  std::vector<std::pair<std::string, KindPtr>> type_binder_group(const KindPtr& dflt) {
    std::vector<std::pair<std::string, KindPtr>> out;
    if (is_sym("(")) {
      ++pos_;
      std::vector<std::string> names{type_name()};
      while (at_type_name()) names.push_back(type_name());
      expect_sym(":");
      KindPtr k = kind();
      expect_sym(")");
      for (auto& n : names) out.emplace_back(std::move(n), k);
      return out;
    }
    out.emplace_back(type_name(), dflt);
    return out;
  }

  std::vector<std::pair<std::string, KindPtr>> type_binders(const KindPtr& dflt) {
    std::vector<std::pair<std::string, KindPtr>> out;
    do {
      for (auto& b : type_binder_group(dflt)) out.push_back(std::move(b));
    } while (is_sym("(") || at_type_name());
    return out;
  }

  // Types

  TypePtr type() {
    Span s = span();
    auto quantified = [&](TypeTag tag, const KindPtr& dflt, const char* sep) {
      ++pos_;
      auto binders = type_binders(dflt);
      expect_sym(sep);
      TypePtr body = type();
      for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
        auto n = std::make_shared<Type>();
        n->tag = tag;
        n->name = it->first;
        n->kind = it->second;
        n->a = body;
        n->span = s;
        body = seal(n);
      }
      return body;
    };
    if (is_kw("forall")) return quantified(TypeTag::Forall, k_vty(), ".");
    if (is_kw("exists")) return quantified(TypeTag::Exists, k_vty(), ".");
    if (is_kw("rec")) return quantified(TypeTag::Nu, k_cty(), ".");
    if (is_kw("fn")) return quantified(TypeTag::Lam, k_vty(), "->");
    TypePtr left = product_type();
    if (is_sym("->")) {
      ++pos_;
      return t_arrow(left, type(), s);
    }
    return left;
  }

  TypePtr product_type() {
    Span s = span();
    TypePtr left = app_type();
    if (is_sym("*")) {
      ++pos_;
      return t_prod(left, product_type(), s);
    }
    return left;
  }

  bool at_type_atom() const {
    if (at_type_name()) return true;
    const Token& t = peek();
    if (t.kind == TokenKind::Ctor && kReservedTypeNames.count(t.text) && t.text != "VTy" && t.text != "CTy")
      return true;
    return is_sym("(") || is_sym("+") || is_sym("&");
  }

  TypePtr app_type() {
    Span s = span();
    TypePtr head;
    const Token& t = peek();
    if (t.kind == TokenKind::Ctor && (t.text == "Thk" || t.text == "Ret")) {
      bool thk = t.text == "Thk";
      ++pos_;
      if (at_type_atom()) {
        TypePtr arg = type_atom();
        head = thk ? t_thk(arg, s) : t_ret(arg, s);
      } else {
        head = bare_thk_ret(thk, s);
      }
    } else {
      head = type_atom();
    }
    while (at_type_atom()) head = t_app(head, type_atom(), s);
    return head;
  }

  static TypePtr bare_thk_ret(bool thk, Span s) {
    if (thk) return t_lam("B", k_cty(), t_thk(t_var("B", s), s), s);
    return t_lam("A", k_vty(), t_ret(t_var("A", s), s), s);
  }

  TypePtr type_atom() {
    Span s = span();
    const Token& t = peek();
    if (t.kind == TokenKind::Ctor && kReservedTypeNames.count(t.text)) {
      ++pos_;
      if (t.text == "Unit") return t_unit(s);
      if (t.text == "Int") return t_prim(PrimType::Int, s);
      if (t.text == "String") return t_prim(PrimType::String, s);
      if (t.text == "Bool") return t_prim(PrimType::Bool, s);
      if (t.text == "OS") return t_prim(PrimType::OS, s);
      if (t.text == "Thk") return bare_thk_ret(true, s);
      if (t.text == "Ret") return bare_thk_ret(false, s);
      --pos_;
      fail({"type"});
    }
    if (at_type_name()) return t_var(type_name(), s);
    if (is_sym("(")) {
      ++pos_;
      TypePtr inner = type();
      expect_sym(")");
      return inner;
    }
    if (is_sym("+")) {
      ++pos_;
      expect_sym("{");
      TypeFields fields;
      if (!is_sym("}")) {
        do {
          if (peek().kind != TokenKind::Ctor) fail({"constructor"});
          std::string tag = toks_[pos_++].text;
          expect_sym(":");
          fields.emplace_back(tag, type());
        } while (is_sym(",") && ++pos_);
      }
      expect_sym("}");
      return t_sum(std::move(fields), s);
    }
    if (is_sym("&")) {
      ++pos_;
      expect_sym("{");
      TypeFields fields;
      if (!is_sym("}")) {
        do {
          if (peek().kind != TokenKind::Dtor) fail({"destructor"});
          std::string tag = toks_[pos_++].text.substr(1);
          expect_sym(":");
          fields.emplace_back(tag, type());
        } while (is_sym(",") && ++pos_);
      }
      expect_sym("}");
      return t_with(std::move(fields), s);
    }
    fail({"type"});
  }

  // Values

  bool at_value_atom() const {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Ident:
      case TokenKind::Int:
      case TokenKind::String:
      case TokenKind::Ctor:
        return true;
      case TokenKind::Keyword:
        return t.text == "true" || t.text == "false" || t.text == "pack";
      case TokenKind::Symbol:
        return t.text == "(" || t.text == "{";
      default:
        return false;
    }
  }

  ValuePtr tuple_tail(Span s) {
    // After '(' has been consumed; parses `v, w, ...)` into nested pairs.
    std::vector<ValuePtr> items{value()};
    while (is_sym(",")) {
      ++pos_;
      items.push_back(value());
    }
    expect_sym(")");
    ValuePtr out = items.back();
    for (std::size_t i = items.size() - 1; i-- > 0;) out = v_pair(items[i], out, s);
    return out;
  }

  ValuePtr value() {
    Span s = span();
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Ident:
        ++pos_;
        return v_var(t.text, s);
      case TokenKind::Int:
        ++pos_;
        return v_int(t.value, s);
      case TokenKind::String:
        ++pos_;
        return v_string(t.text, s);
      case TokenKind::Ctor: {
        std::string tag = t.text;
        ++pos_;
        expect_sym("(");
        if (is_sym(")")) {
          ++pos_;
          return v_inj(tag, v_unit(s), s);
        }
        return v_inj(tag, tuple_tail(s), s);
      }
      default:
        break;
    }
    if (is_kw("true") || is_kw("false")) {
      bool b = peek().text == "true";
      ++pos_;
      return v_bool(b, s);
    }
    if (is_kw("pack")) {
      ++pos_;
      expect_sym("(");
      TypePtr witness = type();
      expect_sym(",");
      ValuePtr payload = value();
      expect_sym(")");
      return v_pack(witness, payload, s);
    }
    if (is_sym("(")) {
      ++pos_;
      if (is_sym(")")) {
        ++pos_;
        return v_unit(s);
      }
      return tuple_tail(s);
    }
    if (is_sym("{")) {
      ++pos_;
      CompPtr body = comp();
      expect_sym("}");
      return v_thunk(body, s);
    }
    fail({"value"});
  }

  // Computations

  CompPtr comp() {
    Span s = span();
    if (is_kw("do")) {
      ++pos_;
      std::string x = ident();
      expect_sym("<-");
      CompPtr head = comp();
      expect_sym(";");
      return c_bind(x, head, comp(), nullptr, nullptr, s);
    }
    if (is_kw("let")) {
      ++pos_;
      if (is_sym("(")) {
        ++pos_;
        std::string x = ident();
        expect_sym(",");
        std::string y = ident();
        expect_sym(")");
        expect_sym("=");
        ValuePtr v = value();
        expect_kw("in");
        return c_letpair(x, y, v, comp(), s);
      }
      std::string x = ident();
      expect_sym("=");
      ValuePtr v = value();
      expect_kw("in");
      return c_let(x, v, comp(), s);
    }
    if (is_kw("unpack")) {
      ++pos_;
      expect_sym("(");
      std::string tv = type_name();
      expect_sym(",");
      std::string x = ident();
      expect_sym(")");
      expect_sym("=");
      ValuePtr v = value();
      expect_kw("in");
      return c_unpack(tv, x, v, comp(), s);
    }
    if (is_kw("fn")) {
      ++pos_;
      std::vector<std::pair<std::string, TypePtr>> params;
      do {
        if (is_sym("(")) {
          ++pos_;
          std::vector<std::string> names{ident()};
          while (peek().kind == TokenKind::Ident) names.push_back(ident());
          expect_sym(":");
          TypePtr ann = type();
          expect_sym(")");
          for (auto& n : names) params.emplace_back(n, ann);
        } else {
          params.emplace_back(ident(), nullptr);
        }
      } while (is_sym("(") || peek().kind == TokenKind::Ident);
      expect_sym("->");
      CompPtr body = comp();
      for (auto it = params.rbegin(); it != params.rend(); ++it) body = c_lam(it->first, it->second, body, s);
      return body;
    }
    if (is_kw("tyfn")) {
      ++pos_;
      std::vector<std::pair<std::string, KindPtr>> params;
      do {
        if (is_sym("(")) {
          for (auto& b : type_binder_group(nullptr)) params.push_back(std::move(b));
        } else {
          params.emplace_back(type_name(), nullptr);
        }
      } while (is_sym("(") || at_type_name());
      expect_sym("->");
      CompPtr body = comp();
      for (auto it = params.rbegin(); it != params.rend(); ++it) body = c_tylam(it->first, it->second, body, s);
      return body;
    }
    if (is_kw("fix")) {
      ++pos_;
      std::string x;
      TypePtr ann;
      if (is_sym("(")) {
        ++pos_;
        x = ident();
        expect_sym(":");
        ann = type();
        expect_sym(")");
      } else {
        x = ident();
      }
      expect_sym("->");
      return c_fix(x, ann, comp(), s);
    }
    return app_comp();
  }

  CompPtr app_comp() {
    Span s = span();
    CompPtr head = atom_comp();
    for (;;) {
      if (peek().kind == TokenKind::Dtor) {
        head = c_dtor(head, toks_[pos_++].text.substr(1), s);
      } else if (is_sym("@")) {
        ++pos_;
        expect_sym("(");
        TypePtr arg = type();
        expect_sym(")");
        head = c_tyapp(head, arg, s);
      } else if (at_value_atom()) {
        head = c_app(head, value(), s);
      } else {
        return head;
      }
    }
  }

  CompPtr atom_comp() {
    Span s = span();
    if (is_sym("!")) {
      ++pos_;
      return c_force(value(), s);
    }
    if (is_kw("ret")) {
      ++pos_;
      return c_return(value(), nullptr, s);
    }
    if (is_sym("(")) {
      ++pos_;
      CompPtr inner = comp();
      expect_sym(")");
      return inner;
    }
    if (is_kw("roll")) {
      ++pos_;
      return c_roll(atom_comp(), s);
    }
    if (is_kw("unroll")) {
      ++pos_;
      return c_unroll(atom_comp(), s);
    }
    if (is_kw("monadic")) {
      ++pos_;
      expect_sym("{");
      CompPtr body = comp();
      expect_sym("}");
      return c_monadic(body, s);
    }
    if (is_kw("comatch")) {
      ++pos_;
      std::vector<Arm> arms;
      while (is_sym("|")) {
        ++pos_;
        if (peek().kind != TokenKind::Dtor) fail({"destructor"});
        std::string tag = toks_[pos_++].text.substr(1);
        expect_sym("->");
        arms.push_back({tag, "", comp()});
      }
      expect_kw("end");
      return c_comatch(std::move(arms), s);
    }
    if (is_kw("match")) {
      ++pos_;
      ValuePtr scrutinee = value();
      std::vector<Arm> arms;
      while (is_sym("|")) {
        ++pos_;
        if (peek().kind != TokenKind::Ctor) fail({"constructor"});
        std::string tag = toks_[pos_++].text;
        expect_sym("(");
        std::string binder = "_";
        if (!is_sym(")")) binder = ident();
        expect_sym(")");
        expect_sym("->");
        arms.push_back({tag, binder, comp()});
      }
      expect_kw("end");
      return c_match(scrutinee, std::move(arms), s);
    }
    fail({"computation"});
  }
};

bool module_elaborated(std::string_view text) {
  return text.substr(0, kElaboratedPragma.size()) == kElaboratedPragma;
}

}  // namespace

Module parse_tokens(const std::vector<Token>& tokens, bool elaborated) {
  return Parser(tokens, elaborated).module();
}

Module parse_module(std::string_view text) {
  auto tokens = tokenize(text);
  return Parser(tokens, module_elaborated(text)).module();
}

TypePtr parse_type(std::string_view text) {
  auto tokens = tokenize(text);
  return Parser(tokens, module_elaborated(text)).whole_type();
}

ValuePtr parse_value(std::string_view text) {
  auto tokens = tokenize(text);
  return Parser(tokens, module_elaborated(text)).whole_value();
}

CompPtr parse_computation(std::string_view text) {
  auto tokens = tokenize(text);
  return Parser(tokens, module_elaborated(text)).whole_comp();
}

KindPtr parse_kind(std::string_view text) {
  auto tokens = tokenize(text);
  return Parser(tokens, module_elaborated(text)).whole_kind();
}

}  // namespace cbpv

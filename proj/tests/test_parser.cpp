#include "doctest.h"

#include "cbpv/error.hpp"
#include "cbpv/parser.hpp"
#include "support.hpp"

using namespace cbpv;

namespace {

std::vector<std::string> texts(const std::vector<Token>& toks) {
  std::vector<std::string> out;
  for (const auto& t : toks) out.push_back(t.text);
  return out;
}

template <class F>
Span error_span(F f, std::string* code = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (code) *code = e.code();
    return e.span();
  }
  return {-1, -1};
}

}  // namespace

TEST_CASE("tokenize") {
  auto toks = tokenize("do x <- ! f .more 3; ret \"a\\nb\" -- trailing");
  CHECK(texts(toks) == std::vector<std::string>{"do", "x", "<-", "!", "f", ".more", "3", ";", "ret", "a\nb",
                                                "<end of input>"});
  CHECK(toks[0].kind == TokenKind::Keyword);
  CHECK(toks[5].kind == TokenKind::Dtor);
  CHECK(toks[6].kind == TokenKind::Int);
  CHECK(toks[6].value == 3);
  CHECK(toks[9].kind == TokenKind::String);
  CHECK(toks[4].span.line == 1);
  CHECK(toks[4].span.column == 11);

  auto ctor = tokenize("Ok(x)\n  A'");
  CHECK(ctor[0].kind == TokenKind::Ctor);
  CHECK(ctor.back().kind == TokenKind::End);
  CHECK(ctor[4].text == "A'");
  CHECK(ctor[4].span.line == 2);
  CHECK(ctor[4].span.column == 3);
}

TEST_CASE("unterminated string is reported at its opening quote") {
  std::string code;
  Span s = error_span([] { tokenize("\"abc"); }, &code);
  CHECK(code == "UnterminatedString");
  CHECK(s.line == 1);
  CHECK(s.column == 1);
}

TEST_CASE("dollar names need the elaborated pragma") {
  CHECK_THROWS_AS(parse_module("def a$1 : Thk (Ret Int) = { ret 1 }"), Error);
  Module m = parse_module(std::string(kElaboratedPragma) + "\ndef a$1 : Thk (Ret Int) = { ret 1 }");
  CHECK(m.elaborated);
  REQUIRE(m.defs.size() == 1);
  CHECK(m.defs[0].name == "a$1");
}

TEST_CASE("parse types") {
  TypePtr t = parse_type("forall (A B: VTy). A -> Thk (Ret B) -> Ret (A * B)");
  REQUIRE(t->tag == TypeTag::Forall);
  CHECK(t->name == "A");
  REQUIRE(t->a->tag == TypeTag::Forall);
  TypePtr arrow = t->a->a;
  REQUIRE(arrow->tag == TypeTag::Arrow);
  CHECK(arrow->b->tag == TypeTag::Arrow);

  TypePtr sum = parse_type("+{ Ok: Int, Err: String }");
  REQUIRE(sum->tag == TypeTag::Sum);
  CHECK(sum->fields[0].first == "Err");

  TypePtr app = parse_type("ExnDe E A");
  REQUIRE(app->tag == TypeTag::App);
  CHECK(app->a->tag == TypeTag::App);
  CHECK(alpha_eq(app->b, t_var("A")));

  CHECK(kind_eq(parse_kind("VTy -> VTy -> CTy"), k_arrow(k_vty(), k_arrow(k_vty(), k_cty()))));
}

TEST_CASE("parse computations") {
  CompPtr m = parse_computation("do x <- ! f 1; ret x");
  REQUIRE(m->tag == CompTag::Bind);
  CHECK(m->x == "x");
  REQUIRE(m->m0->tag == CompTag::App);
  CHECK(m->m0->m->tag == CompTag::Force);

  CompPtr d = parse_computation("unroll (! x) .done .some 3");
  REQUIRE(d->tag == CompTag::App);
  REQUIRE(d->m->tag == CompTag::Dtor);
  CHECK(d->m->x == "some");
  CHECK(d->m->m->tag == CompTag::Dtor);
  CHECK(d->m->m->m->tag == CompTag::Unroll);

  CompPtr c = parse_computation("comatch | .a -> ret 1 | .b -> ret 2 end");
  REQUIRE(c->tag == CompTag::Comatch);
  CHECK(c->arms.size() == 2);

  CompPtr t = parse_computation("! f @(Int) @(Thk (Ret Unit))");
  REQUIRE(t->tag == CompTag::TyApp);
  CHECK(t->type->tag == TypeTag::Thk);

  ValuePtr v = parse_value("Ok((1, \"s\"))");
  REQUIRE(v->tag == ValueTag::Inj);
  CHECK(v->a->tag == ValueTag::Pair);
}

TEST_CASE("syntax errors carry a span") {
  std::string code;
  Span s = error_span([] { parse_computation("do x <- ret 1 ret x"); }, &code);
  CHECK(code == "SyntaxError");
  CHECK(s.line == 1);
  CHECK(s.column == 15);

  s = error_span([] { parse_module("def f : Int =\n  1\ndef g Int = 2"); }, &code);
  CHECK(s.line == 3);
  CHECK(s.column == 7);
}

TEST_CASE("printing round-trips every prelude file") {
  for (const auto& path : oracle::prelude_files()) {
    INFO(path);
    Module m = parse_module(oracle::read_text(path));
    std::string printed = print(m);
    Module again = parse_module(printed);
    CHECK(alpha_eq(m, again));
    CHECK(print(again) == printed);
    REQUIRE(m.defs.size() == again.defs.size());
    for (std::size_t i = 0; i < m.defs.size(); ++i) {
      CHECK(oracle::alpha(m.defs[i].type, again.defs[i].type));
      CHECK(oracle::alpha(m.defs[i].value, again.defs[i].value));
    }
  }
}

TEST_CASE("printing round-trips sample programs") {
  for (const auto& e : std::filesystem::directory_iterator(oracle::source_dir() + "/programs")) {
    INFO(e.path().string());
    Module m = parse_module(oracle::read_text(e.path().string()));
    CHECK(alpha_eq(m, parse_module(print(m))));
  }
}

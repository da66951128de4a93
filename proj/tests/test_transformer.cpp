#include "doctest.h"

#include "cbpv/error.hpp"
#include "cbpv/parser.hpp"
#include "cbpv/transformer.hpp"
#include "support.hpp"

using namespace cbpv;

namespace {

TypePtr hand(const Session& s, const std::string& text) { return normalize(s.type(text)); }

std::string derive_error(const std::string& def) {
  Session s = oracle::prelude();
  try {
    derive_transformer(s, def);
  } catch (const Error& e) {
    return e.code();
  }
  return "ok";
}

// Two ticks of a counter, summed: from state 10 the ticks read 10 and 11.
const char* kTwoTicks =
    "let t = { ! %T% @(String) @(State Int) { ! mstate @(Int) } } in\n"
    "let tick = { ! t .lift @(Int) { fn s -> do s2 <- ! add s 1; ret (s, s2) } } in\n"
    "(! t .monad .bind @(Int) @(Int) tick { fn x ->\n"
    "  ! t .monad .bind @(Int) @(Int) tick { fn y ->\n"
    "    do z <- ! add x y; ! t .monad .return @(Int) z } }) 10";

// A tick, then a raised error that skips the second tick.
const char* kTickThenFail =
    "let t = { ! %T% @(String) @(State Int) { ! mstate @(Int) } } in\n"
    "let tick = { ! t .lift @(Int) { fn s -> do s2 <- ! add s 1; ret (s, s2) } } in\n"
    "(! t .monad .bind @(Int) @(Int) tick { fn x ->\n"
    "  ! t .monad .bind @(Int) @(Int) { fn s -> ret (Err(\"boom\"), s) } { fn y ->\n"
    "    ! t .monad .bind @(Int) @(Int) tick { fn z -> ! t .monad .return @(Int) z } } }) 10";

std::string with(const char* templ, const std::string& name) {
  std::string out = templ;
  auto at = out.find("%T%");
  out.replace(at, 3, name);
  return out;
}

}  // namespace

TEST_CASE("deriving from mexn") {
  Session s = oracle::prelude();
  DerivedTransformer d = derive_transformer(s, "mexn");
  CHECK(d.name == "motrans_mexn");
  CHECK(oracle::alpha(d.monad, hand(s, "fn (E A: VTy) -> Ret (+{ Err: E, Ok: A })")));
  CHECK(oracle::alpha(d.functor, hand(s, "fn (T: VTy -> CTy) (E A: VTy) -> T (+{ Err: E, Ok: A })")));
  // The hand-written transformer in the prelude has the type the derivation
  // must produce.
  CHECK(type_equal(d.type, s.find("motrans_exn")->type));
  CHECK(type_equal(d.type, hand(s, "Thk (forall (E: VTy). RelMonadTrans (fn (T: VTy -> CTy) (A: VTy) -> "
                                   "T (+{ Err: E, Ok: A })))")));
  REQUIRE(s.find("motrans_mexn"));
  CHECK_NOTHROW(Checker(&s).check_value({}, {}, s.find("motrans_mexn")->elaborated, d.type));
}

TEST_CASE("deriving from mstate") {
  Session s = oracle::prelude();
  DerivedTransformer d = derive_transformer(s, "mstate");
  CHECK(oracle::alpha(d.functor, hand(s, "fn (T: VTy -> CTy) (S A: VTy) -> S -> T (A * S)")));
  CHECK(type_equal(d.type, hand(s, "Thk (forall (S: VTy). RelMonadTrans (fn (T: VTy -> CTy) (A: VTy) -> "
                                   "S -> T (A * S)))")));
}

TEST_CASE("deriving from mexnk adds an algebra to the result quantifier") {
  Session s = oracle::prelude();
  DerivedTransformer d = derive_transformer(s, "mexnk");
  CHECK(oracle::alpha(d.functor, hand(s, "fn (T: VTy -> CTy) (E A: VTy) -> forall (R: CTy). "
                                         "Thk (Algebra T R) -> Thk (E -> R) -> Thk (A -> R) -> R")));
}

TEST_CASE("deriving from a monad without parameters") {
  Session s = oracle::prelude();
  DerivedTransformer d = derive_transformer(s, "mpolykont");
  CHECK(oracle::alpha(d.functor, hand(s, "fn (T: VTy -> CTy) (A: VTy) -> forall (R: CTy). "
                                         "Thk (Algebra T R) -> Thk (A -> R) -> R")));
}

TEST_CASE("derivation errors") {
  CHECK(derive_error("poly") == "InputNotMonadType");
  CHECK(derive_error("alg_ret") == "InputNotMonadType");
  // A computation-kinded parameter has no trivial structure to fill in.
  CHECK(derive_error("mkont") == "InputNotMonadType");
  CHECK(derive_error("no_such_monad") == "UnknownDefinition");
}

TEST_CASE("exceptions over state: derived and hand-written transformers agree") {
  Session s = oracle::prelude();
  derive_transformer(s, "mexn");
  for (const char* name : {"motrans_mexn", "motrans_exn"}) {
    INFO(name);
    Outcome ok = oracle::run_text(s, with(kTwoTicks, name));
    REQUIRE(ok.terminated());
    CHECK(oracle::alpha(ok.value, parse_value("(Ok(21), 12)")));
    Outcome err = oracle::run_text(s, with(kTickThenFail, name));
    REQUIRE(err.terminated());
    CHECK(oracle::alpha(err.value, parse_value("(Err(\"boom\"), 11)")));
  }
}

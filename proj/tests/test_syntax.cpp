#include "doctest.h"

#include "cbpv/parser.hpp"
#include "cbpv/syntax.hpp"
#include "support.hpp"

using namespace cbpv;

namespace {

std::set<std::string> as_set(const NameSet& s) { return {s.begin(), s.end()}; }

// Random computations over term variables x, y, z.
class CompGen {
 public:
  explicit CompGen(std::uint64_t seed) : rng_(seed) {}

  ValuePtr value(int depth) {
    switch (pick(depth <= 0 ? 2 : 4)) {
      case 0: return v_var(name());
      case 1: return v_int(static_cast<std::int64_t>(rng_() % 10));
      case 2: return v_unit();
      case 3: return v_pair(value(depth - 1), value(depth - 1));
      default: return v_thunk(comp(depth - 1));
    }
  }

  CompPtr comp(int depth) {
    if (depth <= 0) return pick(1) ? c_return(value(0)) : c_force(v_var(name()));
    switch (pick(6)) {
      case 0: return c_return(value(depth - 1));
      case 1: return c_lam(name(), nullptr, comp(depth - 1));
      case 2: return c_app(comp(depth - 1), value(depth - 1));
      case 3: return c_bind(name(), comp(depth - 1), comp(depth - 1));
      case 4: return c_let(name(), value(depth - 1), comp(depth - 1));
      case 5: return c_letpair(name(), name(), value(depth - 1), comp(depth - 1));
      default: return c_comatch({{"a", "", comp(depth - 1)}, {"b", "", comp(depth - 1)}});
    }
  }

 private:
  std::mt19937_64 rng_;
  int pick(int hi) { return std::uniform_int_distribution<int>(0, hi)(rng_); }
  std::string name() {
    static const char* names[] = {"x", "y", "z"};
    return names[rng_() % 3];
  }
};

}  // namespace

TEST_CASE("type substitution replaces free occurrences only") {
  TypePtr t = parse_type("X -> (forall (X: VTy). X -> Ret Y)");
  TypePtr got = subst_type(t, parse_type("Int"), "X");
  CHECK(oracle::alpha(got, parse_type("Int -> (forall (X: VTy). X -> Ret Y)")));
}

TEST_CASE("type substitution avoids capture") {
  TypePtr t = parse_type("forall (Y: VTy). X -> Ret Y");
  TypePtr got = subst_type(t, parse_type("Y"), "X");
  CHECK(oracle::alpha(got, parse_type("forall (Z: VTy). Y -> Ret Z")));
  CHECK(oracle::free_type_vars(got) == std::set<std::string>{"Y"});
}

TEST_CASE("term substitution avoids capture") {
  CompPtr m = parse_computation("fn y -> do z <- ! x; ret (y, z)");
  CompPtr got = subst_comp(m, v_var("y"), "x");
  CHECK(oracle::alpha(got, parse_computation("fn w -> do z <- ! y; ret (w, z)")));
  CHECK(oracle::free_term_vars(got) == std::set<std::string>{"y"});
}

TEST_CASE("alpha equivalence examples") {
  CHECK(alpha_eq(parse_type("forall (A: VTy). A -> Ret A"), parse_type("forall (B: VTy). B -> Ret B")));
  CHECK_FALSE(alpha_eq(parse_type("forall (A: VTy). A -> Ret B"), parse_type("forall (B: VTy). B -> Ret B")));
  CHECK(alpha_eq(parse_computation("fn x -> fn y -> ! x"), parse_computation("fn a -> fn b -> ! a")));
  CHECK_FALSE(alpha_eq(parse_computation("fn x -> fn y -> ! x"), parse_computation("fn a -> fn b -> ! b")));
  CHECK(alpha_eq(parse_type("&{ .a : Ret Int, .b : Ret Unit }"), parse_type("&{ .b : Ret Unit, .a : Ret Int }")));
}

TEST_CASE("normalization reduces type applications") {
  TypePtr t = parse_type("(fn (X: VTy) -> Thk (Ret X)) Int");
  CHECK(oracle::alpha(normalize(t), parse_type("Thk (Ret Int)")));
  CHECK(type_equal(t, parse_type("Thk (Ret Int)")));
}

TEST_CASE("free variable caches agree with traversal") {
  oracle::TypeGen types(7);
  CompGen comps(11);
  for (int i = 0; i < 300; ++i) {
    TypePtr t = types.gen(4);
    CHECK(as_set(t->ftv) == oracle::free_type_vars(t));
    CompPtr m = comps.comp(4);
    CHECK(as_set(m->fv) == oracle::free_term_vars(m));
  }
}

TEST_CASE("substitution properties on random types") {
  oracle::TypeGen gen(42);
  for (int i = 0; i < 300; ++i) {
    TypePtr t = gen.gen(4);
    TypePtr repl = gen.gen(2);
    std::string x = gen.var();
    TypePtr got = subst_type(t, repl, x);
    auto before = oracle::free_type_vars(t);
    auto expected = before;
    if (expected.erase(x)) {
      auto r = oracle::free_type_vars(repl);
      expected.insert(r.begin(), r.end());
    }
    CHECK(oracle::free_type_vars(got) == expected);

    // Substituting for a variable that does not occur free is the identity.
    if (!before.count(x)) CHECK(oracle::alpha(got, t));

    // Alpha-equivalent inputs give alpha-equivalent outputs.
    TypePtr renamed = t;
    if (t->tag == TypeTag::Forall) {
      std::string fresh = fresh_name("R", set_union(t->ftv, repl->ftv));
      TypePtr body = subst_type(t->a, t_var(fresh), t->name);
      renamed = t_forall(fresh, t->kind, body);
    }
    CHECK(alpha_eq(t, renamed));
    CHECK(oracle::alpha(t, renamed));
    CHECK(oracle::alpha(subst_type(renamed, repl, x), got));
  }
}

TEST_CASE("alpha_eq agrees with the de Bruijn oracle") {
  oracle::TypeGen gen(3);
  for (int i = 0; i < 500; ++i) {
    TypePtr a = gen.gen(3), b = gen.gen(3);
    CHECK(alpha_eq(a, b) == oracle::alpha(a, b));
    CHECK(alpha_eq(a, a));
  }
  CompGen comps(5);
  for (int i = 0; i < 500; ++i) {
    CompPtr a = comps.comp(3), b = comps.comp(3);
    CHECK(alpha_eq(a, b) == oracle::alpha(a, b));
  }
}

TEST_CASE("closed substitution is the identity") {
  CompGen comps(9);
  for (int i = 0; i < 200; ++i) {
    CompPtr m = comps.comp(4);
    if (!m->fv.empty()) continue;
    CHECK(oracle::alpha(subst_comp(m, v_int(1), "x"), m));
  }
}

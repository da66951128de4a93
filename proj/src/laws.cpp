#include "cbpv/laws.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>

#include "cbpv/elaborate.hpp"
#include "cbpv/error.hpp"
#include "cbpv/parser.hpp"

namespace cbpv {

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

// Observation contexts and effect templates. In templates %N% is an Int
// expression, %MON% the instance, %T% the type T Int and %C% the
// computation being observed.
struct MonadSpec {
  std::string name;
  std::string mon;
  std::string t_int;
  std::string close;
  std::vector<std::string> effects;
  std::vector<std::string> probes;  // extra t templates that inspect the stack
  std::vector<std::string> expected_failures;
};

const std::vector<MonadSpec>& specs() {
  static const std::vector<MonadSpec> all = {
      {"mret", "mret", "Ret Int", "%C%", {"do y <- ! times %N% 3; ret y", "do y <- ! sub 100 %N%; ret y"}, {}, {}},
      {"mexn",
       "mexn @(String)",
       "Exn String Int",
       "%C%",
       {"ret Err(\"boom\")", "do y <- ! add %N% 1; ret Ok(y)"},
       {},
       {}},
      {"mexnk",
       "mexnk @(String)",
       "ExnK String Int",
       "%C% @(Ret (+{ Err: String, Ok: Int })) { fn e -> ret Err(e) } { fn a -> ret Ok(a) }",
       {"tyfn R -> fn ke ka -> ! ke \"boom\"", "tyfn R -> fn ke ka -> do y <- ! add %N% 1; ! ka y"},
       {},
       {}},
      {"mexnde",
       "mexnde @(String)",
       "ExnDe String Int",
       "unroll %C% .done",
       {"! fail_de @(String) @(Int) \"boom\"", "do y <- ! add %N% 1; ! mexnde @(String) .return @(Int) y"},
       {"! count_kont @(String) @(Int) %N% { ! mexnde @(String) .return @(Int) }"},
       {"right-unit", "associativity"}},
      {"mkont",
       "mkont @(Ret Int)",
       "Kont (Ret Int) Int",
       "%C% { fn a -> ret a }",
       {"fn k -> ret %N%", "fn k -> do y <- ! k %N%; ! k y"},
       {},
       {}},
      {"mpolykont",
       "mpolykont",
       "PolyKont Int",
       "%C% @(Ret Int) { fn a -> ret a }",
       {"tyfn R -> fn k -> do y <- ! add %N% 2; ! k y"},
       {},
       {}},
      {"mstate",
       "mstate @(Int)",
       "State Int Int",
       "%C% 7",
       {"fn s -> do y <- ! add s %N%; ret (y, s)", "fn s -> do s' <- ! times s %N%; ret (%N%, s')"},
       {},
       {}},
      {"mstatekont",
       "mstatekont @(Int)",
       "StateK Int Int",
       "%C% @(Ret (Int * Int)) { fn a s -> ret (a, s) } 7",
       {"tyfn R -> fn k s -> do y <- ! add s %N%; ! k y s", "tyfn R -> fn k s -> do s' <- ! times s %N%; ! k %N% s'"},
       {},
       {}},
      {"mfree",
       "mfree",
       "PrintFlip Int",
       "%C% @(String -> Ret (String * Int)) { fn s k acc -> do acc' <- ! str_append acc s; ! k () acc' } "
       "{ fn u k acc -> do b <- ! str_eq acc \"\"; ! k b acc } { fn a acc -> ret (acc, a) } \"\"",
       {"! mfree .bind @(Unit) @(Int) { ! print \"p\" } { fn u -> ! mfree .return @(Int) %N% }",
        "! mfree .bind @(Bool) @(Int) { ! flip () } { fn b -> ! if @(PrintFlip Int) b "
        "{ ! mfree .return @(Int) %N% } { ! mfree .bind @(Unit) @(Int) { ! print \"t\" } { fn u -> ! mfree .return @(Int) 0 } } }"},
       {},
       {}},
  };
  return all;
}

const MonadSpec& spec(const std::string& name) {
  for (const auto& s : specs())
    if (s.name == name) return s;
  throw std::invalid_argument("no observation context for monad " + name);
}

std::string fill(std::string text, const MonadSpec& s) {
  text = replace_all(text, "%MON%", s.mon);
  return replace_all(text, "%T%", s.t_int);
}

// Bind closed template values to annotated parameters so both sides
// synthesize.
struct Binding {
  std::string name;
  std::string type;
  std::string value;
};

std::string with_bindings(const std::string& body, const std::vector<Binding>& bindings) {
  std::string out = body;
  for (auto it = bindings.rbegin(); it != bindings.rend(); ++it)
    out = "(fn (" + it->name + ": " + it->type + ") -> " + out + ") " + it->value;
  return out;
}

struct Constants {
  std::int64_t a;
  std::int64_t k;
};

Constants constants(std::uint64_t seed, std::size_t index) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + index);
  Constants c;
  c.a = static_cast<std::int64_t>(rng() % 41);
  c.k = static_cast<std::int64_t>(rng() % 9 + 1);
  return c;
}

std::string instantiate(std::string text, const Constants& c) {
  text = replace_all(text, "%A%", std::to_string(c.a));
  return replace_all(text, "%K%", std::to_string(c.k));
}

struct Pools {
  std::vector<std::string> t;  // values of type Thk (T Int)
  std::vector<std::string> f;  // values of type Thk (Int -> T Int)
};

Pools monad_pools(const MonadSpec& s) {
  Pools p;
  p.t.push_back("{ ! %MON% .return @(Int) %A% }");
  for (const auto& e : s.effects) p.t.push_back("{ " + replace_all(e, "%N%", "%A%") + " }");
  p.t.push_back("{ ! %MON% .bind @(Int) @(Int) { " + replace_all(s.effects.front(), "%N%", "%A%") +
                " } { fn y -> ! %MON% .return @(Int) y } }");
  for (const auto& e : s.probes) p.t.push_back("{ " + replace_all(e, "%N%", "%A%") + " }");
  p.f.push_back("{ fn x -> do y <- ! add x %K%; ! %MON% .return @(Int) y }");
  for (const auto& e : s.effects) p.f.push_back("{ fn x -> " + replace_all(e, "%N%", "x") + " }");
  p.f.push_back("{ fn x -> do z <- ! mod x 2; do b <- ! int_eq z 0; ! if @(%T%) b { " +
                replace_all(s.effects.front(), "%N%", "x") + " } { ! %MON% .return @(Int) x } }");
  for (auto& t : p.t) t = fill(t, s);
  for (auto& f : p.f) f = fill(f, s);
  return p;
}

struct Choice {
  std::string t, t2, f, g;
  bool delayed;
};

Choice choose(const Pools& p, std::size_t index, const std::vector<std::string>& g_pool) {
  std::size_t nt = p.t.size(), nf = p.f.size();
  Choice c;
  c.t = p.t[index % nt];
  c.t2 = p.t[(index + 1) % nt];
  c.f = p.f[(index / nt) % nf];
  c.g = g_pool[(index + index / nt + 1) % g_pool.size()];
  c.delayed = index % 2 == 1;
  return c;
}

std::string double_thunk(const std::string& t, bool delayed) {
  return delayed ? "{ do u <- ! add %K% 1; ret " + t + " }" : "{ ret " + t + " }";
}

LawSample monad_sample(const MonadSpec& s, const std::string& law, std::uint64_t seed, std::size_t index) {
  Pools pools = monad_pools(s);
  Choice c = choose(pools, index, pools.f);
  std::string tt = "Thk (" + s.t_int + ")";
  std::string ft = "Thk (Int -> " + s.t_int + ")";
  std::string bind = "! " + s.mon + " .bind @(Int) @(Int) ";
  std::string ret = "! " + s.mon + " .return @(Int)";
  std::vector<Binding> bs;
  LawSample out;
  if (law == "left-unit") {
    bs = {{"f", ft, c.f}};
    out.lhs = bind + "{ " + ret + " %A% } f";
    out.rhs = "! f %A%";
  } else if (law == "right-unit") {
    bs = {{"t", tt, c.t}};
    out.lhs = bind + "t { " + ret + " }";
    out.rhs = "! t";
  } else if (law == "associativity") {
    bs = {{"t", tt, c.t}, {"f", ft, c.f}, {"g", ft, c.g}};
    out.lhs = bind + "{ " + bind + "t f } g";
    out.rhs = bind + "t { fn x -> " + bind + "{ ! f x } g }";
  } else if (law == "linearity") {
    bs = {{"tt", "Thk (Ret (" + tt + "))", fill(double_thunk(c.t, c.delayed), s)}, {"f", ft, c.f}};
    out.lhs = "(do t <- ! tt; " + bind + "t) f";
    out.rhs = bind + "{ do t <- ! tt; ! t } f";
  } else {
    throw std::invalid_argument("unknown monad law " + law);
  }
  Constants k = constants(seed, index);
  auto close = [&](const std::string& side) {
    return instantiate(replace_all(s.close, "%C%", "(" + with_bindings(side, bs) + ")"), k);
  };
  out.lhs = close(out.lhs);
  out.rhs = close(out.rhs);
  return out;
}

// Algebra carriers: continuations g : Thk (Int -> carrier B) and an
// observation of carrier B, with %B% the printed carrier.
struct CarrierSpec {
  std::string source;
  std::vector<std::string> conts;
  std::string observe;
};

const std::vector<CarrierSpec>& carrier_specs() {
  static const std::vector<CarrierSpec> all = {
      {"Ret Int",
       {"{ fn x -> ret Ok(x) }", "{ fn x -> do y <- ! add x %K%; ret Ok(y) }", "{ fn x -> ret Err(\"g\") }"},
       "%C%"},
      {"Int -> Ret Int",
       {"{ fn x y -> do z <- ! add x y; ret Ok(z) }", "{ fn x y -> ret Err(\"g\") }",
        "{ fn x y -> do z <- ! times x %K%; ret Ok(z) }"},
       "%C% 5"},
      {"&{ .a: Ret Int, .b: Int -> Ret Int }",
       {"{ fn x -> comatch | .a -> ret Ok(x) | .b -> fn y -> do z <- ! sub x y; ret Ok(z) end }",
        "{ fn x -> comatch | .a -> ret Err(\"g\") | .b -> fn y -> do z <- ! add y %K%; ret Ok(z) end }"},
       "do r1 <- %C% .a; do r2 <- %C% .b 3; ret (r1, r2)"},
      {"forall (A: VTy). A -> Ret A",
       {"{ fn x -> tyfn A -> fn s y -> ret Ok(y) }",
        "{ fn x -> tyfn A -> fn s y -> do b <- ! int_eq x 0; ! if @(Ret (+{ Err: String, Ok: A })) b "
        "{ ret Err(\"zero\") } { ret Ok(y) } }"},
       "%C% @(Int) triv 4"},
      {"rec (Y: CTy). &{ .k: Int -> Y, .done: Ret Int }",
       {"{ fn x -> (fix (loop: Thk (Int -> %B%)) -> fn acc -> roll comatch | .k -> fn i -> do j <- ! add acc i; "
        "! loop j | .done -> ret Ok(acc) end) x }",
        "{ fn x -> (fix (loop: Thk (Int -> %B%)) -> fn acc -> roll comatch | .k -> fn i -> ! loop i "
        "| .done -> ret Err(\"g\") end) x }"},
       "unroll (unroll %C% .k 2) .done"},
  };
  return all;
}

const CarrierSpec& carrier_spec(const std::string& source) {
  for (const auto& c : carrier_specs())
    if (c.source == source) return c;
  throw std::invalid_argument("no observation context for carrier " + source);
}

LawSample algebra_sample(const CarrierSpec& cs, const std::string& carrier_text, const std::string& law,
                         std::uint64_t seed, std::size_t index) {
  const MonadSpec& exn = spec("mexn");
  Pools pools = monad_pools(exn);
  std::vector<std::string> g_pool;
  for (const auto& g : cs.conts) g_pool.push_back(replace_all(g, "%B%", carrier_text));
  Choice c = choose(pools, index, g_pool);
  std::string tt = "Thk (" + exn.t_int + ")";
  std::string ft = "Thk (Int -> " + exn.t_int + ")";
  std::string gt = "Thk (Int -> " + carrier_text + ")";
  std::string alg = "! law_alg @(Int) ";
  std::vector<Binding> bs;
  LawSample out;
  if (law == "left-unit") {
    bs = {{"g", gt, c.g}};
    out.lhs = alg + "{ ! mexn @(String) .return @(Int) %A% } g";
    out.rhs = "! g %A%";
  } else if (law == "associativity") {
    bs = {{"t", tt, c.t}, {"f", ft, c.f}, {"g", gt, c.g}};
    out.lhs = alg + "{ ! mexn @(String) .bind @(Int) @(Int) t f } g";
    out.rhs = alg + "t { fn x -> " + alg + "{ ! f x } g }";
  } else if (law == "linearity") {
    bs = {{"tt", "Thk (Ret (" + tt + "))", double_thunk(c.t, c.delayed)}, {"g", gt, c.g}};
    out.lhs = "(do t <- ! tt; " + alg + "t) g";
    out.rhs = alg + "{ do t <- ! tt; ! t } g";
  } else {
    throw std::invalid_argument("unknown algebra law " + law);
  }
  Constants k = constants(seed, index);
  auto close = [&](const std::string& side) {
    return instantiate(replace_all(cs.observe, "%C%", "(" + with_bindings(side, bs) + ")"), k);
  };
  out.lhs = close(out.lhs);
  out.rhs = close(out.rhs);
  return out;
}

Outcome evaluate_or_error(Session& s, const std::string& text, std::uint64_t fuel) {
  try {
    return evaluate(s, text, fuel);
  } catch (const Error& e) {
    Outcome o;
    o.tag = OutcomeTag::Stuck;
    o.reason = std::string("rejected: ") + e.what();
    return o;
  }
}

LawReport run_law(Session& s, const std::string& law, const std::string& subject, bool expected_failure,
                  const LawOptions& options, const std::function<LawSample(std::size_t)>& sample) {
  LawReport r;
  r.law = law;
  r.subject = subject;
  r.samples = options.samples;
  r.expected_failure = expected_failure;
  for (std::size_t i = 0; i < options.samples; ++i) {
    LawSample ls = sample(i);
    Outcome lhs = evaluate_or_error(s, ls.lhs, options.fuel);
    Outcome rhs = evaluate_or_error(s, ls.rhs, options.fuel);
    if (!same_observation(lhs, rhs)) r.failures.push_back({i, ls.lhs, ls.rhs, std::move(lhs), std::move(rhs)});
  }
  return r;
}

}  // namespace

const std::vector<std::string>& law_monads() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& s : specs()) out.push_back(s.name);
    return out;
  }();
  return names;
}

const std::vector<std::string>& monad_laws() {
  static const std::vector<std::string> laws = {"left-unit", "right-unit", "associativity", "linearity"};
  return laws;
}

const std::vector<std::string>& algebra_laws() {
  static const std::vector<std::string> laws = {"left-unit", "associativity", "linearity"};
  return laws;
}

const std::vector<std::string>& algebra_carriers() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& c : carrier_specs()) out.push_back(c.source);
    return out;
  }();
  return names;
}

Outcome evaluate(Session& session, const std::string& text, std::uint64_t fuel, std::uint64_t seed) {
  Session::Prepared p = session.prepare(text);
  RunOptions ro;
  ro.fuel = fuel;
  ro.seed = seed;
  ro.os_entry = p.type->tag == TypeTag::Prim && p.type->prim == PrimType::OS;
  return run(p.elaborated, ro, [&session](const std::string& name) { return session.runtime_value(name); });
}

LawSample monad_law_sample(const Session&, const std::string& monad, const std::string& law, std::uint64_t seed,
                           std::size_t index) {
  return monad_sample(spec(monad), law, seed, index);
}

std::pair<Outcome, Outcome> replay_monad_law(const Session& prelude, const std::string& monad, const std::string& law,
                                             std::uint64_t seed, std::size_t index, std::uint64_t fuel) {
  Session s = prelude;
  LawSample ls = monad_sample(spec(monad), law, seed, index);
  return {evaluate_or_error(s, ls.lhs, fuel), evaluate_or_error(s, ls.rhs, fuel)};
}

std::vector<LawReport> check_monad_laws(const Session& prelude, const std::string& monad, const LawOptions& options) {
  const MonadSpec& ms = spec(monad);
  Session s = prelude;
  std::vector<LawReport> out;
  for (const auto& law : monad_laws()) {
    bool expected = std::find(ms.expected_failures.begin(), ms.expected_failures.end(), law) !=
                    ms.expected_failures.end();
    out.push_back(run_law(s, law, monad, expected, options,
                          [&](std::size_t i) { return monad_sample(ms, law, options.seed, i); }));
  }
  return out;
}

std::vector<LawReport> check_algebra_laws(const Session& prelude, const std::string& carrier_type,
                                          const std::string& algebra, const LawOptions& options) {
  const CarrierSpec& cs = carrier_spec(carrier_type);
  Session s = prelude;
  TypePtr b = s.type(carrier_type);
  ElabContext ctx = ElabContext::make(set_union(type_names(b), NameSet{"mexn"}));
  TypePtr exn = s.type("Exn String");
  TypePtr carrier_b = normalize(subst_type(carrier(b, ctx.monad), exn, ctx.monad));
  TypePtr alg_type = normalize(algebra_type(exn, carrier_b));
  if (algebra.empty()) {
    CompPtr str = structure(b, ctx);
    str = subst_type_comp(str, exn, ctx.monad);
    str = subst_comp(str, v_thunk(parse_computation("! mexn @(String)")), ctx.instance);
    s.define("law_alg", t_thk(alg_type), v_thunk(str), "<law harness>");
  } else {
    s.define("law_alg", t_thk(alg_type), v_thunk(parse_computation(algebra)), "<law harness>");
  }
  std::string carrier_text = print(carrier_b);
  std::vector<LawReport> out;
  for (const auto& law : algebra_laws())
    out.push_back(run_law(s, law, carrier_type, false, options, [&](std::size_t i) {
      return algebra_sample(cs, carrier_text, law, options.seed, i);
    }));
  return out;
}

std::pair<Outcome, Outcome> reproduce_counterexample(const Session& prelude) {
  Session s = prelude;
  return {evaluate(s, "! bench impl_id"), evaluate(s, "! bench impl_right_unit")};
}

}  // namespace cbpv

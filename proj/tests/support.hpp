#pragma once

// Independent oracles shared by the test binaries. Nothing here calls the
// library's own equality, free-variable or evaluation code.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cbpv/machine.hpp"
#include "cbpv/parser.hpp"
#include "cbpv/session.hpp"

namespace oracle {

using namespace cbpv;

inline std::string source_dir() { return CBPV_SOURCE_DIR; }
inline std::string prelude_dir() { return source_dir() + "/prelude"; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> prelude_files() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(prelude_dir()))
    if (e.path().extension() == ".cbpv") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

// A loaded prelude, shared read-only; tests copy it before mutating.
inline const Session& prelude() {
  static const Session s = [] {
    Session x;
    x.load_prelude(prelude_dir());
    return x;
  }();
  return s;
}

// De Bruijn rendering. Bound variables print as their binder distance,
// free ones by name, so two terms are alpha-equivalent iff the renderings
// agree.
class DeBruijn {
 public:
  std::string kind(const KindPtr& k) {
    switch (k->tag) {
      case Kind::Tag::VTy: return "V";
      case Kind::Tag::CTy: return "C";
      case Kind::Tag::Arrow: return "(" + kind(k->dom) + ">" + kind(k->cod) + ")";
    }
    return "?";
  }

  std::string type(const TypePtr& t) {
    if (!t) return "_";
    switch (t->tag) {
      case TypeTag::Var: return var(types_, t->name);
      case TypeTag::Lam: return binder("lam", t, types_);
      case TypeTag::Exists: return binder("ex", t, types_);
      case TypeTag::Forall: return binder("all", t, types_);
      case TypeTag::Nu: return binder("nu", t, types_);
      case TypeTag::App: return "(" + type(t->a) + " " + type(t->b) + ")";
      case TypeTag::Thk: return "Thk(" + type(t->a) + ")";
      case TypeTag::Ret: return "Ret(" + type(t->a) + ")";
      case TypeTag::Unit: return "Unit";
      case TypeTag::Prod: return "(" + type(t->a) + "*" + type(t->b) + ")";
      case TypeTag::Arrow: return "(" + type(t->a) + "->" + type(t->b) + ")";
      case TypeTag::Sum: return fields("+", t->fields);
      case TypeTag::With: return fields("&", t->fields);
      case TypeTag::Prim: return "Prim" + std::to_string(static_cast<int>(t->prim));
    }
    return "?";
  }

  std::string value(const ValuePtr& v) {
    switch (v->tag) {
      case ValueTag::Var: return var(terms_, v->name);
      case ValueTag::Thunk: return "{" + comp(v->comp) + "}";
      case ValueTag::Unit: return "()";
      case ValueTag::Pair: return "(" + value(v->a) + "," + value(v->b) + ")";
      case ValueTag::Inj: return v->name + "(" + value(v->a) + ")";
      case ValueTag::Pack: return "pack(" + type(v->type) + "," + value(v->a) + ")";
      case ValueTag::Int: return "i" + std::to_string(v->num);
      case ValueTag::String: return "s\"" + v->name + "\"";
      case ValueTag::Bool: return v->flag ? "true" : "false";
      case ValueTag::Prim: return "prim:" + v->name;
    }
    return "?";
  }

  std::string comp(const CompPtr& m) {
    switch (m->tag) {
      case CompTag::Force: return "!" + value(m->val);
      case CompTag::Let: {
        std::string v = value(m->val);
        return "let " + v + " in " + under(terms_, {m->x}, [&] { return comp(m->m); });
      }
      case CompTag::LetPair: {
        std::string v = value(m->val);
        return "letp " + v + " in " + under(terms_, {m->x, m->y}, [&] { return comp(m->m); });
      }
      case CompTag::Match: {
        std::string out = "match " + value(m->val);
        auto arms = m->arms;
        std::sort(arms.begin(), arms.end(), [](const Arm& a, const Arm& b) { return a.tag < b.tag; });
        for (const auto& a : arms) out += " |" + a.tag + "." + under(terms_, {a.binder}, [&] { return comp(a.body); });
        return out;
      }
      case CompTag::Unpack: {
        std::string v = value(m->val);
        return "unpack " + v + " in " + under(types_, {m->x}, [&] {
                 return under(terms_, {m->y}, [&] { return comp(m->m); });
               });
      }
      case CompTag::Return: return "ret " + value(m->val);
      case CompTag::Bind: {
        std::string head = comp(m->m0);
        return "do " + head + "; " + under(terms_, {m->x}, [&] { return comp(m->m); });
      }
      case CompTag::Lam: {
        std::string ann = type(m->type);
        return "fn:" + ann + "." + under(terms_, {m->x}, [&] { return comp(m->m); });
      }
      case CompTag::App: return "(" + comp(m->m) + " " + value(m->val) + ")";
      case CompTag::Comatch: {
        std::string out = "comatch";
        auto arms = m->arms;
        std::sort(arms.begin(), arms.end(), [](const Arm& a, const Arm& b) { return a.tag < b.tag; });
        for (const auto& a : arms) out += " |." + a.tag + " " + comp(a.body);
        return out + " end";
      }
      case CompTag::Dtor: return "(" + comp(m->m) + " ." + m->x + ")";
      case CompTag::TyLam: {
        std::string k = m->kind ? kind(m->kind) : "_";
        return "tyfn:" + k + "." + under(types_, {m->x}, [&] { return comp(m->m); });
      }
      case CompTag::TyApp: return "(" + comp(m->m) + " @" + type(m->type) + ")";
      case CompTag::Roll: return "roll(" + comp(m->m) + ")";
      case CompTag::Unroll: return "unroll(" + comp(m->m) + ")";
      case CompTag::Fix: {
        std::string ann = type(m->type);
        return "fix:" + ann + "." + under(terms_, {m->x}, [&] { return comp(m->m); });
      }
      case CompTag::Monadic: return "monadic{" + comp(m->m) + "}";
    }
    return "?";
  }

 private:
  std::vector<std::string> types_;
  std::vector<std::string> terms_;

  static std::string var(const std::vector<std::string>& scope, const std::string& name) {
    for (std::size_t i = scope.size(); i-- > 0;)
      if (scope[i] == name) return "#" + std::to_string(scope.size() - 1 - i);
    return "free:" + name;
  }

  std::string binder(const char* what, const TypePtr& t, std::vector<std::string>& scope) {
    std::string k = t->kind ? kind(t->kind) : "_";
    scope.push_back(t->name);
    std::string body = type(t->a);
    scope.pop_back();
    return std::string(what) + ":" + k + "." + body;
  }

  std::string fields(const char* what, const TypeFields& fs) {
    auto sorted = fs;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out = what;
    out += "{";
    for (const auto& [tag, ty] : sorted) out += tag + ":" + type(ty) + ",";
    return out + "}";
  }

  std::string under(std::vector<std::string>& scope, const std::vector<std::string>& names,
                    const std::function<std::string()>& body) {
    for (const auto& n : names) scope.push_back(n);
    std::string out = body();
    for (std::size_t i = 0; i < names.size(); ++i) scope.pop_back();
    return out;
  }
};

inline bool alpha(const TypePtr& a, const TypePtr& b) { return DeBruijn().type(a) == DeBruijn().type(b); }
inline bool alpha(const CompPtr& a, const CompPtr& b) { return DeBruijn().comp(a) == DeBruijn().comp(b); }
inline bool alpha(const ValuePtr& a, const ValuePtr& b) { return DeBruijn().value(a) == DeBruijn().value(b); }

// Free type variables by direct traversal.
inline void free_type_vars(const TypePtr& t, std::set<std::string> bound, std::set<std::string>& out) {
  if (!t) return;
  switch (t->tag) {
    case TypeTag::Var:
      if (!bound.count(t->name)) out.insert(t->name);
      return;
    case TypeTag::Lam:
    case TypeTag::Exists:
    case TypeTag::Forall:
    case TypeTag::Nu:
      bound.insert(t->name);
      free_type_vars(t->a, bound, out);
      return;
    default:
      free_type_vars(t->a, bound, out);
      free_type_vars(t->b, bound, out);
      for (const auto& f : t->fields) free_type_vars(f.second, bound, out);
  }
}

inline std::set<std::string> free_type_vars(const TypePtr& t) {
  std::set<std::string> out;
  free_type_vars(t, {}, out);
  return out;
}

inline void free_term_vars(const CompPtr& m, std::set<std::string> bound, std::set<std::string>& out);

inline void free_term_vars(const ValuePtr& v, const std::set<std::string>& bound, std::set<std::string>& out) {
  if (!v) return;
  if (v->tag == ValueTag::Var) {
    if (!bound.count(v->name)) out.insert(v->name);
    return;
  }
  if (v->comp) free_term_vars(v->comp, bound, out);
  free_term_vars(v->a, bound, out);
  free_term_vars(v->b, bound, out);
}

inline void free_term_vars(const CompPtr& m, std::set<std::string> bound, std::set<std::string>& out) {
  if (!m) return;
  free_term_vars(m->val, bound, out);
  free_term_vars(m->m0, bound, out);
  switch (m->tag) {
    case CompTag::Match:
      for (const auto& a : m->arms) {
        auto inner = bound;
        inner.insert(a.binder);
        free_term_vars(a.body, inner, out);
      }
      return;
    case CompTag::Let:
    case CompTag::Bind:
    case CompTag::Lam:
    case CompTag::Fix:
      bound.insert(m->x);
      break;
    case CompTag::LetPair:
      bound.insert(m->x);
      bound.insert(m->y);
      break;
    case CompTag::Unpack:
      bound.insert(m->y);
      break;
    default:
      break;
  }
  free_term_vars(m->m, bound, out);
  for (const auto& a : m->arms) free_term_vars(a.body, bound, out);
}

inline std::set<std::string> free_term_vars(const CompPtr& m) {
  std::set<std::string> out;
  free_term_vars(m, {}, out);
  return out;
}

// Random types over a small alphabet, for property tests.
class TypeGen {
 public:
  explicit TypeGen(std::uint64_t seed) : rng_(seed) {}

  TypePtr gen(int depth) {
    static const char* names[] = {"X", "Y", "Z"};
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
    switch (pick(rng_)) {
      case 0: return t_var(names[rng_() % 3]);
      case 1: return t_unit();
      case 2: return t_prim(PrimType::Int);
      case 3: return t_thk(gen(depth - 1));
      case 4: return t_ret(gen(depth - 1));
      case 5: return t_arrow(gen(depth - 1), gen(depth - 1));
      case 6: return t_prod(gen(depth - 1), gen(depth - 1));
      case 7: return t_forall(names[rng_() % 3], k_vty(), gen(depth - 1));
      case 8: return t_exists(names[rng_() % 3], k_vty(), gen(depth - 1));
      default: return t_with({{"a", gen(depth - 1)}, {"b", gen(depth - 1)}});
    }
  }

  const char* var() {
    static const char* names[] = {"X", "Y", "Z"};
    return names[rng_() % 3];
  }

 private:
  std::mt19937_64 rng_;
};

// Reference call-by-value evaluator for the interpreter's object language.
struct Term {
  enum class K { Var, Lam, App, True, False, If } k;
  std::string name;
  std::shared_ptr<Term> a, b, c;
};
using TermPtr = std::shared_ptr<Term>;

inline TermPtr var(std::string x) { return std::make_shared<Term>(Term{Term::K::Var, std::move(x), {}, {}, {}}); }
inline TermPtr lam(std::string x, TermPtr body) {
  return std::make_shared<Term>(Term{Term::K::Lam, std::move(x), std::move(body), {}, {}});
}
inline TermPtr app(TermPtr f, TermPtr a) {
  return std::make_shared<Term>(Term{Term::K::App, {}, std::move(f), std::move(a), {}});
}
inline TermPtr tru() { return std::make_shared<Term>(Term{Term::K::True, {}, {}, {}, {}}); }
inline TermPtr fls() { return std::make_shared<Term>(Term{Term::K::False, {}, {}, {}, {}}); }
inline TermPtr ite(TermPtr c, TermPtr t, TermPtr f) {
  return std::make_shared<Term>(Term{Term::K::If, {}, std::move(c), std::move(t), std::move(f)});
}

struct RefValue;
using RefEnv = std::vector<std::pair<std::string, std::shared_ptr<RefValue>>>;
struct RefValue {
  enum class K { True, False, Closure } k;
  std::string param;
  TermPtr body;
  RefEnv env;
};

// nullopt stands for Err.
inline std::optional<std::shared_ptr<RefValue>> reference_eval(const TermPtr& t, const RefEnv& env) {
  switch (t->k) {
    case Term::K::Var:
      for (auto it = env.rbegin(); it != env.rend(); ++it)
        if (it->first == t->name) return it->second;
      return std::nullopt;
    case Term::K::True: return std::make_shared<RefValue>(RefValue{RefValue::K::True, {}, {}, {}});
    case Term::K::False: return std::make_shared<RefValue>(RefValue{RefValue::K::False, {}, {}, {}});
    case Term::K::Lam: return std::make_shared<RefValue>(RefValue{RefValue::K::Closure, t->name, t->a, env});
    case Term::K::App: {
      auto f = reference_eval(t->a, env);
      if (!f) return std::nullopt;
      auto x = reference_eval(t->b, env);
      if (!x) return std::nullopt;
      if ((*f)->k != RefValue::K::Closure) return std::nullopt;
      RefEnv inner = (*f)->env;
      inner.emplace_back((*f)->param, *x);
      return reference_eval((*f)->body, inner);
    }
    case Term::K::If: {
      auto c = reference_eval(t->a, env);
      if (!c) return std::nullopt;
      if ((*c)->k == RefValue::K::True) return reference_eval(t->b, env);
      if ((*c)->k == RefValue::K::False) return reference_eval(t->c, env);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

inline std::string reference_observation(const TermPtr& t) {
  auto v = reference_eval(t, {});
  if (!v) return "Err";
  switch ((*v)->k) {
    case RefValue::K::True: return "Ok(True)";
    case RefValue::K::False: return "Ok(False)";
    case RefValue::K::Closure: return "Ok(Closure)";
  }
  return "?";
}

// Surface text of an Expr value.
inline std::string encode(const TermPtr& t) {
  auto node = [](const std::string& payload) { return "{ roll ret " + payload + " }"; };
  switch (t->k) {
    case Term::K::Var: return node("Var(\"" + t->name + "\")");
    case Term::K::Lam: return node("Lam((\"" + t->name + "\", " + encode(t->a) + "))");
    case Term::K::App: return node("App((" + encode(t->a) + ", " + encode(t->b) + "))");
    case Term::K::True: return node("True()");
    case Term::K::False: return node("False()");
    case Term::K::If: return node("If((" + encode(t->a) + ", (" + encode(t->b) + ", " + encode(t->c) + ")))");
  }
  return "?";
}

inline Outcome run_text(Session& s, const std::string& text, std::uint64_t fuel = 1000000) {
  Session::Prepared p = s.prepare(text);
  RunOptions ro;
  ro.fuel = fuel;
  ro.os_entry = p.type->tag == TypeTag::Prim && p.type->prim == PrimType::OS;
  return run(p.elaborated, ro, [&s](const std::string& n) { return s.runtime_value(n); });
}

}  // namespace oracle

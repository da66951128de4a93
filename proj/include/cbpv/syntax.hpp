#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cbpv {

struct Span {
  int line = 0;
  int column = 0;
};

// Sorted, duplicate-free.
using NameSet = std::vector<std::string>;

bool contains(const NameSet& set, const std::string& name);
NameSet set_union(const NameSet& a, const NameSet& b);
NameSet set_minus(const NameSet& set, const std::string& name);

// Names produced here carry a `$` and therefore never clash with surface
// identifiers. The avoid set guards against names read back from elaborated
// output.
std::string fresh_name(const std::string& base, const NameSet& avoid = {});

// Kinds

struct Kind;
using KindPtr = std::shared_ptr<const Kind>;

struct Kind {
  enum class Tag { VTy, CTy, Arrow };
  Tag tag;
  KindPtr dom;
  KindPtr cod;
};

KindPtr k_vty();
KindPtr k_cty();
KindPtr k_arrow(KindPtr dom, KindPtr cod);
bool kind_eq(const KindPtr& a, const KindPtr& b);
// Final codomain of an arrow spine.
KindPtr kind_result(KindPtr k);

// Types

enum class TypeTag { Var, Lam, App, Thk, Unit, Prod, Sum, Exists, Ret, Arrow, With, Forall, Nu, Prim };
enum class PrimType { Int, String, Bool, OS };

struct Type;
using TypePtr = std::shared_ptr<const Type>;
using TypeFields = std::vector<std::pair<std::string, TypePtr>>;

// One node type for every constructor. Which members are meaningful depends
// on the tag:
//   Var: name.  Lam/Exists/Forall/Nu: name (binder), kind, a (body).
//   App: a (function), b (argument).  Thk, Ret: a.  Prod, Arrow: a, b.
//   Sum, With: fields, sorted by tag.  Prim: prim.
struct Type {
  TypeTag tag = TypeTag::Unit;
  std::string name;
  KindPtr kind;
  TypePtr a;
  TypePtr b;
  TypeFields fields;
  PrimType prim = PrimType::Int;
  NameSet ftv;
  Span span;
};

TypePtr t_var(std::string name, Span span = {});
TypePtr t_lam(std::string binder, KindPtr kind, TypePtr body, Span span = {});
TypePtr t_app(TypePtr fun, TypePtr arg, Span span = {});
TypePtr t_thk(TypePtr b, Span span = {});
TypePtr t_unit(Span span = {});
TypePtr t_prod(TypePtr a, TypePtr b, Span span = {});
TypePtr t_sum(TypeFields fields, Span span = {});
TypePtr t_exists(std::string binder, KindPtr kind, TypePtr body, Span span = {});
TypePtr t_ret(TypePtr a, Span span = {});
TypePtr t_arrow(TypePtr a, TypePtr b, Span span = {});
TypePtr t_with(TypeFields fields, Span span = {});
TypePtr t_forall(std::string binder, KindPtr kind, TypePtr body, Span span = {});
TypePtr t_nu(std::string binder, KindPtr kind, TypePtr body, Span span = {});
TypePtr t_prim(PrimType p, Span span = {});

bool is_binder(TypeTag tag);
const TypePtr* find_field(const Type& t, const std::string& tag);
// First duplicate tag in a field list, if any.
std::optional<std::string> duplicate_tag(const TypeFields& fields);

// Values and computations

struct Value;
struct Comp;
using ValuePtr = std::shared_ptr<const Value>;
using CompPtr = std::shared_ptr<const Comp>;

enum class ValueTag { Var, Thunk, Unit, Pair, Inj, Pack, Int, String, Bool, Prim };

//   Var: name.  Thunk: comp.  Pair: a, b.  Inj: name (ctor), a.
//   Pack: type (witness), a.  Int: num.  String: name.  Bool: flag.
//   Prim: name (builtin).
struct Value {
  ValueTag tag = ValueTag::Unit;
  std::string name;
  std::int64_t num = 0;
  bool flag = false;
  CompPtr comp;
  ValuePtr a;
  ValuePtr b;
  TypePtr type;
  NameSet fv;
  NameSet ftv;
  Span span;

  Value() = default;
  Value(const Value&) = default;
  ~Value();
};

enum class CompTag {
  Force, Let, LetPair, Match, Unpack, Return, Bind, Lam, App,
  Comatch, Dtor, TyLam, TyApp, Roll, Unroll, Fix, Monadic
};

// Match arm (tag, binder, body) or comatch arm (tag, "", body).
struct Arm {
  std::string tag;
  std::string binder;
  CompPtr body;
};

//   Force: val.
//   Let: x, val, m.        LetPair: x, y, val, m.     Match: val, arms.
//   Unpack: x (type binder), y (term binder), val, m.
//   Return: val; type = payload type (filled by the checker).
//   Bind: x, m0 (head), m (body); type = A, type2 = B (filled by the checker).
//   Lam: x, type (annotation or null), m.      App: m, val.
//   Comatch: arms.    Dtor: m, x (tag).       TyLam: x, kind (or null), m.
//   TyApp: m, type.   Roll, Unroll, Monadic: m.
//   Fix: x, type (annotation or null), m.
struct Comp {
  CompTag tag = CompTag::Force;
  std::string x;
  std::string y;
  ValuePtr val;
  CompPtr m0;
  CompPtr m;
  TypePtr type;
  TypePtr type2;
  KindPtr kind;
  std::vector<Arm> arms;
  NameSet fv;
  NameSet ftv;
  Span span;

  Comp() = default;
  Comp(const Comp&) = default;
  ~Comp();
};

ValuePtr v_var(std::string name, Span span = {});
ValuePtr v_thunk(CompPtr m, Span span = {});
ValuePtr v_unit(Span span = {});
ValuePtr v_pair(ValuePtr a, ValuePtr b, Span span = {});
ValuePtr v_inj(std::string ctor, ValuePtr a, Span span = {});
ValuePtr v_pack(TypePtr witness, ValuePtr a, Span span = {});
ValuePtr v_int(std::int64_t n, Span span = {});
ValuePtr v_string(std::string s, Span span = {});
ValuePtr v_bool(bool b, Span span = {});
ValuePtr v_prim(std::string name, Span span = {});

CompPtr c_force(ValuePtr v, Span span = {});
CompPtr c_let(std::string x, ValuePtr v, CompPtr body, Span span = {});
CompPtr c_letpair(std::string x, std::string y, ValuePtr v, CompPtr body, Span span = {});
CompPtr c_match(ValuePtr v, std::vector<Arm> arms, Span span = {});
CompPtr c_unpack(std::string tyvar, std::string x, ValuePtr v, CompPtr body, Span span = {});
CompPtr c_return(ValuePtr v, TypePtr payload = nullptr, Span span = {});
CompPtr c_bind(std::string x, CompPtr head, CompPtr body, TypePtr a = nullptr, TypePtr b = nullptr,
               Span span = {});
CompPtr c_lam(std::string x, TypePtr ann, CompPtr body, Span span = {});
CompPtr c_app(CompPtr fun, ValuePtr arg, Span span = {});
CompPtr c_comatch(std::vector<Arm> arms, Span span = {});
CompPtr c_dtor(CompPtr fun, std::string tag, Span span = {});
CompPtr c_tylam(std::string x, KindPtr kind, CompPtr body, Span span = {});
CompPtr c_tyapp(CompPtr fun, TypePtr arg, Span span = {});
CompPtr c_roll(CompPtr body, Span span = {});
CompPtr c_unroll(CompPtr body, Span span = {});
CompPtr c_fix(std::string x, TypePtr ann, CompPtr body, Span span = {});
CompPtr c_monadic(CompPtr body, Span span = {});

// Rebuild a node from a modified copy, recomputing cached free variables.
TypePtr seal(std::shared_ptr<Type> t);
ValuePtr seal(std::shared_ptr<Value> v);
CompPtr seal(std::shared_ptr<Comp> c);

const char* tag_name(CompTag tag);
const char* tag_name(TypeTag tag);

// Substitution. All are capture-avoiding and return the input node unchanged
// when the variable does not occur free.

TypePtr subst_type(const TypePtr& target, const TypePtr& repl, const std::string& var);
ValuePtr subst_value(const ValuePtr& target, const ValuePtr& repl, const std::string& var);
CompPtr subst_comp(const CompPtr& target, const ValuePtr& repl, const std::string& var);
ValuePtr subst_type_value(const ValuePtr& target, const TypePtr& repl, const std::string& var);
CompPtr subst_type_comp(const CompPtr& target, const TypePtr& repl, const std::string& var);
CompPtr subst_in_comp(const CompPtr& target,
                      const std::optional<std::pair<ValuePtr, std::string>>& value_repl,
                      const std::optional<std::pair<TypePtr, std::string>>& type_repl);

// Alpha-equivalence. Checker-recorded Bind/Return annotations are ignored.

bool alpha_eq(const TypePtr& a, const TypePtr& b);
bool alpha_eq(const ValuePtr& a, const ValuePtr& b);
bool alpha_eq(const CompPtr& a, const CompPtr& b);

// Beta-normal form of a type. Recursive types are never unfolded.
TypePtr normalize(const TypePtr& t);
bool type_equal(const TypePtr& a, const TypePtr& b);

// If t is a (possibly applied) recursive type, its one-step unfolding,
// normalized; otherwise null.
TypePtr unfold_nu(const TypePtr& t);

}  // namespace cbpv

#include "cbpv/syntax.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>

namespace cbpv {

bool contains(const NameSet& set, const std::string& name) {
  return std::binary_search(set.begin(), set.end(), name);
}

NameSet set_union(const NameSet& a, const NameSet& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  NameSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

NameSet set_minus(const NameSet& set, const std::string& name) {
  auto it = std::lower_bound(set.begin(), set.end(), name);
  if (it == set.end() || *it != name) return set;
  NameSet out = set;
  out.erase(out.begin() + (it - set.begin()));
  return out;
}

namespace {

std::atomic<std::uint64_t> fresh_counter{0};

std::string strip_suffix(const std::string& name) {
  auto pos = name.rfind('$');
  if (pos == std::string::npos || pos == 0 || pos + 1 == name.size()) return name;
  for (std::size_t i = pos + 1; i < name.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return name;
  return name.substr(0, pos);
}

}  // namespace

std::string fresh_name(const std::string& base, const NameSet& avoid) {
  std::string stem = strip_suffix(base);
  for (;;) {
    std::string candidate = stem + "$" + std::to_string(++fresh_counter);
    if (!contains(avoid, candidate)) return candidate;
  }
}

// Kinds

KindPtr k_vty() {
  static const KindPtr k = std::make_shared<Kind>(Kind{Kind::Tag::VTy, nullptr, nullptr});
  return k;
}

KindPtr k_cty() {
  static const KindPtr k = std::make_shared<Kind>(Kind{Kind::Tag::CTy, nullptr, nullptr});
  return k;
}

KindPtr k_arrow(KindPtr dom, KindPtr cod) {
  return std::make_shared<Kind>(Kind{Kind::Tag::Arrow, std::move(dom), std::move(cod)});
}

bool kind_eq(const KindPtr& a, const KindPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->tag != b->tag) return false;
  if (a->tag != Kind::Tag::Arrow) return true;
  return kind_eq(a->dom, b->dom) && kind_eq(a->cod, b->cod);
}

KindPtr kind_result(KindPtr k) {
  while (k->tag == Kind::Tag::Arrow) k = k->cod;
  return k;
}

// Types

bool is_binder(TypeTag tag) {
  return tag == TypeTag::Lam || tag == TypeTag::Exists || tag == TypeTag::Forall || tag == TypeTag::Nu;
}

TypePtr seal(std::shared_ptr<Type> t) {
  NameSet ftv;
  switch (t->tag) {
    case TypeTag::Var:
      ftv = {t->name};
      break;
    case TypeTag::Lam:
    case TypeTag::Exists:
    case TypeTag::Forall:
    case TypeTag::Nu:
      ftv = set_minus(t->a->ftv, t->name);
      break;
    case TypeTag::App:
    case TypeTag::Prod:
    case TypeTag::Arrow:
      ftv = set_union(t->a->ftv, t->b->ftv);
      break;
    case TypeTag::Thk:
    case TypeTag::Ret:
      ftv = t->a->ftv;
      break;
    case TypeTag::Sum:
    case TypeTag::With:
      std::sort(t->fields.begin(), t->fields.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
      for (const auto& [tag, ty] : t->fields) ftv = set_union(ftv, ty->ftv);
      break;
    case TypeTag::Unit:
    case TypeTag::Prim:
      break;
  }
  t->ftv = std::move(ftv);
  return t;
}

namespace {

std::shared_ptr<Type> node(TypeTag tag, Span span) {
  auto t = std::make_shared<Type>();
  t->tag = tag;
  t->span = span;
  return t;
}

TypePtr binder_type(TypeTag tag, std::string binder, KindPtr kind, TypePtr body, Span span) {
  auto t = node(tag, span);
  t->name = std::move(binder);
  t->kind = std::move(kind);
  t->a = std::move(body);
  return seal(t);
}

TypePtr unary_type(TypeTag tag, TypePtr a, Span span) {
  auto t = node(tag, span);
  t->a = std::move(a);
  return seal(t);
}

TypePtr binary_type(TypeTag tag, TypePtr a, TypePtr b, Span span) {
  auto t = node(tag, span);
  t->a = std::move(a);
  t->b = std::move(b);
  return seal(t);
}

}  // namespace

TypePtr t_var(std::string name, Span span) {
  auto t = node(TypeTag::Var, span);
  t->name = std::move(name);
  return seal(t);
}

TypePtr t_lam(std::string binder, KindPtr kind, TypePtr body, Span span) {
  return binder_type(TypeTag::Lam, std::move(binder), std::move(kind), std::move(body), span);
}
TypePtr t_app(TypePtr fun, TypePtr arg, Span span) {
  return binary_type(TypeTag::App, std::move(fun), std::move(arg), span);
}
TypePtr t_thk(TypePtr b, Span span) { return unary_type(TypeTag::Thk, std::move(b), span); }
TypePtr t_unit(Span span) { return seal(node(TypeTag::Unit, span)); }
TypePtr t_prod(TypePtr a, TypePtr b, Span span) {
  return binary_type(TypeTag::Prod, std::move(a), std::move(b), span);
}
TypePtr t_sum(TypeFields fields, Span span) {
  auto t = node(TypeTag::Sum, span);
  t->fields = std::move(fields);
  return seal(t);
}
TypePtr t_exists(std::string binder, KindPtr kind, TypePtr body, Span span) {
  return binder_type(TypeTag::Exists, std::move(binder), std::move(kind), std::move(body), span);
}
TypePtr t_ret(TypePtr a, Span span) { return unary_type(TypeTag::Ret, std::move(a), span); }
TypePtr t_arrow(TypePtr a, TypePtr b, Span span) {
  return binary_type(TypeTag::Arrow, std::move(a), std::move(b), span);
}
TypePtr t_with(TypeFields fields, Span span) {
  auto t = node(TypeTag::With, span);
  t->fields = std::move(fields);
  return seal(t);
}
TypePtr t_forall(std::string binder, KindPtr kind, TypePtr body, Span span) {
  return binder_type(TypeTag::Forall, std::move(binder), std::move(kind), std::move(body), span);
}
TypePtr t_nu(std::string binder, KindPtr kind, TypePtr body, Span span) {
  return binder_type(TypeTag::Nu, std::move(binder), std::move(kind), std::move(body), span);
}
TypePtr t_prim(PrimType p, Span span) {
  auto t = node(TypeTag::Prim, span);
  t->prim = p;
  return seal(t);
}

const TypePtr* find_field(const Type& t, const std::string& tag) {
  for (const auto& [name, ty] : t.fields)
    if (name == tag) return &ty;
  return nullptr;
}

std::optional<std::string> duplicate_tag(const TypeFields& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i)
    for (std::size_t j = i + 1; j < fields.size(); ++j)
      if (fields[i].first == fields[j].first) return fields[i].first;
  return std::nullopt;
}

// Values and computations

namespace {

// Deep spines (a long chain of `.more` applications, say) would otherwise be
// torn down recursively.
struct Teardown {
  std::vector<CompPtr> comps;
  std::vector<ValuePtr> values;

  void take(CompPtr& c) {
    if (c && c.use_count() == 1) comps.push_back(std::move(c));
  }
  void take(ValuePtr& v) {
    if (v && v.use_count() == 1) values.push_back(std::move(v));
  }
  void strip(Comp& c) {
    take(c.m0);
    take(c.m);
    take(c.val);
    for (auto& arm : c.arms) take(arm.body);
  }
  void strip(Value& v) {
    take(v.comp);
    take(v.a);
    take(v.b);
  }
  void drain() {
    while (!comps.empty() || !values.empty()) {
      if (!comps.empty()) {
        CompPtr c = std::move(comps.back());
        comps.pop_back();
        strip(const_cast<Comp&>(*c));
      } else {
        ValuePtr v = std::move(values.back());
        values.pop_back();
        strip(const_cast<Value&>(*v));
      }
    }
  }
};

}  // namespace

Value::~Value() {
  if (!comp && !a && !b) return;
  Teardown t;
  t.strip(*this);
  t.drain();
}

Comp::~Comp() {
  Teardown t;
  t.strip(*this);
  t.drain();
}

ValuePtr seal(std::shared_ptr<Value> v) {
  NameSet fv, ftv;
  switch (v->tag) {
    case ValueTag::Var:
      fv = {v->name};
      break;
    case ValueTag::Thunk:
      fv = v->comp->fv;
      ftv = v->comp->ftv;
      break;
    case ValueTag::Pair:
      fv = set_union(v->a->fv, v->b->fv);
      ftv = set_union(v->a->ftv, v->b->ftv);
      break;
    case ValueTag::Inj:
      fv = v->a->fv;
      ftv = v->a->ftv;
      break;
    case ValueTag::Pack:
      fv = v->a->fv;
      ftv = set_union(v->type->ftv, v->a->ftv);
      break;
    default:
      break;
  }
  v->fv = std::move(fv);
  v->ftv = std::move(ftv);
  return v;
}

CompPtr seal(std::shared_ptr<Comp> c) {
  NameSet fv, ftv;
  auto add_type = [&](const TypePtr& t) {
    if (t) ftv = set_union(ftv, t->ftv);
  };
  switch (c->tag) {
    case CompTag::Force:
    case CompTag::Return:
      fv = c->val->fv;
      ftv = c->val->ftv;
      break;
    case CompTag::Let:
      fv = set_union(c->val->fv, set_minus(c->m->fv, c->x));
      ftv = set_union(c->val->ftv, c->m->ftv);
      break;
    case CompTag::LetPair:
      fv = set_union(c->val->fv, set_minus(set_minus(c->m->fv, c->x), c->y));
      ftv = set_union(c->val->ftv, c->m->ftv);
      break;
    case CompTag::Match:
      fv = c->val->fv;
      ftv = c->val->ftv;
      for (const auto& arm : c->arms) {
        fv = set_union(fv, set_minus(arm.body->fv, arm.binder));
        ftv = set_union(ftv, arm.body->ftv);
      }
      break;
    case CompTag::Unpack:
      fv = set_union(c->val->fv, set_minus(c->m->fv, c->y));
      ftv = set_union(c->val->ftv, set_minus(c->m->ftv, c->x));
      break;
    case CompTag::Bind:
      fv = set_union(c->m0->fv, set_minus(c->m->fv, c->x));
      ftv = set_union(c->m0->ftv, c->m->ftv);
      break;
    case CompTag::Lam:
    case CompTag::Fix:
      fv = set_minus(c->m->fv, c->x);
      ftv = c->m->ftv;
      break;
    case CompTag::App:
      fv = set_union(c->m->fv, c->val->fv);
      ftv = set_union(c->m->ftv, c->val->ftv);
      break;
    case CompTag::Comatch:
      for (const auto& arm : c->arms) {
        fv = set_union(fv, arm.body->fv);
        ftv = set_union(ftv, arm.body->ftv);
      }
      break;
    case CompTag::TyLam:
      fv = c->m->fv;
      ftv = set_minus(c->m->ftv, c->x);
      break;
    case CompTag::Dtor:
    case CompTag::TyApp:
    case CompTag::Roll:
    case CompTag::Unroll:
    case CompTag::Monadic:
      fv = c->m->fv;
      ftv = c->m->ftv;
      break;
  }
  add_type(c->type);
  add_type(c->type2);
  c->fv = std::move(fv);
  c->ftv = std::move(ftv);
  return c;
}

namespace {

std::shared_ptr<Value> vnode(ValueTag tag, Span span) {
  auto v = std::make_shared<Value>();
  v->tag = tag;
  v->span = span;
  return v;
}

std::shared_ptr<Comp> cnode(CompTag tag, Span span) {
  auto c = std::make_shared<Comp>();
  c->tag = tag;
  c->span = span;
  return c;
}

}  // namespace

ValuePtr v_var(std::string name, Span span) {
  auto v = vnode(ValueTag::Var, span);
  v->name = std::move(name);
  return seal(v);
}
ValuePtr v_thunk(CompPtr m, Span span) {
  auto v = vnode(ValueTag::Thunk, span);
  v->comp = std::move(m);
  return seal(v);
}
ValuePtr v_unit(Span span) { return seal(vnode(ValueTag::Unit, span)); }
ValuePtr v_pair(ValuePtr a, ValuePtr b, Span span) {
  auto v = vnode(ValueTag::Pair, span);
  v->a = std::move(a);
  v->b = std::move(b);
  return seal(v);
}
ValuePtr v_inj(std::string ctor, ValuePtr a, Span span) {
  auto v = vnode(ValueTag::Inj, span);
  v->name = std::move(ctor);
  v->a = std::move(a);
  return seal(v);
}
ValuePtr v_pack(TypePtr witness, ValuePtr a, Span span) {
  auto v = vnode(ValueTag::Pack, span);
  v->type = std::move(witness);
  v->a = std::move(a);
  return seal(v);
}
ValuePtr v_int(std::int64_t n, Span span) {
  auto v = vnode(ValueTag::Int, span);
  v->num = n;
  return seal(v);
}
ValuePtr v_string(std::string s, Span span) {
  auto v = vnode(ValueTag::String, span);
  v->name = std::move(s);
  return seal(v);
}
ValuePtr v_bool(bool b, Span span) {
  auto v = vnode(ValueTag::Bool, span);
  v->flag = b;
  return seal(v);
}
ValuePtr v_prim(std::string name, Span span) {
  auto v = vnode(ValueTag::Prim, span);
  v->name = std::move(name);
  return seal(v);
}

CompPtr c_force(ValuePtr v, Span span) {
  auto c = cnode(CompTag::Force, span);
  c->val = std::move(v);
  return seal(c);
}
CompPtr c_let(std::string x, ValuePtr v, CompPtr body, Span span) {
  auto c = cnode(CompTag::Let, span);
  c->x = std::move(x);
  c->val = std::move(v);
  c->m = std::move(body);
  return seal(c);
}
CompPtr c_letpair(std::string x, std::string y, ValuePtr v, CompPtr body, Span span) {
  auto c = cnode(CompTag::LetPair, span);
  c->x = std::move(x);
  c->y = std::move(y);
  c->val = std::move(v);
  c->m = std::move(body);
  return seal(c);
}
CompPtr c_match(ValuePtr v, std::vector<Arm> arms, Span span) {
  auto c = cnode(CompTag::Match, span);
  c->val = std::move(v);
  c->arms = std::move(arms);
  return seal(c);
}
CompPtr c_unpack(std::string tyvar, std::string x, ValuePtr v, CompPtr body, Span span) {
  auto c = cnode(CompTag::Unpack, span);
  c->x = std::move(tyvar);
  c->y = std::move(x);
  c->val = std::move(v);
  c->m = std::move(body);
  return seal(c);
}
CompPtr c_return(ValuePtr v, TypePtr payload, Span span) {
  auto c = cnode(CompTag::Return, span);
  c->val = std::move(v);
  c->type = std::move(payload);
  return seal(c);
}
CompPtr c_bind(std::string x, CompPtr head, CompPtr body, TypePtr a, TypePtr b, Span span) {
  auto c = cnode(CompTag::Bind, span);
  c->x = std::move(x);
  c->m0 = std::move(head);
  c->m = std::move(body);
  c->type = std::move(a);
  c->type2 = std::move(b);
  return seal(c);
}
CompPtr c_lam(std::string x, TypePtr ann, CompPtr body, Span span) {
  auto c = cnode(CompTag::Lam, span);
  c->x = std::move(x);
  c->type = std::move(ann);
  c->m = std::move(body);
  return seal(c);
}
CompPtr c_app(CompPtr fun, ValuePtr arg, Span span) {
  auto c = cnode(CompTag::App, span);
  c->m = std::move(fun);
  c->val = std::move(arg);
  return seal(c);
}
CompPtr c_comatch(std::vector<Arm> arms, Span span) {
  auto c = cnode(CompTag::Comatch, span);
  c->arms = std::move(arms);
  return seal(c);
}
CompPtr c_dtor(CompPtr fun, std::string tag, Span span) {
  auto c = cnode(CompTag::Dtor, span);
  c->m = std::move(fun);
  c->x = std::move(tag);
  return seal(c);
}
CompPtr c_tylam(std::string x, KindPtr kind, CompPtr body, Span span) {
  auto c = cnode(CompTag::TyLam, span);
  c->x = std::move(x);
  c->kind = std::move(kind);
  c->m = std::move(body);
  return seal(c);
}
CompPtr c_tyapp(CompPtr fun, TypePtr arg, Span span) {
  auto c = cnode(CompTag::TyApp, span);
  c->m = std::move(fun);
  c->type = std::move(arg);
  return seal(c);
}
CompPtr c_roll(CompPtr body, Span span) {
  auto c = cnode(CompTag::Roll, span);
  c->m = std::move(body);
  return seal(c);
}
CompPtr c_unroll(CompPtr body, Span span) {
  auto c = cnode(CompTag::Unroll, span);
  c->m = std::move(body);
  return seal(c);
}
CompPtr c_fix(std::string x, TypePtr ann, CompPtr body, Span span) {
  auto c = cnode(CompTag::Fix, span);
  c->x = std::move(x);
  c->type = std::move(ann);
  c->m = std::move(body);
  return seal(c);
}
CompPtr c_monadic(CompPtr body, Span span) {
  auto c = cnode(CompTag::Monadic, span);
  c->m = std::move(body);
  return seal(c);
}

const char* tag_name(CompTag tag) {
  switch (tag) {
    case CompTag::Force: return "Force";
    case CompTag::Let: return "Let";
    case CompTag::LetPair: return "LetPair";
    case CompTag::Match: return "Match";
    case CompTag::Unpack: return "Unpack";
    case CompTag::Return: return "Return";
    case CompTag::Bind: return "Bind";
    case CompTag::Lam: return "Lam";
    case CompTag::App: return "App";
    case CompTag::Comatch: return "Comatch";
    case CompTag::Dtor: return "Dtor";
    case CompTag::TyLam: return "TyLam";
    case CompTag::TyApp: return "TyApp";
    case CompTag::Roll: return "Roll";
    case CompTag::Unroll: return "Unroll";
    case CompTag::Fix: return "Fix";
    case CompTag::Monadic: return "Monadic";
  }
  return "?";
}

const char* tag_name(TypeTag tag) {
  switch (tag) {
    case TypeTag::Var: return "variable";
    case TypeTag::Lam: return "type lambda";
    case TypeTag::App: return "type application";
    case TypeTag::Thk: return "Thk";
    case TypeTag::Unit: return "Unit";
    case TypeTag::Prod: return "product";
    case TypeTag::Sum: return "sum";
    case TypeTag::Exists: return "exists";
    case TypeTag::Ret: return "Ret";
    case TypeTag::Arrow: return "arrow";
    case TypeTag::With: return "with";
    case TypeTag::Forall: return "forall";
    case TypeTag::Nu: return "rec";
    case TypeTag::Prim: return "primitive";
  }
  return "?";
}

// Substitution

TypePtr subst_type(const TypePtr& t, const TypePtr& repl, const std::string& var) {
  if (!contains(t->ftv, var)) return t;
  switch (t->tag) {
    case TypeTag::Var:
      return repl;
    case TypeTag::Lam:
    case TypeTag::Exists:
    case TypeTag::Forall:
    case TypeTag::Nu: {
      std::string binder = t->name;
      TypePtr body = t->a;
      if (contains(repl->ftv, binder)) {
        std::string renamed = fresh_name(binder, set_union(repl->ftv, body->ftv));
        body = subst_type(body, t_var(renamed), binder);
        binder = renamed;
      }
      auto n = std::make_shared<Type>(*t);
      n->name = binder;
      n->a = subst_type(body, repl, var);
      return seal(n);
    }
    case TypeTag::Sum:
    case TypeTag::With: {
      auto n = std::make_shared<Type>(*t);
      for (auto& [tag, ty] : n->fields) ty = subst_type(ty, repl, var);
      return seal(n);
    }
    default: {
      auto n = std::make_shared<Type>(*t);
      if (n->a) n->a = subst_type(n->a, repl, var);
      if (n->b) n->b = subst_type(n->b, repl, var);
      return seal(n);
    }
  }
}

namespace {

TypePtr opt_subst_type(const TypePtr& t, const TypePtr& repl, const std::string& var) {
  return t ? subst_type(t, repl, var) : t;
}

// Pick a name for a term binder that avoids capturing the replacement's free
// variables, renaming inside body if needed.
void avoid_term_capture(std::string& binder, CompPtr& body, const ValuePtr& repl) {
  if (!contains(repl->fv, binder)) return;
  std::string renamed = fresh_name(binder, set_union(repl->fv, body->fv));
  body = subst_comp(body, v_var(renamed), binder);
  binder = renamed;
}

void avoid_type_capture(std::string& binder, CompPtr& body, const NameSet& ftv) {
  if (!contains(ftv, binder)) return;
  std::string renamed = fresh_name(binder, set_union(ftv, body->ftv));
  body = subst_type_comp(body, t_var(renamed), binder);
  binder = renamed;
}

}  // namespace

ValuePtr subst_value(const ValuePtr& v, const ValuePtr& repl, const std::string& var) {
  if (!contains(v->fv, var)) return v;
  switch (v->tag) {
    case ValueTag::Var:
      return repl;
    case ValueTag::Thunk: {
      auto n = std::make_shared<Value>(*v);
      n->comp = subst_comp(v->comp, repl, var);
      return seal(n);
    }
    default: {
      auto n = std::make_shared<Value>(*v);
      if (n->a) n->a = subst_value(n->a, repl, var);
      if (n->b) n->b = subst_value(n->b, repl, var);
      return seal(n);
    }
  }
}

CompPtr subst_comp(const CompPtr& c, const ValuePtr& repl, const std::string& var) {
  if (!contains(c->fv, var)) return c;
  auto n = std::make_shared<Comp>(*c);
  auto under = [&](std::string& binder, CompPtr& body) {
    if (binder == var) return;
    avoid_term_capture(binder, body, repl);
    body = subst_comp(body, repl, var);
  };
  if (n->val) n->val = subst_value(n->val, repl, var);
  switch (c->tag) {
    case CompTag::Let:
    case CompTag::Bind:
    case CompTag::Lam:
    case CompTag::Fix:
      if (n->m0) n->m0 = subst_comp(n->m0, repl, var);
      under(n->x, n->m);
      break;
    case CompTag::LetPair:
      if (n->x != var && n->y != var) {
        avoid_term_capture(n->x, n->m, repl);
        avoid_term_capture(n->y, n->m, repl);
        n->m = subst_comp(n->m, repl, var);
      }
      break;
    case CompTag::Match:
      for (auto& arm : n->arms) under(arm.binder, arm.body);
      break;
    case CompTag::Comatch:
      for (auto& arm : n->arms) arm.body = subst_comp(arm.body, repl, var);
      break;
    case CompTag::Unpack:
      avoid_type_capture(n->x, n->m, repl->ftv);
      under(n->y, n->m);
      break;
    case CompTag::TyLam:
      avoid_type_capture(n->x, n->m, repl->ftv);
      n->m = subst_comp(n->m, repl, var);
      break;
    default:
      if (n->m) n->m = subst_comp(n->m, repl, var);
      break;
  }
  return seal(n);
}

ValuePtr subst_type_value(const ValuePtr& v, const TypePtr& repl, const std::string& var) {
  if (!contains(v->ftv, var)) return v;
  auto n = std::make_shared<Value>(*v);
  if (n->comp) n->comp = subst_type_comp(n->comp, repl, var);
  if (n->a) n->a = subst_type_value(n->a, repl, var);
  if (n->b) n->b = subst_type_value(n->b, repl, var);
  if (n->type) n->type = subst_type(n->type, repl, var);
  return seal(n);
}

CompPtr subst_type_comp(const CompPtr& c, const TypePtr& repl, const std::string& var) {
  if (!contains(c->ftv, var)) return c;
  auto n = std::make_shared<Comp>(*c);
  if (n->val) n->val = subst_type_value(n->val, repl, var);
  n->type = opt_subst_type(n->type, repl, var);
  n->type2 = opt_subst_type(n->type2, repl, var);
  if (n->m0) n->m0 = subst_type_comp(n->m0, repl, var);
  switch (c->tag) {
    case CompTag::TyLam:
    case CompTag::Unpack:
      if (n->x != var) {
        avoid_type_capture(n->x, n->m, repl->ftv);
        n->m = subst_type_comp(n->m, repl, var);
      }
      break;
    default:
      if (n->m) n->m = subst_type_comp(n->m, repl, var);
      for (auto& arm : n->arms) arm.body = subst_type_comp(arm.body, repl, var);
      break;
  }
  return seal(n);
}

CompPtr subst_in_comp(const CompPtr& target,
                      const std::optional<std::pair<ValuePtr, std::string>>& value_repl,
                      const std::optional<std::pair<TypePtr, std::string>>& type_repl) {
  CompPtr out = target;
  if (value_repl) out = subst_comp(out, value_repl->first, value_repl->second);
  if (type_repl) out = subst_type_comp(out, type_repl->first, type_repl->second);
  return out;
}

// Alpha-equivalence

namespace {

using Pairs = std::vector<std::pair<std::string, std::string>>;

bool var_eq(const Pairs& env, const std::string& a, const std::string& b) {
  for (std::size_t i = env.size(); i-- > 0;) {
    bool left = env[i].first == a;
    bool right = env[i].second == b;
    if (left || right) return left && right;
  }
  return a == b;
}

struct Scope {
  Pairs& env;
  std::size_t mark;
  Scope(Pairs& e, const std::string& a, const std::string& b) : env(e), mark(e.size()) {
    env.emplace_back(a, b);
  }
  ~Scope() { env.resize(mark); }
};

bool ty_eq(const TypePtr& a, const TypePtr& b, Pairs& env) {
  if (a == b && env.empty()) return true;
  if (!a || !b) return a == b;
  if (a->tag != b->tag) return false;
  switch (a->tag) {
    case TypeTag::Var:
      return var_eq(env, a->name, b->name);
    case TypeTag::Lam:
    case TypeTag::Exists:
    case TypeTag::Forall:
    case TypeTag::Nu: {
      if (!kind_eq(a->kind, b->kind)) return false;
      Scope s(env, a->name, b->name);
      return ty_eq(a->a, b->a, env);
    }
    case TypeTag::Sum:
    case TypeTag::With:
      if (a->fields.size() != b->fields.size()) return false;
      for (std::size_t i = 0; i < a->fields.size(); ++i) {
        if (a->fields[i].first != b->fields[i].first) return false;
        if (!ty_eq(a->fields[i].second, b->fields[i].second, env)) return false;
      }
      return true;
    case TypeTag::Prim:
      return a->prim == b->prim;
    case TypeTag::Unit:
      return true;
    default:
      return ty_eq(a->a, b->a, env) && ty_eq(a->b, b->b, env);
  }
}

struct AlphaEnv {
  Pairs tm;
  Pairs ty;
};

bool comp_eq(const CompPtr& a, const CompPtr& b, AlphaEnv& env);

bool val_eq(const ValuePtr& a, const ValuePtr& b, AlphaEnv& env) {
  if (a->tag != b->tag) return false;
  switch (a->tag) {
    case ValueTag::Var:
      return var_eq(env.tm, a->name, b->name);
    case ValueTag::Thunk:
      return comp_eq(a->comp, b->comp, env);
    case ValueTag::Unit:
      return true;
    case ValueTag::Pair:
      return val_eq(a->a, b->a, env) && val_eq(a->b, b->b, env);
    case ValueTag::Inj:
      return a->name == b->name && val_eq(a->a, b->a, env);
    case ValueTag::Pack:
      return ty_eq(a->type, b->type, env.ty) && val_eq(a->a, b->a, env);
    case ValueTag::Int:
      return a->num == b->num;
    case ValueTag::String:
    case ValueTag::Prim:
      return a->name == b->name;
    case ValueTag::Bool:
      return a->flag == b->flag;
  }
  return false;
}

bool under_tm(const std::string& x, const std::string& y, const CompPtr& a, const CompPtr& b,
              AlphaEnv& env) {
  Scope s(env.tm, x, y);
  return comp_eq(a, b, env);
}

bool comp_eq(const CompPtr& a, const CompPtr& b, AlphaEnv& env) {
  if (a->tag != b->tag) return false;
  switch (a->tag) {
    case CompTag::Force:
    case CompTag::Return:
      return val_eq(a->val, b->val, env);
    case CompTag::Let:
      return val_eq(a->val, b->val, env) && under_tm(a->x, b->x, a->m, b->m, env);
    case CompTag::LetPair: {
      if (!val_eq(a->val, b->val, env)) return false;
      Scope s1(env.tm, a->x, b->x);
      Scope s2(env.tm, a->y, b->y);
      return comp_eq(a->m, b->m, env);
    }
    case CompTag::Match:
      if (!val_eq(a->val, b->val, env) || a->arms.size() != b->arms.size()) return false;
      for (std::size_t i = 0; i < a->arms.size(); ++i) {
        if (a->arms[i].tag != b->arms[i].tag) return false;
        if (!under_tm(a->arms[i].binder, b->arms[i].binder, a->arms[i].body, b->arms[i].body, env))
          return false;
      }
      return true;
    case CompTag::Unpack: {
      if (!val_eq(a->val, b->val, env)) return false;
      Scope s1(env.ty, a->x, b->x);
      Scope s2(env.tm, a->y, b->y);
      return comp_eq(a->m, b->m, env);
    }
    case CompTag::Bind:
      return comp_eq(a->m0, b->m0, env) && under_tm(a->x, b->x, a->m, b->m, env);
    case CompTag::Lam:
    case CompTag::Fix:
      if ((a->type == nullptr) != (b->type == nullptr)) return false;
      if (a->type && !ty_eq(a->type, b->type, env.ty)) return false;
      return under_tm(a->x, b->x, a->m, b->m, env);
    case CompTag::App:
      return comp_eq(a->m, b->m, env) && val_eq(a->val, b->val, env);
    case CompTag::Comatch:
      if (a->arms.size() != b->arms.size()) return false;
      for (std::size_t i = 0; i < a->arms.size(); ++i) {
        if (a->arms[i].tag != b->arms[i].tag) return false;
        if (!comp_eq(a->arms[i].body, b->arms[i].body, env)) return false;
      }
      return true;
    case CompTag::Dtor:
      return a->x == b->x && comp_eq(a->m, b->m, env);
    case CompTag::TyLam: {
      if ((a->kind == nullptr) != (b->kind == nullptr)) return false;
      if (a->kind && !kind_eq(a->kind, b->kind)) return false;
      Scope s(env.ty, a->x, b->x);
      return comp_eq(a->m, b->m, env);
    }
    case CompTag::TyApp:
      return ty_eq(a->type, b->type, env.ty) && comp_eq(a->m, b->m, env);
    case CompTag::Roll:
    case CompTag::Unroll:
    case CompTag::Monadic:
      return comp_eq(a->m, b->m, env);
  }
  return false;
}

}  // namespace

bool alpha_eq(const TypePtr& a, const TypePtr& b) {
  Pairs env;
  return ty_eq(a, b, env);
}

bool alpha_eq(const ValuePtr& a, const ValuePtr& b) {
  AlphaEnv env;
  return val_eq(a, b, env);
}

bool alpha_eq(const CompPtr& a, const CompPtr& b) {
  AlphaEnv env;
  return comp_eq(a, b, env);
}

// Normalization

TypePtr normalize(const TypePtr& t) {
  switch (t->tag) {
    case TypeTag::Var:
    case TypeTag::Unit:
    case TypeTag::Prim:
      return t;
    case TypeTag::App: {
      TypePtr f = normalize(t->a);
      TypePtr x = normalize(t->b);
      if (f->tag == TypeTag::Lam) return normalize(subst_type(f->a, x, f->name));
      if (f == t->a && x == t->b) return t;
      return t_app(f, x, t->span);
    }
    case TypeTag::Sum:
    case TypeTag::With: {
      bool changed = false;
      TypeFields fields = t->fields;
      for (auto& [tag, ty] : fields) {
        TypePtr n = normalize(ty);
        changed |= n != ty;
        ty = n;
      }
      if (!changed) return t;
      auto n = std::make_shared<Type>(*t);
      n->fields = std::move(fields);
      return seal(n);
    }
    default: {
      TypePtr a = t->a ? normalize(t->a) : nullptr;
      TypePtr b = t->b ? normalize(t->b) : nullptr;
      if (a == t->a && b == t->b) return t;
      auto n = std::make_shared<Type>(*t);
      n->a = a;
      n->b = b;
      return seal(n);
    }
  }
}

bool type_equal(const TypePtr& a, const TypePtr& b) {
  return alpha_eq(normalize(a), normalize(b));
}

TypePtr unfold_nu(const TypePtr& t) {
  std::vector<TypePtr> args;
  TypePtr head = normalize(t);
  while (head->tag == TypeTag::App) {
    args.push_back(head->b);
    head = head->a;
  }
  if (head->tag != TypeTag::Nu) return nullptr;
  TypePtr out = subst_type(head->a, head, head->name);
  for (auto it = args.rbegin(); it != args.rend(); ++it) out = t_app(out, *it);
  return normalize(out);
}

}  // namespace cbpv

#include "cbpv/elaborate.hpp"

#include <algorithm>
#include <set>

#include "cbpv/builtins.hpp"
#include "cbpv/error.hpp"
#include "cbpv/parser.hpp"

namespace cbpv {

// Name collection

namespace {

void collect(const TypePtr& t, std::set<std::string>& out) {
  if (!t) return;
  if (t->tag == TypeTag::Var || is_binder(t->tag)) out.insert(t->name);
  collect(t->a, out);
  collect(t->b, out);
  for (const auto& [tag, ty] : t->fields) collect(ty, out);
}

void collect(const CompPtr& m, std::set<std::string>& out);

void collect(const ValuePtr& v, std::set<std::string>& out) {
  if (!v) return;
  if (v->tag == ValueTag::Var) out.insert(v->name);
  collect(v->comp, out);
  collect(v->a, out);
  collect(v->b, out);
  collect(v->type, out);
}

void collect(const CompPtr& m, std::set<std::string>& out) {
  if (!m) return;
  switch (m->tag) {
    case CompTag::Let:
    case CompTag::LetPair:
    case CompTag::Unpack:
    case CompTag::Bind:
    case CompTag::Lam:
    case CompTag::Fix:
    case CompTag::TyLam:
      out.insert(m->x);
      if (!m->y.empty()) out.insert(m->y);
      break;
    default:
      break;
  }
  for (const auto& arm : m->arms) {
    if (!arm.binder.empty()) out.insert(arm.binder);
    collect(arm.body, out);
  }
  collect(m->val, out);
  collect(m->m0, out);
  collect(m->m, out);
  collect(m->type, out);
  collect(m->type2, out);
}

template <typename T>
NameSet names_of(const T& x) {
  std::set<std::string> out;
  collect(x, out);
  return NameSet(out.begin(), out.end());
}

std::string pick(const std::string& preferred, const NameSet& avoid) {
  return contains(avoid, preferred) ? fresh_name(preferred, avoid) : preferred;
}

}  // namespace

NameSet type_names(const TypePtr& t) { return names_of(t); }
NameSet all_names(const CompPtr& m) { return names_of(m); }
NameSet all_names(const ValuePtr& v) { return names_of(v); }

// Types

TypePtr rel_monad_type(const TypePtr& monad) {
  NameSet avoid = monad->ftv;
  std::string a = pick("A", avoid);
  std::string b = pick("A'", set_union(avoid, NameSet{a}));
  auto app = [&](const std::string& x) { return t_app(monad, t_var(x)); };
  TypePtr ret = t_forall(a, k_vty(), t_arrow(t_var(a), app(a)));
  TypePtr bind = t_forall(
      a, k_vty(),
      t_forall(b, k_vty(), t_arrow(t_thk(app(a)), t_arrow(t_thk(t_arrow(t_var(a), app(b))), app(b)))));
  return normalize(t_with({{"return", ret}, {"bind", bind}}));
}

TypePtr algebra_type(const TypePtr& monad, const TypePtr& carrier_type) {
  std::string z = pick("Z", set_union(monad->ftv, carrier_type->ftv));
  return t_forall(z, k_vty(),
                  t_arrow(t_thk(t_app(monad, t_var(z))),
                          t_arrow(t_thk(t_arrow(t_var(z), carrier_type)), carrier_type)));
}

namespace {

TypePtr sig_raw(const KindPtr& k, const TypePtr& s, const std::string& monad) {
  switch (k->tag) {
    case Kind::Tag::VTy:
      return t_with({});
    case Kind::Tag::CTy:
      return algebra_type(t_var(monad), s);
    case Kind::Tag::Arrow: {
      std::string x = pick("X", set_union(s->ftv, NameSet{monad}));
      return t_forall(x, k->dom,
                      t_arrow(t_thk(sig_raw(k->dom, t_var(x), monad)), sig_raw(k->cod, t_app(s, t_var(x)), monad)));
    }
  }
  return nullptr;
}

TypePtr carrier_raw(const TypePtr& t, const std::string& monad) {
  switch (t->tag) {
    case TypeTag::Var:
    case TypeTag::Unit:
    case TypeTag::Prim:
      return t;
    case TypeTag::Lam:
    case TypeTag::Exists:
    case TypeTag::Forall:
    case TypeTag::Nu: {
      std::string x = t->name;
      TypePtr body = t->a;
      if (x == monad) {
        x = fresh_name(x, set_union(body->ftv, NameSet{monad}));
        body = subst_type(body, t_var(x), t->name);
      }
      TypePtr inner = carrier_raw(body, monad);
      switch (t->tag) {
        case TypeTag::Lam:
          return t_lam(x, t->kind, inner);
        case TypeTag::Nu:
          return t_nu(x, t->kind, inner);
        case TypeTag::Forall:
          return t_forall(x, t->kind, t_arrow(t_thk(sig_raw(t->kind, t_var(x), monad)), inner));
        default:
          return t_exists(x, t->kind, t_prod(t_thk(sig_raw(t->kind, t_var(x), monad)), inner));
      }
    }
    case TypeTag::App:
      return t_app(carrier_raw(t->a, monad), carrier_raw(t->b, monad));
    case TypeTag::Thk:
      return t_thk(carrier_raw(t->a, monad));
    case TypeTag::Ret:
      return t_app(t_var(monad), carrier_raw(t->a, monad));
    case TypeTag::Prod:
      return t_prod(carrier_raw(t->a, monad), carrier_raw(t->b, monad));
    case TypeTag::Arrow:
      return t_arrow(carrier_raw(t->a, monad), carrier_raw(t->b, monad));
    case TypeTag::Sum:
    case TypeTag::With: {
      TypeFields fields;
      for (const auto& [tag, ty] : t->fields) fields.emplace_back(tag, carrier_raw(ty, monad));
      return t->tag == TypeTag::Sum ? t_sum(std::move(fields)) : t_with(std::move(fields));
    }
  }
  return t;
}

}  // namespace

TypePtr carrier(const TypePtr& t, const std::string& monad) { return normalize(carrier_raw(t, monad)); }

TypePtr sig(const KindPtr& k, const TypePtr& s, const std::string& monad) {
  return normalize(sig_raw(k, s, monad));
}

ElabContext ElabContext::make(NameSet avoid) {
  ElabContext ctx;
  ctx.avoid = std::move(avoid);
  ctx.monad = ctx.fresh("T");
  ctx.instance = ctx.fresh("m");
  return ctx;
}

std::string ElabContext::fresh(const std::string& base) {
  std::string name = fresh_name(base, avoid);
  return name;
}

std::string ElabContext::bind_structure(const std::string& tyvar) {
  std::string name = fresh("str_" + tyvar);
  structures[tyvar] = name;
  return name;
}

ValueEnv sig_env(const TypeEnv& delta, ElabContext& ctx) {
  ValueEnv out;
  for (const auto& [x, k] : delta) {
    std::string s = ctx.structures.count(x) ? ctx.structures[x] : ctx.bind_structure(x);
    out.emplace_back(s, t_thk(sig(k, t_var(x), ctx.monad)));
  }
  return out;
}

// Structures

namespace {

// Restores a structure binding when a type binder goes out of scope.
class StructureScope {
 public:
  StructureScope(ElabContext& ctx, const std::string& tyvar) : ctx_(ctx), tyvar_(tyvar) {
    auto it = ctx.structures.find(tyvar);
    if (it != ctx.structures.end()) saved_ = it->second;
  }
  ~StructureScope() {
    if (saved_)
      ctx_.structures[tyvar_] = *saved_;
    else
      ctx_.structures.erase(tyvar_);
  }

 private:
  ElabContext& ctx_;
  std::string tyvar_;
  std::optional<std::string> saved_;
};

CompPtr apply_algebra(CompPtr alg, const std::string& z, const std::string& tz, CompPtr cont_body,
                      const std::string& zvar) {
  CompPtr cont = c_lam(zvar, t_var(z), std::move(cont_body));
  return c_app(c_app(c_tyapp(std::move(alg), t_var(z)), v_var(tz)), v_thunk(cont));
}

CompPtr structure_rec(const TypePtr& s, ElabContext& ctx);

// tyfn (Z: VTy) -> fn (tz: Thk (T Z)) (f: Thk (Z -> carrier)) -> body(Z, tz, f)
template <typename Body>
CompPtr algebra_lambda(const TypePtr& carrier_type, ElabContext& ctx, Body body) {
  std::string z = ctx.fresh("Z");
  std::string tz = ctx.fresh("tz");
  std::string f = ctx.fresh("f");
  TypePtr tz_type = t_thk(t_app(t_var(ctx.monad), t_var(z)));
  TypePtr f_type = t_thk(t_arrow(t_var(z), carrier_type));
  return c_tylam(z, k_vty(), c_lam(tz, tz_type, c_lam(f, f_type, body(z, tz, f))));
}

CompPtr structure_rec(const TypePtr& s, ElabContext& ctx) {
  switch (s->tag) {
    case TypeTag::Thk:
    case TypeTag::Unit:
    case TypeTag::Prod:
    case TypeTag::Sum:
    case TypeTag::Exists:
      return c_comatch({});
    case TypeTag::Prim:
      if (s->prim == PrimType::OS)
        throw ElabError("NoStructure", s->span, "OS has no algebra structure, so it cannot appear under a monadic block");
      return c_comatch({});
    case TypeTag::Var: {
      auto it = ctx.structures.find(s->name);
      if (it == ctx.structures.end())
        throw ElabError("NoStructure", s->span, "no structure in scope for type variable " + s->name);
      return c_force(v_var(it->second));
    }
    case TypeTag::Ret: {
      TypePtr a = carrier(s->a, ctx.monad);
      return algebra_lambda(carrier(s, ctx.monad), ctx, [&](const std::string& z, const std::string& tz,
                                                             const std::string& f) {
        CompPtr bind = c_dtor(c_force(v_var(ctx.instance)), "bind");
        return c_app(c_app(c_tyapp(c_tyapp(bind, t_var(z)), a), v_var(tz)), v_var(f));
      });
    }
    case TypeTag::Arrow: {
      TypePtr a = carrier(s->a, ctx.monad);
      return algebra_lambda(carrier(s, ctx.monad), ctx, [&](const std::string& z, const std::string& tz,
                                                             const std::string& f) {
        std::string x = ctx.fresh("x");
        std::string zv = ctx.fresh("z");
        CompPtr call = c_app(c_app(c_force(v_var(f)), v_var(zv)), v_var(x));
        return c_lam(x, a, apply_algebra(structure_rec(s->b, ctx), z, tz, call, zv));
      });
    }
    case TypeTag::With:
      return algebra_lambda(carrier(s, ctx.monad), ctx, [&](const std::string& z, const std::string& tz,
                                                             const std::string& f) {
        std::vector<Arm> arms;
        for (const auto& [tag, ty] : s->fields) {
          std::string zv = ctx.fresh("z");
          CompPtr call = c_dtor(c_app(c_force(v_var(f)), v_var(zv)), tag);
          arms.push_back({tag, "", apply_algebra(structure_rec(ty, ctx), z, tz, call, zv)});
        }
        return c_comatch(std::move(arms));
      });
    case TypeTag::Forall:
      return algebra_lambda(carrier(s, ctx.monad), ctx, [&](const std::string& z, const std::string& tz,
                                                             const std::string& f) {
        StructureScope scope(ctx, s->name);
        std::string str = ctx.bind_structure(s->name);
        std::string zv = ctx.fresh("z");
        CompPtr call = c_app(c_tyapp(c_app(c_force(v_var(f)), v_var(zv)), t_var(s->name)), v_var(str));
        CompPtr inner = apply_algebra(structure_rec(s->a, ctx), z, tz, call, zv);
        return c_tylam(s->name, s->kind, c_lam(str, t_thk(sig(s->kind, t_var(s->name), ctx.monad)), inner));
      });
    case TypeTag::Nu: {
      TypePtr nu = carrier(s, ctx.monad);
      std::string self = ctx.fresh("str");
      std::vector<std::pair<std::string, KindPtr>> params;
      std::vector<std::string> param_structs;
      for (KindPtr k = s->kind; k->tag == Kind::Tag::Arrow; k = k->cod) {
        params.emplace_back(ctx.fresh("X"), k->dom);
        param_structs.push_back(ctx.fresh("str_X"));
      }
      TypePtr applied = nu;
      for (const auto& [x, k] : params) applied = t_app(applied, t_var(x));
      CompPtr unfolded_alg;
      {
        StructureScope scope(ctx, s->name);
        ctx.structures[s->name] = self;
        unfolded_alg = subst_type_comp(structure_rec(s->a, ctx), nu, s->name);
      }
      for (std::size_t i = 0; i < params.size(); ++i)
        unfolded_alg = c_app(c_tyapp(unfolded_alg, t_var(params[i].first)), v_var(param_structs[i]));
      CompPtr body = algebra_lambda(normalize(applied), ctx, [&](const std::string& z, const std::string& tz,
                                                                  const std::string& f) {
        std::string zv = ctx.fresh("z");
        CompPtr call = c_unroll(c_app(c_force(v_var(f)), v_var(zv)));
        return c_roll(apply_algebra(unfolded_alg, z, tz, call, zv));
      });
      for (std::size_t i = params.size(); i-- > 0;) {
        const auto& [x, k] = params[i];
        body = c_tylam(x, k, c_lam(param_structs[i], t_thk(sig(k, t_var(x), ctx.monad)), body));
      }
      return c_fix(self, t_thk(sig(s->kind, nu, ctx.monad)), body);
    }
    case TypeTag::Lam: {
      StructureScope scope(ctx, s->name);
      std::string str = ctx.bind_structure(s->name);
      CompPtr inner = structure_rec(s->a, ctx);
      return c_tylam(s->name, s->kind, c_lam(str, t_thk(sig(s->kind, t_var(s->name), ctx.monad)), inner));
    }
    case TypeTag::App: {
      CompPtr fun = structure_rec(s->a, ctx);
      CompPtr arg = structure_rec(s->b, ctx);
      return c_app(c_tyapp(fun, carrier(s->b, ctx.monad)), v_thunk(arg));
    }
  }
  throw ElabError("NoStructure", s->span, "no structure for this type");
}

}  // namespace

CompPtr structure(const TypePtr& s, ElabContext& ctx) { return structure_rec(normalize(s), ctx); }

// Term translation

namespace {

class Translator {
 public:
  Translator(ElabContext& ctx, BlockGlobals* globals, const NameSet& locals) : ctx_(ctx), globals_(globals) {
    for (const auto& x : locals) locals_.push_back(x);
  }

  ValuePtr value(const ValuePtr& v) {
    switch (v->tag) {
      case ValueTag::Var:
        if (is_local(v->name)) return v;
        return free_var(v);
      case ValueTag::Prim:
        return builtin(v);
      case ValueTag::Thunk:
        return v_thunk(comp(v->comp), v->span);
      case ValueTag::Pair:
        return v_pair(value(v->a), value(v->b), v->span);
      case ValueTag::Inj:
        return v_inj(v->name, value(v->a), v->span);
      case ValueTag::Pack: {
        ValuePtr payload = v_pair(v_thunk(structure(v->type, ctx_)), value(v->a));
        return v_pack(carrier(v->type, ctx_.monad), payload, v->span);
      }
      default:
        return v;
    }
  }

  CompPtr comp(const CompPtr& m) {
    const std::string& T = ctx_.monad;
    switch (m->tag) {
      case CompTag::Force:
        return c_force(value(m->val), m->span);
      case CompTag::Let: {
        ValuePtr v = value(m->val);
        Local l(*this, m->x);
        return c_let(m->x, v, comp(m->m), m->span);
      }
      case CompTag::LetPair: {
        ValuePtr v = value(m->val);
        Local l1(*this, m->x);
        Local l2(*this, m->y);
        return c_letpair(m->x, m->y, v, comp(m->m), m->span);
      }
      case CompTag::Match: {
        ValuePtr v = value(m->val);
        std::vector<Arm> arms;
        for (const auto& arm : m->arms) {
          Local l(*this, arm.binder);
          arms.push_back({arm.tag, arm.binder, comp(arm.body)});
        }
        return c_match(v, std::move(arms), m->span);
      }
      case CompTag::Unpack: {
        ValuePtr v = value(m->val);
        StructureScope scope(ctx_, m->x);
        std::string str = ctx_.bind_structure(m->x);
        std::string p = ctx_.fresh("p");
        Local l1(*this, str);
        Local l2(*this, m->y);
        CompPtr body = c_letpair(str, m->y, v_var(p), comp(m->m));
        return c_unpack(m->x, p, v, body, m->span);
      }
      case CompTag::Return: {
        need(m->type, m, "payload type");
        CompPtr ret = c_dtor(c_force(v_var(ctx_.instance)), "return");
        return c_app(c_tyapp(ret, carrier(m->type, T)), value(m->val), m->span);
      }
      case CompTag::Bind: {
        need(m->type, m, "head type");
        need(m->type2, m, "body type");
        TypePtr a = carrier(m->type, T);
        CompPtr head = comp(m->m0);
        CompPtr body;
        {
          Local l(*this, m->x);
          body = comp(m->m);
        }
        CompPtr alg = structure(m->type2, ctx_);
        return c_app(c_app(c_tyapp(alg, a), v_thunk(head)), v_thunk(c_lam(m->x, a, body)), m->span);
      }
      case CompTag::Lam: {
        need(m->type, m, "parameter type");
        Local l(*this, m->x);
        return c_lam(m->x, carrier(m->type, T), comp(m->m), m->span);
      }
      case CompTag::App:
        return c_app(comp(m->m), value(m->val), m->span);
      case CompTag::Comatch: {
        std::vector<Arm> arms;
        for (const auto& arm : m->arms) arms.push_back({arm.tag, "", comp(arm.body)});
        return c_comatch(std::move(arms), m->span);
      }
      case CompTag::Dtor:
        return c_dtor(comp(m->m), m->x, m->span);
      case CompTag::TyLam: {
        if (!m->kind) need(nullptr, m, "kind");
        StructureScope scope(ctx_, m->x);
        std::string str = ctx_.bind_structure(m->x);
        Local l(*this, str);
        CompPtr body = comp(m->m);
        return c_tylam(m->x, m->kind, c_lam(str, t_thk(sig(m->kind, t_var(m->x), T)), body), m->span);
      }
      case CompTag::TyApp:
        return c_app(c_tyapp(comp(m->m), carrier(m->type, T)), v_thunk(structure(m->type, ctx_)), m->span);
      case CompTag::Roll:
        return c_roll(comp(m->m), m->span);
      case CompTag::Unroll:
        return c_unroll(comp(m->m), m->span);
      case CompTag::Fix: {
        need(m->type, m, "fix type");
        Local l(*this, m->x);
        return c_fix(m->x, carrier(m->type, T), comp(m->m), m->span);
      }
      case CompTag::Monadic:
        throw ElabError("NestedBlock", m->span, "monadic block reached the translation before elimination");
    }
    return m;
  }

 private:
  ElabContext& ctx_;
  BlockGlobals* globals_;
  std::vector<std::string> locals_;
  std::vector<std::string> inlining_;

  struct Local {
    Translator& t;
    Local(Translator& tr, const std::string& x) : t(tr) { t.locals_.push_back(x); }
    ~Local() { t.locals_.pop_back(); }
  };

  bool is_local(const std::string& x) const {
    return std::find(locals_.rbegin(), locals_.rend(), x) != locals_.rend();
  }

  void need(const TypePtr& t, const CompPtr& m, const char* what) {
    if (t) return;
    throw ElabError("MissingAnnotation", m->span,
                    std::string(tag_name(m->tag)) + " lacks its " + what + "; translate only checked terms");
  }

  ValuePtr free_var(const ValuePtr& v) {
    const TypePtr* type = globals_ ? globals_->global_type(v->name) : nullptr;
    if (!type) {
      if (find_builtin(v->name)) return builtin(v);
      throw ElabError("UnboundVariable", v->span, "free variable " + v->name + " inside a monadic block");
    }
    if ((*type)->tag == TypeTag::Thk) {
      std::string mo = globals_->companion(v->name);
      CompPtr call = c_app(c_tyapp(c_force(v_var(mo)), t_var(ctx_.monad)), v_var(ctx_.instance));
      return v_thunk(call, v->span);
    }
    if (std::find(inlining_.begin(), inlining_.end(), v->name) != inlining_.end())
      throw ElabError("CyclicDefinition", v->span, "cannot inline recursive non-thunk definition " + v->name);
    inlining_.push_back(v->name);
    std::vector<std::string> saved;
    std::swap(saved, locals_);
    ValuePtr out = value(globals_->global_value(v->name));
    std::swap(saved, locals_);
    inlining_.pop_back();
    return out;
  }

  // Eta-expand a builtin so that its Ret results go through the monad.
  ValuePtr builtin(const ValuePtr& v) {
    const Builtin* b = find_builtin(v->name);
    if (!b) throw ElabError("UnboundVariable", v->span, "unknown builtin " + v->name);
    return v_thunk(wrap(b->type->a, c_force(v_prim(v->name)), v->name), v->span);
  }

  CompPtr wrap(const TypePtr& type, CompPtr head, const std::string& name) {
    switch (type->tag) {
      case TypeTag::Arrow: {
        if (!alpha_eq(carrier(type->a, ctx_.monad), type->a))
          throw ElabError("UnsupportedBuiltin", {}, "builtin " + name + " takes a computation-typed argument");
        std::string x = ctx_.fresh("x");
        return c_lam(x, type->a, wrap(type->b, c_app(head, v_var(x)), name));
      }
      case TypeTag::Forall: {
        std::string s = ctx_.fresh("s");
        CompPtr inner = wrap(type->a, c_tyapp(head, t_var(type->name)), name);
        return c_tylam(type->name, type->kind,
                       c_lam(s, t_thk(sig(type->kind, t_var(type->name), ctx_.monad)), inner));
      }
      case TypeTag::Ret: {
        std::string r = ctx_.fresh("r");
        TypePtr result = t_app(t_var(ctx_.monad), type->a);
        CompPtr ret = c_app(c_tyapp(c_dtor(c_force(v_var(ctx_.instance)), "return"), type->a), v_var(r));
        return c_bind(r, head, ret, type->a, result);
      }
      default:
        return head;
    }
  }
};

}  // namespace

ValuePtr translate_value(const ValuePtr& v, ElabContext& ctx, BlockGlobals* globals, const NameSet& locals) {
  return Translator(ctx, globals, locals).value(v);
}

CompPtr translate_comp(const CompPtr& m, ElabContext& ctx, BlockGlobals* globals, const NameSet& locals) {
  return Translator(ctx, globals, locals).comp(m);
}

// Block elimination

bool has_blocks(const ValuePtr& v) {
  if (v->comp && has_blocks(v->comp)) return true;
  if (v->a && has_blocks(v->a)) return true;
  return v->b && has_blocks(v->b);
}

bool has_blocks(const CompPtr& m) {
  if (m->tag == CompTag::Monadic) return true;
  if (m->val && has_blocks(m->val)) return true;
  if (m->m0 && has_blocks(m->m0)) return true;
  if (m->m && has_blocks(m->m)) return true;
  for (const auto& arm : m->arms)
    if (has_blocks(arm.body)) return true;
  return false;
}

ValuePtr eliminate_blocks(const ValuePtr& v, BlockGlobals* globals) {
  if (!has_blocks(v)) return v;
  auto n = std::make_shared<Value>(*v);
  if (n->comp) n->comp = eliminate_blocks(n->comp, globals);
  if (n->a) n->a = eliminate_blocks(n->a, globals);
  if (n->b) n->b = eliminate_blocks(n->b, globals);
  return seal(n);
}

CompPtr eliminate_blocks(const CompPtr& m, BlockGlobals* globals) {
  if (!has_blocks(m)) return m;
  if (m->tag == CompTag::Monadic) {
    CompPtr body = eliminate_blocks(m->m, globals);
    ElabContext ctx = ElabContext::make(all_names(body));
    CompPtr translated = translate_comp(body, ctx, globals);
    TypePtr instance = t_thk(rel_monad_type(t_var(ctx.monad)));
    return c_tylam(ctx.monad, k_arrow(k_vty(), k_cty()), c_lam(ctx.instance, instance, translated), m->span);
  }
  auto n = std::make_shared<Comp>(*m);
  if (n->val) n->val = eliminate_blocks(n->val, globals);
  if (n->m0) n->m0 = eliminate_blocks(n->m0, globals);
  if (n->m) n->m = eliminate_blocks(n->m, globals);
  for (auto& arm : n->arms) arm.body = eliminate_blocks(arm.body, globals);
  return seal(n);
}

}  // namespace cbpv

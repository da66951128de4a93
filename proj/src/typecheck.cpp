#include "cbpv/typecheck.hpp"

#include <algorithm>

#include "cbpv/builtins.hpp"
#include "cbpv/elaborate.hpp"
#include "cbpv/error.hpp"
#include "cbpv/parser.hpp"

namespace cbpv {

namespace {

template <typename Env>
struct Restore {
  Env& env;
  std::size_t mark;
  explicit Restore(Env& e) : env(e), mark(e.size()) {}
  ~Restore() { env.resize(mark); }
};

class Run {
 public:
  Run(const GlobalScope* globals, const TypeEnv& delta, const ValueEnv& gamma) : globals_(globals), delta_(delta) {
    for (const auto& [x, t] : gamma) gamma_.emplace_back(x, normalize(t));
  }

  // Values

  ValuePtr check_value(const ValuePtr& v, const TypePtr& a) {
    switch (v->tag) {
      case ValueTag::Thunk: {
        if (a->tag != TypeTag::Thk) mismatch(v->span, a, "a thunk", false);
        return v_thunk(check(v->comp, a->a), v->span);
      }
      case ValueTag::Pair: {
        if (a->tag != TypeTag::Prod) mismatch(v->span, a, "a pair", false);
        ValuePtr x = check_value(v->a, a->a);
        ValuePtr y = check_value(v->b, a->b);
        return v_pair(x, y, v->span);
      }
      case ValueTag::Inj: {
        if (a->tag != TypeTag::Sum) mismatch(v->span, a, "constructor " + v->name, false);
        const TypePtr* field = find_field(*a, v->name);
        if (!field)
          throw TypeError("UnknownCtor", v->span, "constructor " + v->name + " is not part of " + print(a), false, a);
        return v_inj(v->name, check_value(v->a, *field), v->span);
      }
      case ValueTag::Pack: {
        if (a->tag != TypeTag::Exists) mismatch(v->span, a, "a package", false);
        TypePtr witness = annotation(v->type, a->kind);
        TypePtr payload = normalize(subst_type(a->a, witness, a->name));
        return v_pack(witness, check_value(v->a, payload), v->span);
      }
      default: {
        auto [out, found] = synth_value(v);
        if (!type_equal(found, a))
          throw TypeError("TypeMismatch", v->span, "expected " + print(a) + ", found " + print(found), false, a,
                          found);
        return out;
      }
    }
  }

  std::pair<ValuePtr, TypePtr> synth_value(const ValuePtr& v) {
    switch (v->tag) {
      case ValueTag::Var: {
        if (const TypePtr* t = lookup(gamma_, v->name)) return {v, *t};
        if (globals_)
          if (const TypePtr* t = globals_->global_type(v->name)) return {v, normalize(*t)};
        if (const Builtin* b = find_builtin(v->name)) return {v, b->type};
        throw TypeError("UnboundVariable", v->span, "unbound variable " + v->name, false);
      }
      case ValueTag::Prim: {
        const Builtin* b = find_builtin(v->name);
        if (!b) throw TypeError("UnboundVariable", v->span, "unknown builtin " + v->name, false);
        return {v, b->type};
      }
      case ValueTag::Thunk: {
        auto [m, b] = synth(v->comp);
        return {v_thunk(m, v->span), t_thk(b)};
      }
      case ValueTag::Unit:
        return {v, t_unit()};
      case ValueTag::Int:
        return {v, t_prim(PrimType::Int)};
      case ValueTag::String:
        return {v, t_prim(PrimType::String)};
      case ValueTag::Bool:
        return {v, t_prim(PrimType::Bool)};
      case ValueTag::Pair: {
        auto [x, a] = synth_value(v->a);
        auto [y, b] = synth_value(v->b);
        return {v_pair(x, y, v->span), t_prod(a, b)};
      }
      case ValueTag::Inj:
        throw TypeError("CannotSynthesize", v->span,
                        "cannot infer the sum type of constructor " + v->name + "; add an annotation", false);
      case ValueTag::Pack:
        throw TypeError("CannotSynthesize", v->span, "cannot infer the type of a package; add an annotation", false);
    }
    throw TypeError("CannotSynthesize", v->span, "cannot infer a type", false);
  }

  // Computations

  CompPtr check(const CompPtr& m, const TypePtr& b) {
    switch (m->tag) {
      case CompTag::Lam: {
        if (b->tag != TypeTag::Arrow) mismatch(m->span, b, "a function", true);
        TypePtr a = b->a;
        if (m->type) {
          TypePtr ann = annotation(m->type, k_vty());
          if (!type_equal(ann, a))
            throw TypeError("TypeMismatch", m->span,
                            "parameter " + m->x + " annotated " + print(ann) + " but expected " + print(a), true, a,
                            ann);
        }
        Restore g(gamma_);
        gamma_.emplace_back(m->x, a);
        return c_lam(m->x, a, check(m->m, b->b), m->span);
      }
      case CompTag::Comatch:
        return check_comatch(m, b);
      case CompTag::TyLam: {
        if (b->tag != TypeTag::Forall) mismatch(m->span, b, "a type abstraction", true);
        if (m->kind && !kind_eq(m->kind, b->kind))
          throw TypeError("KindMismatch", m->span,
                          "type parameter " + m->x + " has kind " + print(m->kind) + ", expected " + print(b->kind),
                          true, b);
        auto [x, body] = fresh_type_binder(m->x, m->m);
        TypePtr inner = normalize(subst_type(b->a, t_var(x), b->name));
        Restore d(delta_);
        delta_.emplace_back(x, b->kind);
        return c_tylam(x, b->kind, check(body, inner), m->span);
      }
      case CompTag::Roll: {
        TypePtr unfolded = unfold_nu(b);
        if (!unfolded) mismatch(m->span, b, "roll (a recursive computation type)", true);
        return c_roll(check(m->m, unfolded), m->span);
      }
      case CompTag::Fix: {
        TypePtr self = t_thk(b);
        if (m->type) {
          TypePtr ann = annotation(m->type, k_vty());
          if (!type_equal(ann, self))
            throw TypeError("TypeMismatch", m->span, "fix annotated " + print(ann) + " but expected " + print(self),
                            true, self, ann);
        }
        Restore g(gamma_);
        gamma_.emplace_back(m->x, self);
        return c_fix(m->x, self, check(m->m, b), m->span);
      }
      case CompTag::Match:
        return match(m, b).first;
      case CompTag::Let: {
        auto [v, a] = synth_value(m->val);
        Restore g(gamma_);
        gamma_.emplace_back(m->x, a);
        return c_let(m->x, v, check(m->m, b), m->span);
      }
      case CompTag::LetPair: {
        auto [v, a] = synth_value(m->val);
        if (a->tag != TypeTag::Prod)
          throw TypeError("NotAProduct", m->val->span, "let-pair of a value of type " + print(a), true, nullptr, a);
        Restore g(gamma_);
        gamma_.emplace_back(m->x, a->a);
        gamma_.emplace_back(m->y, a->b);
        return c_letpair(m->x, m->y, v, check(m->m, b), m->span);
      }
      case CompTag::Unpack:
        return unpack(m, b).first;
      case CompTag::Bind: {
        auto [head, r] = synth(m->m0);
        if (r->tag != TypeTag::Ret)
          throw TypeError("NotRet", m->m0->span, "do-bound computation has type " + print(r) + ", not Ret", true,
                          nullptr, r);
        Restore g(gamma_);
        gamma_.emplace_back(m->x, r->a);
        return c_bind(m->x, head, check(m->m, b), r->a, b, m->span);
      }
      case CompTag::Return: {
        if (b->tag != TypeTag::Ret) mismatch(m->span, b, "ret", true);
        return c_return(check_value(m->val, b->a), b->a, m->span);
      }
      default: {
        auto [out, found] = synth(m);
        if (!type_equal(found, b))
          throw TypeError("TypeMismatch", m->span, "expected " + print(b) + ", found " + print(found), true, b,
                          found);
        return out;
      }
    }
  }

  std::pair<CompPtr, TypePtr> synth(const CompPtr& m) {
    switch (m->tag) {
      case CompTag::Force: {
        auto [v, t] = synth_value(m->val);
        if (t->tag != TypeTag::Thk)
          throw TypeError("NotAThunk", m->span, "forcing a value of type " + print(t), true, nullptr, t);
        return {c_force(v, m->span), t->a};
      }
      case CompTag::App: {
        auto [f, t] = synth(m->m);
        if (t->tag != TypeTag::Arrow)
          throw TypeError("NotAFunction", m->span, "applying a computation of type " + print(t), true, nullptr, t);
        return {c_app(f, check_value(m->val, t->a), m->span), t->b};
      }
      case CompTag::TyApp: {
        auto [f, t] = synth(m->m);
        if (t->tag != TypeTag::Forall)
          throw TypeError("NotAForall", m->span, "type application to a computation of type " + print(t), true,
                          nullptr, t);
        TypePtr arg = annotation(m->type, t->kind);
        return {c_tyapp(f, arg, m->span), normalize(subst_type(t->a, arg, t->name))};
      }
      case CompTag::Dtor: {
        auto [f, t] = synth(m->m);
        if (t->tag != TypeTag::With) {
          std::string hint = unfold_nu(t) ? " (unroll it first)" : "";
          throw TypeError("NotAWith", m->span, "destructor ." + m->x + " on a computation of type " + print(t) + hint,
                          true, nullptr, t);
        }
        const TypePtr* field = find_field(*t, m->x);
        if (!field)
          throw TypeError("MissingDtor", m->span, "no destructor ." + m->x + " in " + print(t), true, nullptr, t);
        return {c_dtor(f, m->x, m->span), *field};
      }
      case CompTag::Unroll: {
        auto [f, t] = synth(m->m);
        TypePtr unfolded = unfold_nu(t);
        if (!unfolded)
          throw TypeError("NotANu", m->span, "unroll of a computation of type " + print(t), true, nullptr, t);
        return {c_unroll(f, m->span), unfolded};
      }
      case CompTag::Return: {
        auto [v, a] = synth_value(m->val);
        return {c_return(v, a, m->span), t_ret(a)};
      }
      case CompTag::Bind: {
        auto [head, r] = synth(m->m0);
        if (r->tag != TypeTag::Ret)
          throw TypeError("NotRet", m->m0->span, "do-bound computation has type " + print(r) + ", not Ret", true,
                          nullptr, r);
        Restore g(gamma_);
        gamma_.emplace_back(m->x, r->a);
        auto [body, b] = synth(m->m);
        return {c_bind(m->x, head, body, r->a, b, m->span), b};
      }
      case CompTag::Lam: {
        if (!m->type) cannot(m, "function parameter " + m->x + " needs a type annotation here");
        TypePtr a = annotation(m->type, k_vty());
        Restore g(gamma_);
        gamma_.emplace_back(m->x, a);
        auto [body, b] = synth(m->m);
        return {c_lam(m->x, a, body, m->span), t_arrow(a, b)};
      }
      case CompTag::TyLam: {
        if (!m->kind) cannot(m, "type parameter " + m->x + " needs a kind annotation here");
        auto [x, body0] = fresh_type_binder(m->x, m->m);
        Restore d(delta_);
        delta_.emplace_back(x, m->kind);
        auto [body, b] = synth(body0);
        return {c_tylam(x, m->kind, body, m->span), t_forall(x, m->kind, b)};
      }
      case CompTag::Fix: {
        if (!m->type) cannot(m, "fix binder " + m->x + " needs a type annotation here");
        TypePtr self = annotation(m->type, k_vty());
        if (self->tag != TypeTag::Thk)
          throw TypeError("NotAThunk", m->span, "fix binder must have a Thk type, found " + print(self), true,
                          nullptr, self);
        Restore g(gamma_);
        gamma_.emplace_back(m->x, self);
        return {c_fix(m->x, self, check(m->m, self->a), m->span), self->a};
      }
      case CompTag::Let: {
        auto [v, a] = synth_value(m->val);
        Restore g(gamma_);
        gamma_.emplace_back(m->x, a);
        auto [body, b] = synth(m->m);
        return {c_let(m->x, v, body, m->span), b};
      }
      case CompTag::LetPair: {
        auto [v, a] = synth_value(m->val);
        if (a->tag != TypeTag::Prod)
          throw TypeError("NotAProduct", m->val->span, "let-pair of a value of type " + print(a), true, nullptr, a);
        Restore g(gamma_);
        gamma_.emplace_back(m->x, a->a);
        gamma_.emplace_back(m->y, a->b);
        auto [body, b] = synth(m->m);
        return {c_letpair(m->x, m->y, v, body, m->span), b};
      }
      case CompTag::Unpack:
        return unpack(m, nullptr);
      case CompTag::Match:
        return match(m, nullptr);
      case CompTag::Comatch: {
        check_arm_tags(m);
        TypeFields fields;
        std::vector<Arm> arms;
        for (const auto& arm : m->arms) {
          auto [body, b] = synth(arm.body);
          fields.emplace_back(arm.tag, b);
          arms.push_back({arm.tag, "", body});
        }
        return {c_comatch(std::move(arms), m->span), t_with(std::move(fields))};
      }
      case CompTag::Roll:
        cannot(m, "roll needs a known recursive type; add an annotation");
      case CompTag::Monadic: {
        for (const auto& x : m->m->fv) {
          if (globals_ && globals_->global_type(x)) continue;
          if (find_builtin(x)) continue;
          throw TypeError("BlockNotClosed", m->span, "monadic block mentions free variable " + x, true);
        }
        if (!m->m->ftv.empty())
          throw TypeError("BlockNotClosed", m->span, "monadic block mentions free type variable " + m->m->ftv.front(),
                          true);
        TypeEnv saved_delta;
        ValueEnv saved_gamma;
        std::swap(saved_delta, delta_);
        std::swap(saved_gamma, gamma_);
        std::pair<CompPtr, TypePtr> inner;
        try {
          inner = synth(m->m);
        } catch (...) {
          std::swap(saved_delta, delta_);
          std::swap(saved_gamma, gamma_);
          throw;
        }
        std::swap(saved_delta, delta_);
        std::swap(saved_gamma, gamma_);
        return {c_monadic(inner.first, m->span), Checker::block_type(inner.second)};
      }
    }
    cannot(m, "cannot infer a type");
  }

 private:
  const GlobalScope* globals_;
  TypeEnv delta_;
  ValueEnv gamma_;

  [[noreturn]] void mismatch(Span span, const TypePtr& expected, const std::string& what, bool comp) {
    throw TypeError("TypeMismatch", span, "expected " + print(expected) + ", found " + what, comp, expected);
  }

  [[noreturn]] void cannot(const CompPtr& m, const std::string& message) {
    throw TypeError("CannotSynthesize", m->span, std::string(tag_name(m->tag)) + ": " + message, true);
  }

  TypePtr annotation(const TypePtr& t, const KindPtr& k) {
    check_kind(delta_, t, k);
    return normalize(t);
  }

  // Rename a type binder that would shadow a variable already in scope.
  std::pair<std::string, CompPtr> fresh_type_binder(const std::string& x, const CompPtr& body) {
    if (!lookup(delta_, x)) return {x, body};
    NameSet avoid = body->ftv;
    for (const auto& [name, k] : delta_) avoid = set_union(avoid, NameSet{name});
    std::string renamed = fresh_name(x, avoid);
    return {renamed, subst_type_comp(body, t_var(renamed), x)};
  }

  void check_arm_tags(const CompPtr& m) {
    for (std::size_t i = 0; i < m->arms.size(); ++i)
      for (std::size_t j = i + 1; j < m->arms.size(); ++j)
        if (m->arms[i].tag == m->arms[j].tag)
          throw TypeError("DuplicateArm", m->arms[j].body->span, "duplicate arm for " + m->arms[i].tag, true);
  }

  CompPtr check_comatch(const CompPtr& m, const TypePtr& b) {
    if (b->tag != TypeTag::With) mismatch(m->span, b, "comatch", true);
    check_arm_tags(m);
    std::vector<Arm> arms;
    for (const auto& arm : m->arms) {
      const TypePtr* field = find_field(*b, arm.tag);
      if (!field)
        throw TypeError("ExtraArm", arm.body->span, "comatch arm ." + arm.tag + " is not part of " + print(b), true,
                        b);
      arms.push_back({arm.tag, "", check(arm.body, *field)});
    }
    for (const auto& [tag, ty] : b->fields) {
      bool present = std::any_of(m->arms.begin(), m->arms.end(), [&](const Arm& a) { return a.tag == tag; });
      if (!present)
        throw TypeError("NonExhaustiveMatch", m->span, "comatch is missing arm ." + tag + " of " + print(b), true, b);
    }
    return c_comatch(std::move(arms), m->span);
  }

  // With b null the arms synthesize and must agree.
  std::pair<CompPtr, TypePtr> match(const CompPtr& m, TypePtr b) {
    auto [v, s] = synth_value(m->val);
    if (s->tag != TypeTag::Sum)
      throw TypeError("NotASum", m->val->span, "match on a value of type " + print(s), true, nullptr, s);
    for (std::size_t i = 0; i < m->arms.size(); ++i)
      for (std::size_t j = i + 1; j < m->arms.size(); ++j)
        if (m->arms[i].tag == m->arms[j].tag)
          throw TypeError("DuplicateArm", m->arms[j].body->span, "duplicate branch for " + m->arms[i].tag, true);
    for (const auto& arm : m->arms)
      if (!find_field(*s, arm.tag))
        throw TypeError("UnknownCtor", arm.body->span, "constructor " + arm.tag + " is not part of " + print(s), true,
                        s);
    for (const auto& [tag, ty] : s->fields) {
      bool present = std::any_of(m->arms.begin(), m->arms.end(), [&](const Arm& a) { return a.tag == tag; });
      if (!present)
        throw TypeError("NonExhaustiveMatch", m->span, "match is missing branch " + tag + " of " + print(s), true,
                        nullptr, s);
    }
    if (!b && m->arms.empty()) cannot(m, "empty match needs a known result type");
    std::vector<Arm> arms;
    for (const auto& arm : m->arms) {
      Restore g(gamma_);
      gamma_.emplace_back(arm.binder, *find_field(*s, arm.tag));
      if (b) {
        arms.push_back({arm.tag, arm.binder, check(arm.body, b)});
      } else {
        auto [body, t] = synth(arm.body);
        b = t;
        arms.push_back({arm.tag, arm.binder, body});
      }
    }
    return {c_match(v, std::move(arms), m->span), b};
  }

  std::pair<CompPtr, TypePtr> unpack(const CompPtr& m, TypePtr b) {
    auto [v, e] = synth_value(m->val);
    if (e->tag != TypeTag::Exists)
      throw TypeError("NotExists", m->val->span, "unpack of a value of type " + print(e), true, nullptr, e);
    auto [x, body0] = fresh_type_binder(m->x, m->m);
    TypePtr payload = normalize(subst_type(e->a, t_var(x), e->name));
    Restore d(delta_);
    Restore g(gamma_);
    delta_.emplace_back(x, e->kind);
    gamma_.emplace_back(m->y, payload);
    CompPtr body;
    if (b) {
      body = check(body0, b);
    } else {
      auto r = synth(body0);
      body = r.first;
      b = r.second;
      if (contains(b->ftv, x))
        throw TypeError("EscapingType", m->span, "type variable " + x + " escapes its unpack in " + print(b), true,
                        nullptr, b);
    }
    return {c_unpack(x, m->y, v, body, m->span), b};
  }
};

}  // namespace

TypePtr Checker::block_type(const TypePtr& b) {
  std::string t = fresh_name("T", type_names(b));
  KindPtr k = k_arrow(k_vty(), k_cty());
  return normalize(t_forall(t, k, t_arrow(t_thk(rel_monad_type(t_var(t))), carrier(b, t))));
}

ValuePtr Checker::check_value(const TypeEnv& delta, const ValueEnv& gamma, const ValuePtr& v, const TypePtr& a) {
  Run run(globals_, delta, gamma);
  check_kind(delta, a, k_vty());
  return run.check_value(v, normalize(a));
}

std::pair<ValuePtr, TypePtr> Checker::synth_value(const TypeEnv& delta, const ValueEnv& gamma, const ValuePtr& v) {
  Run run(globals_, delta, gamma);
  return run.synth_value(v);
}

CompPtr Checker::check_comp(const TypeEnv& delta, const ValueEnv& gamma, const CompPtr& m, const TypePtr& b) {
  Run run(globals_, delta, gamma);
  check_kind(delta, b, k_cty());
  return run.check(m, normalize(b));
}

std::pair<CompPtr, TypePtr> Checker::synth_comp(const TypeEnv& delta, const ValueEnv& gamma, const CompPtr& m) {
  Run run(globals_, delta, gamma);
  return run.synth(m);
}

void check_value(const TypeEnv& delta, const ValueEnv& gamma, const ValuePtr& v, const TypePtr& a,
                 const GlobalScope* globals) {
  Checker(globals).check_value(delta, gamma, v, a);
}

TypePtr synth_computation(const TypeEnv& delta, const ValueEnv& gamma, const CompPtr& m,
                          const GlobalScope* globals) {
  return Checker(globals).synth_comp(delta, gamma, m).second;
}

void check_computation(const TypeEnv& delta, const ValueEnv& gamma, const CompPtr& m, const TypePtr& b,
                       const GlobalScope* globals) {
  Checker(globals).check_comp(delta, gamma, m, b);
}

void check_monadic_block(const TypeEnv& delta, const ValueEnv& gamma, const CompPtr& block,
                         const TypePtr& declared, const GlobalScope* globals) {
  if (block->tag != CompTag::Monadic)
    throw TypeError("TypeMismatch", block->span, "expected a monadic block", true);
  TypePtr found = synth_computation(delta, gamma, block, globals);
  check_kind(delta, declared, k_cty());
  if (!type_equal(found, declared))
    throw TypeError("TypeMismatch", block->span,
                    "monadic block has type " + print(found) + ", declared " + print(declared), true, declared, found);
}

}  // namespace cbpv

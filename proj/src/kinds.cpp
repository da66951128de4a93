#include "cbpv/kinds.hpp"

#include "cbpv/error.hpp"
#include "cbpv/parser.hpp"

namespace cbpv {

const KindPtr* lookup(const TypeEnv& env, const std::string& name) {
  for (auto it = env.rbegin(); it != env.rend(); ++it)
    if (it->first == name) return &it->second;
  return nullptr;
}

const TypePtr* lookup(const ValueEnv& env, const std::string& name) {
  for (auto it = env.rbegin(); it != env.rend(); ++it)
    if (it->first == name) return &it->second;
  return nullptr;
}

namespace {

class KindChecker {
 public:
  explicit KindChecker(const TypeEnv& env) : env_(env) {}

  KindPtr infer(const TypePtr& t) {
    switch (t->tag) {
      case TypeTag::Var: {
        const KindPtr* k = lookup(env_, t->name);
        if (!k) throw KindError("UnboundTypeVariable", t->span, "unbound type variable " + t->name);
        return *k;
      }
      case TypeTag::Lam: {
        KindPtr body = under(t->name, t->kind, t->a);
        return k_arrow(t->kind, body);
      }
      case TypeTag::App: {
        KindPtr f = infer(t->a);
        if (f->tag != Kind::Tag::Arrow)
          throw KindError("KindMismatch", t->span,
                          "type application: " + print(t->a) + " has kind " + print(f) + ", not a function kind",
                          nullptr, f);
        expect(t->b, f->dom, "type application");
        return f->cod;
      }
      case TypeTag::Thk:
        expect(t->a, k_cty(), "Thk");
        return k_vty();
      case TypeTag::Ret:
        expect(t->a, k_vty(), "Ret");
        return k_cty();
      case TypeTag::Unit:
        return k_vty();
      case TypeTag::Prim:
        return t->prim == PrimType::OS ? k_cty() : k_vty();
      case TypeTag::Prod:
        expect(t->a, k_vty(), "product");
        expect(t->b, k_vty(), "product");
        return k_vty();
      case TypeTag::Arrow:
        expect(t->a, k_vty(), "arrow");
        expect(t->b, k_cty(), "arrow");
        return k_cty();
      case TypeTag::Sum:
      case TypeTag::With: {
        bool sum = t->tag == TypeTag::Sum;
        if (auto dup = duplicate_tag(t->fields))
          throw KindError("DuplicateTag", t->span, std::string(sum ? "sum" : "with") + ": duplicate tag " + *dup);
        for (const auto& [tag, ty] : t->fields) expect(ty, sum ? k_vty() : k_cty(), sum ? "sum" : "with");
        return sum ? k_vty() : k_cty();
      }
      case TypeTag::Exists:
        expect_under(t, k_vty(), "exists");
        return k_vty();
      case TypeTag::Forall:
        expect_under(t, k_cty(), "forall");
        return k_cty();
      case TypeTag::Nu: {
        if (kind_result(t->kind)->tag != Kind::Tag::CTy)
          throw KindError("NuBinderNotCTy", t->span,
                          "rec: binder " + t->name + " has kind " + print(t->kind) + ", which does not end in CTy",
                          k_cty(), t->kind);
        KindPtr body = under(t->name, t->kind, t->a);
        if (!kind_eq(body, t->kind))
          throw KindError("KindMismatch", t->a->span, "rec: body has kind " + print(body) + ", expected " + print(t->kind),
                          t->kind, body);
        return t->kind;
      }
    }
    throw KindError("KindMismatch", t->span, "unknown type constructor");
  }

 private:
  TypeEnv env_;

  KindPtr under(const std::string& x, const KindPtr& k, const TypePtr& body) {
    env_.emplace_back(x, k);
    KindPtr out;
    try {
      out = infer(body);
    } catch (...) {
      env_.pop_back();
      throw;
    }
    env_.pop_back();
    return out;
  }

  void expect(const TypePtr& t, const KindPtr& k, const char* where) {
    KindPtr found = infer(t);
    if (!kind_eq(found, k))
      throw KindError("KindMismatch", t->span,
                      std::string(where) + ": " + print(t) + " has kind " + print(found) + ", expected " + print(k), k,
                      found);
  }

  void expect_under(const TypePtr& t, const KindPtr& k, const char* where) {
    KindPtr found = under(t->name, t->kind, t->a);
    if (!kind_eq(found, k))
      throw KindError("KindMismatch", t->a->span,
                      std::string(where) + ": body has kind " + print(found) + ", expected " + print(k), k, found);
  }
};

}  // namespace

KindPtr infer_kind(const TypeEnv& env, const TypePtr& t) { return KindChecker(env).infer(t); }

void check_kind(const TypeEnv& env, const TypePtr& t, const KindPtr& expected) {
  KindPtr found = infer_kind(env, t);
  if (!kind_eq(found, expected))
    throw KindError("KindMismatch", t->span,
                    print(t) + " has kind " + print(found) + ", expected " + print(expected), expected, found);
}

}  // namespace cbpv

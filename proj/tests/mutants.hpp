#pragma once

// Mutation operators over prelude definitions: swapping two destructor tags
// of a comatch, dropping a comatch arm, and editing a Ret payload type in the
// declared type.

#include <functional>
#include <string>
#include <vector>

#include "cbpv/error.hpp"
#include "cbpv/session.hpp"
#include "cbpv/typecheck.hpp"

namespace oracle {

using namespace cbpv;

struct Mutant {
  std::string def;
  std::string operation;
  TypePtr type;
  ValuePtr value;
};

// Pre-order rewriting of the index-th computation node satisfying `pred`.
class NodeRewriter {
 public:
  using Pred = std::function<bool(const CompPtr&)>;
  using Fn = std::function<CompPtr(const CompPtr&)>;

  NodeRewriter(Pred pred, Fn fn, int target) : pred_(std::move(pred)), fn_(std::move(fn)), target_(target) {}

  int seen() const { return count_; }

  ValuePtr value(const ValuePtr& v) {
    if (!v) return v;
    auto n = std::make_shared<Value>(*v);
    n->comp = comp(v->comp);
    n->a = value(v->a);
    n->b = value(v->b);
    return seal(n);
  }

  CompPtr comp(const CompPtr& m) {
    if (!m) return m;
    if (pred_(m) && count_++ == target_) return fn_(m);
    auto n = std::make_shared<Comp>(*m);
    n->val = value(m->val);
    n->m0 = comp(m->m0);
    n->m = comp(m->m);
    for (auto& a : n->arms) a.body = comp(a.body);
    return seal(n);
  }

 private:
  Pred pred_;
  Fn fn_;
  int target_;
  int count_ = 0;
};

inline int count_nodes(const ValuePtr& v, const NodeRewriter::Pred& pred) {
  NodeRewriter r(pred, [](const CompPtr& m) { return m; }, -1);
  r.value(v);
  return r.seen();
}

inline ValuePtr rewrite_node(const ValuePtr& v, const NodeRewriter::Pred& pred, int index,
                             const NodeRewriter::Fn& fn) {
  NodeRewriter r(pred, fn, index);
  return r.value(v);
}

// The index-th Ret node of a type, with its payload replaced.
inline TypePtr edit_ret(const TypePtr& t, int& index) {
  if (!t) return t;
  if (t->tag == TypeTag::Ret && index-- == 0) {
    bool is_int = t->a->tag == TypeTag::Prim && t->a->prim == PrimType::Int;
    return t_ret(t_prim(is_int ? PrimType::String : PrimType::Int));
  }
  auto n = std::make_shared<Type>(*t);
  n->a = edit_ret(t->a, index);
  n->b = edit_ret(t->b, index);
  for (auto& f : n->fields) f.second = edit_ret(f.second, index);
  return seal(n);
}

inline int count_ret(const TypePtr& t) {
  if (!t) return 0;
  int n = t->tag == TypeTag::Ret ? 1 : 0;
  n += count_ret(t->a) + count_ret(t->b);
  for (const auto& f : t->fields) n += count_ret(f.second);
  return n;
}

inline std::vector<Mutant> prelude_mutants(const Session& s, int per_operation = 2) {
  std::vector<Mutant> out;
  auto is_comatch = [](const CompPtr& m) { return m->tag == CompTag::Comatch && m->arms.size() >= 2; };
  auto is_any_comatch = [](const CompPtr& m) { return m->tag == CompTag::Comatch && !m->arms.empty(); };
  for (const auto& name : s.order()) {
    const Definition* d = s.find(name);
    if (d->companion) continue;
    int swaps = std::min(per_operation, count_nodes(d->source, is_comatch));
    for (int i = 0; i < swaps; ++i)
      out.push_back({name, "swap dtor tags", d->type, rewrite_node(d->source, is_comatch, i, [](const CompPtr& m) {
                       auto arms = m->arms;
                       std::swap(arms[0].tag, arms[1].tag);
                       return c_comatch(arms, m->span);
                     })});
    int drops = std::min(per_operation, count_nodes(d->source, is_any_comatch));
    for (int i = 0; i < drops; ++i)
      out.push_back({name, "drop comatch arm", d->type,
                     rewrite_node(d->source, is_any_comatch, i, [](const CompPtr& m) {
                       auto arms = m->arms;
                       arms.pop_back();
                       return c_comatch(arms, m->span);
                     })});
    int rets = std::min(per_operation, count_ret(d->type));
    for (int i = 0; i < rets; ++i) {
      int index = i;
      out.push_back({name, "edit Ret payload", normalize(edit_ret(d->type, index)), d->source});
    }
  }
  return out;
}

// True when the checker rejects the mutant with a type or kind error.
inline bool rejected(const Session& s, const Mutant& m, std::string* why = nullptr) {
  try {
    Checker(&s).check_value({}, {}, m.value, m.type);
  } catch (const Error& e) {
    if (why) *why = e.what();
    return true;
  }
  return false;
}

}  // namespace oracle

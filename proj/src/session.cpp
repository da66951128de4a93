#include "cbpv/session.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "cbpv/builtins.hpp"
#include "cbpv/error.hpp"
#include "cbpv/kinds.hpp"

#ifndef CBPV_PRELUDE_DIR
#define CBPV_PRELUDE_DIR "prelude"
#endif

namespace cbpv {

namespace {

constexpr std::string_view kCompanionSuffix = "$mo";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("FileNotFound", {}, "cannot read " + path, path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Alias expansion, skipping names shadowed by type binders.
class Expander {
 public:
  explicit Expander(const std::map<std::string, Alias>& aliases) : aliases_(aliases) {}

  TypePtr type(const TypePtr& t) {
    if (!t || !mentions_alias(t)) return t;
    switch (t->tag) {
      case TypeTag::Var:
        return lookup(t->name) ? *lookup(t->name) : t;
      case TypeTag::Lam:
      case TypeTag::Exists:
      case TypeTag::Forall:
      case TypeTag::Nu: {
        bound_.push_back(t->name);
        TypePtr body = type(t->a);
        bound_.pop_back();
        auto n = std::make_shared<Type>(*t);
        n->a = body;
        return seal(n);
      }
      default: {
        auto n = std::make_shared<Type>(*t);
        n->a = type(t->a);
        n->b = type(t->b);
        for (auto& [tag, ty] : n->fields) ty = type(ty);
        return seal(n);
      }
    }
  }

  ValuePtr value(const ValuePtr& v) {
    if (!v) return v;
    auto n = std::make_shared<Value>(*v);
    n->type = type(v->type);
    n->comp = comp(v->comp);
    n->a = value(v->a);
    n->b = value(v->b);
    return seal(n);
  }

  CompPtr comp(const CompPtr& m) {
    if (!m) return m;
    auto n = std::make_shared<Comp>(*m);
    n->val = value(m->val);
    n->m0 = comp(m->m0);
    n->type = type(m->type);
    n->type2 = type(m->type2);
    bool binds_type = m->tag == CompTag::TyLam || m->tag == CompTag::Unpack;
    if (binds_type) bound_.push_back(m->x);
    n->m = comp(m->m);
    for (auto& arm : n->arms) arm.body = comp(arm.body);
    if (binds_type) bound_.pop_back();
    return seal(n);
  }

 private:
  const std::map<std::string, Alias>& aliases_;
  std::vector<std::string> bound_;

  const TypePtr* lookup(const std::string& x) const {
    if (std::find(bound_.begin(), bound_.end(), x) != bound_.end()) return nullptr;
    auto it = aliases_.find(x);
    return it == aliases_.end() ? nullptr : &it->second.closed;
  }

  bool mentions_alias(const TypePtr& t) const {
    for (const auto& x : t->ftv)
      if (lookup(x)) return true;
    return false;
  }
};

LoadError wrap(const Error& e, const std::string& file, const std::string& def) {
  std::string where = def.empty() ? file : file + ", definition " + def;
  return LoadError(e.code(), e.span(), e.message() + " (in " + where + ")", file, def);
}

}  // namespace

// Expansion

TypePtr Session::expand(const TypePtr& t) const { return Expander(aliases_).type(t); }
ValuePtr Session::expand(const ValuePtr& v) const { return Expander(aliases_).value(v); }
CompPtr Session::expand(const CompPtr& m) const { return Expander(aliases_).comp(m); }

TypePtr Session::type(std::string_view text) const {
  TypePtr t = normalize(expand(parse_type(text)));
  infer_kind({}, t);
  return t;
}

void Session::add_aliases(const std::vector<AliasDecl>& decls, const std::string& file, LoadResult& out) {
  std::map<std::string, const AliasDecl*> pending;
  for (const auto& d : decls) {
    if (aliases_.count(d.name) || pending.count(d.name))
      throw LoadError("DuplicateAlias", d.span, "type " + d.name + " is already defined", file, d.name);
    pending[d.name] = &d;
  }
  std::vector<std::string> visiting;
  std::function<void(const std::string&)> resolve = [&](const std::string& name) {
    if (aliases_.count(name)) return;
    const AliasDecl& d = *pending.at(name);
    if (std::find(visiting.begin(), visiting.end(), name) != visiting.end())
      throw LoadError("AliasCycle", d.span, "type " + name + " is defined in terms of itself", file, name);
    visiting.push_back(name);
    NameSet params;
    for (const auto& [p, k] : d.params) params = set_union(params, NameSet{p});
    for (const auto& x : d.body->ftv)
      if (!contains(params, x) && pending.count(x)) resolve(x);
    TypePtr closed = d.body;
    for (auto it = d.params.rbegin(); it != d.params.rend(); ++it) closed = t_lam(it->first, it->second, closed);
    closed = normalize(expand(closed));
    KindPtr kind;
    try {
      kind = infer_kind({}, closed);
    } catch (const Error& e) {
      throw wrap(e, file, name);
    }
    aliases_[name] = Alias{name, closed, kind, file};
    out.aliases.push_back(name);
    visiting.pop_back();
  };
  for (const auto& d : decls) resolve(d.name);
}

// Definitions

void Session::check_name(const std::string& name, Span span, const std::string& file) const {
  if (find_builtin(name))
    throw LoadError("ReservedName", span, "definition " + name + " would shadow a builtin", file, name);
  if (defs_.count(name))
    throw LoadError("DuplicateDefinition", span, "definition " + name + " is already defined", file, name);
}

void Session::register_def(const std::string& name, const TypePtr& type, const ValuePtr& value, Span span,
                           const std::string& file) {
  check_name(name, span, file);
  Definition d;
  d.name = name;
  d.file = file;
  d.span = span;
  try {
    d.type = normalize(expand(type));
    check_kind({}, d.type, k_vty());
  } catch (const Error& e) {
    throw wrap(e, file, name);
  }
  d.source = expand(value);
  defs_[name] = std::move(d);
  order_.push_back(name);
}

void Session::check_def(const std::string& name) {
  Definition& d = defs_.at(name);
  try {
    d.checked = Checker(this).check_value({}, {}, d.source, d.type);
  } catch (const Error& e) {
    throw wrap(e, d.file, name);
  }
}

const Definition& Session::elaborate_def(const std::string& name) {
  Definition& d = defs_.at(name);
  if (d.elaborated) return d;
  if (!d.checked) check_def(name);
  if (elaborating_.count(name))
    throw ElabError("CyclicDefinition", d.span, "definition " + name + " depends on its own elaboration");
  elaborating_.insert(name);
  try {
    d.elaborated = eliminate_blocks(d.checked, this);
  } catch (const LoadError&) {
    elaborating_.erase(name);
    throw;
  } catch (const Error& e) {
    elaborating_.erase(name);
    throw wrap(e, d.file, name);
  }
  elaborating_.erase(name);
  return d;
}

std::string Session::register_companion(const std::string& base) {
  std::string name = base + std::string(kCompanionSuffix);
  if (defs_.count(name)) return name;
  const Definition& g = defs_.at(base);
  TypePtr b = g.type->a;
  std::string t = contains(type_names(b), "T") ? fresh_name("T", type_names(b)) : "T";
  KindPtr k = k_arrow(k_vty(), k_cty());
  Definition d;
  d.name = name;
  d.file = g.file;
  d.span = g.span;
  d.companion = true;
  d.type = normalize(t_thk(t_forall(t, k, t_arrow(t_thk(rel_monad_type(t_var(t))), carrier(b, t)))));
  defs_[name] = std::move(d);
  order_.push_back(name);
  pending_companions_.push_back(base);
  new_companions_.push_back(name);
  return name;
}

// Companions registered by a translation that later failed never get a
// body; every public entry point starts by dropping them.
void Session::discard_unfinished_companions() {
  std::vector<std::string> unfinished;
  for (const auto& [name, def] : defs_)
    if (def.companion && !def.elaborated) unfinished.push_back(name);
  for (const auto& name : unfinished) {
    defs_.erase(name);
    order_.erase(std::remove(order_.begin(), order_.end(), name), order_.end());
    new_companions_.erase(std::remove(new_companions_.begin(), new_companions_.end(), name), new_companions_.end());
  }
  pending_companions_.clear();
}

void Session::generate_companions() {
  while (!pending_companions_.empty()) {
    std::string base = pending_companions_.front();
    pending_companions_.pop_front();
    ValuePtr v = elaborate_def(base).elaborated;
    Definition& d = defs_.at(base + std::string(kCompanionSuffix));
    try {
      ElabContext ctx = ElabContext::make(set_union(all_names(v), NameSet{base}));
      CompPtr body = v->tag == ValueTag::Thunk ? translate_comp(v->comp, ctx, this)
                                               : c_force(translate_value(v, ctx, this));
      TypePtr instance = t_thk(rel_monad_type(t_var(ctx.monad)));
      d.elaborated = v_thunk(c_tylam(ctx.monad, k_arrow(k_vty(), k_cty()), c_lam(ctx.instance, instance, body)));
      d.checked = d.elaborated;
      d.source = d.elaborated;
    } catch (const Error& e) {
      auto error = wrap(e, d.file, d.name);
      discard_unfinished_companions();
      throw error;
    }
  }
}

void Session::verify_def(const std::string& name) {
  const Definition& d = defs_.at(name);
  if (has_blocks(d.elaborated))
    throw LoadError("BlockSurvived", d.span, "elaborated definition still contains a monadic block", d.file, name);
  try {
    Checker(this).check_value({}, {}, d.elaborated, d.type);
  } catch (const Error& e) {
    throw LoadError("IllTypedTranslation", d.span,
                    "elaborated definition " + name + " does not check: " + e.what(), d.file, name);
  }
}

// A failed load or define leaves the session as it was.
LoadResult Session::load(std::string_view text, const std::string& file) {
  discard_unfinished_companions();
  Session before = *this;
  try {
    return load_all(text, file);
  } catch (...) {
    *this = std::move(before);
    throw;
  }
}

LoadResult Session::load_all(std::string_view text, const std::string& file) {
  Module mod;
  try {
    mod = parse_module(text);
  } catch (const Error& e) {
    throw wrap(e, file, "");
  }
  LoadResult out;
  add_aliases(mod.aliases, file, out);
  for (const auto& d : mod.defs) {
    register_def(d.name, d.type, d.value, d.span, file);
    out.defs.push_back(d.name);
  }
  for (const auto& name : out.defs) check_def(name);
  for (const auto& name : out.defs) elaborate_def(name);
  if (mod.main) {
    try {
      Prepared p = prepare_main(mod.main, nullptr);
      out.main = p.elaborated;
      out.main_type = p.type;
    } catch (const LoadError&) {
      throw;
    } catch (const Error& e) {
      throw wrap(e, file, "main");
    }
  }
  generate_companions();
  out.companions = std::move(new_companions_);
  new_companions_.clear();
  if (verify) {
    for (const auto& name : out.defs) verify_def(name);
    for (const auto& name : out.companions) verify_def(name);
  }
  return out;
}

LoadResult Session::load_file(const std::string& path) { return load(read_file(path), path); }

Session::Prepared Session::prepare(const CompPtr& m, const TypePtr& expected) {
  discard_unfinished_companions();
  return prepare_main(m, expected);
}

Session::Prepared Session::prepare_main(const CompPtr& m, const TypePtr& expected) {
  Prepared p;
  CompPtr src = expand(m);
  Checker checker(this);
  if (expected) {
    p.type = normalize(expand(expected));
    p.checked = checker.check_comp({}, {}, src, p.type);
  } else {
    try {
      std::tie(p.checked, p.type) = checker.synth_comp({}, {}, src);
    } catch (const TypeError& e) {
      if (e.code() != "CannotSynthesize") throw;
      p.type = t_prim(PrimType::OS);
      p.checked = checker.check_comp({}, {}, src, p.type);
    }
  }
  p.elaborated = eliminate_blocks(p.checked, this);
  generate_companions();
  if (verify && p.elaborated != p.checked) {
    try {
      Checker(this).check_comp({}, {}, p.elaborated, p.type);
    } catch (const Error& e) {
      throw ElabError("IllTypedTranslation", m->span, std::string("elaborated computation does not check: ") + e.what());
    }
  }
  return p;
}

Session::Prepared Session::prepare(std::string_view text, const TypePtr& expected) {
  return prepare(parse_computation(text), expected);
}

void Session::define(const std::string& name, const TypePtr& type, const ValuePtr& value, const std::string& file) {
  discard_unfinished_companions();
  Session before = *this;
  try {
    register_def(name, type, value, {}, file);
    check_def(name);
    elaborate_def(name);
    generate_companions();
    new_companions_.clear();
    if (verify) verify_def(name);
  } catch (...) {
    *this = std::move(before);
    throw;
  }
}

// Lookup

const Definition* Session::find(const std::string& name) const {
  auto it = defs_.find(name);
  return it == defs_.end() ? nullptr : &it->second;
}

const TypePtr* Session::global_type(const std::string& name) const {
  auto it = defs_.find(name);
  if (it != defs_.end()) return &it->second.type;
  // Companions of earlier definitions are created on first mention, so that
  // elaborated output re-checks against a fresh session.
  std::string_view sv = name;
  if (sv.size() > kCompanionSuffix.size() && sv.substr(sv.size() - kCompanionSuffix.size()) == kCompanionSuffix) {
    std::string base(sv.substr(0, sv.size() - kCompanionSuffix.size()));
    auto g = defs_.find(base);
    if (g != defs_.end() && !g->second.companion && g->second.type->tag == TypeTag::Thk) {
      auto* self = const_cast<Session*>(this);
      self->register_companion(base);
      self->generate_companions();
      return &defs_.at(name).type;
    }
  }
  return nullptr;
}

ValuePtr Session::global_value(const std::string& name) const {
  if (!defs_.count(name)) return nullptr;
  return const_cast<Session*>(this)->elaborate_def(name).elaborated;
}

std::string Session::companion(const std::string& name) { return register_companion(name); }

ValuePtr Session::runtime_value(const std::string& name) const {
  auto it = defs_.find(name);
  if (it == defs_.end()) return nullptr;
  return it->second.elaborated ? it->second.elaborated : it->second.source;
}

// Prelude

std::string Session::default_prelude_dir() {
  if (const char* env = std::getenv("CBPV_PRELUDE_DIR")) return env;
  return CBPV_PRELUDE_DIR;
}

void Session::load_prelude(const std::string& dir) {
  std::string manifest_path = dir + "/manifest";
  std::istringstream manifest(read_file(manifest_path));
  struct Entry {
    std::string file;
    std::vector<std::pair<std::string, std::string>> defs;
  };
  std::vector<Entry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line.compare(first, 2, "--") == 0) continue;
    std::string body = line.substr(first);
    if (body.rfind("file ", 0) == 0) {
      entries.push_back({body.substr(5), {}});
      continue;
    }
    auto colon = body.find(" : ");
    if (entries.empty() || colon == std::string::npos)
      throw LoadError("BadManifest", {line_no, 1}, "expected 'file NAME' or 'name : type'", manifest_path);
    entries.back().defs.emplace_back(body.substr(0, colon), body.substr(colon + 3));
  }
  for (const auto& entry : entries) {
    LoadResult r = load_file(dir + "/" + entry.file);
    std::set<std::string> loaded(r.defs.begin(), r.defs.end());
    std::set<std::string> listed;
    for (const auto& [name, type_text] : entry.defs) {
      listed.insert(name);
      const Definition* d = find(name);
      if (!d || !loaded.count(name))
        throw LoadError("ManifestMismatch", {}, name + " is listed but not defined", entry.file, name);
      TypePtr expected;
      try {
        expected = type(type_text);
      } catch (const Error& e) {
        throw wrap(e, manifest_path, name);
      }
      if (!type_equal(expected, d->type))
        throw LoadError("ManifestMismatch", d->span,
                        name + " has type " + print(d->type) + " but the manifest lists " + print(expected),
                        entry.file, name);
    }
    for (const auto& name : loaded)
      if (!listed.count(name))
        throw LoadError("ManifestMismatch", find(name)->span, name + " is defined but not listed", entry.file,
                        name);
  }
}

// Elaborated modules

Module elaborate_module(Session& session, std::string_view text, const std::string& file) {
  Module source = parse_module(text);
  LoadResult r = session.load(text, file);
  Module out;
  out.elaborated = true;
  out.aliases = source.aliases;
  std::set<std::string> local(r.defs.begin(), r.defs.end());
  auto emit = [&](const std::string& name) {
    const Definition* d = session.find(name);
    out.defs.push_back({name, d->type, d->elaborated, d->span});
  };
  for (const auto& name : r.defs) emit(name);
  for (const auto& name : r.companions)
    if (local.count(name.substr(0, name.size() - kCompanionSuffix.size()))) emit(name);
  out.main = r.main;
  return out;
}

}  // namespace cbpv

#include <sstream>

#include "cbpv/parser.hpp"

namespace cbpv {

namespace {

std::string kind_text(const KindPtr& k, bool nested) {
  switch (k->tag) {
    case Kind::Tag::VTy: return "VTy";
    case Kind::Tag::CTy: return "CTy";
    case Kind::Tag::Arrow: {
      std::string s = kind_text(k->dom, true) + " -> " + kind_text(k->cod, false);
      return nested ? "(" + s + ")" : s;
    }
  }
  return "?";
}

// Type precedence: binders < arrow < product < application < atom.
enum TPrec { TOpen, TArrow, TProd, TApp, TAtom };

std::string type_text(const TypePtr& t, int prec) {
  auto wrap = [&](int own, std::string s) { return prec > own ? "(" + s + ")" : s; };
  switch (t->tag) {
    case TypeTag::Var:
      return t->name;
    case TypeTag::Unit:
      return "Unit";
    case TypeTag::Prim:
      switch (t->prim) {
        case PrimType::Int: return "Int";
        case PrimType::String: return "String";
        case PrimType::Bool: return "Bool";
        case PrimType::OS: return "OS";
      }
      return "?";
    case TypeTag::Lam:
    case TypeTag::Exists:
    case TypeTag::Forall:
    case TypeTag::Nu: {
      const char* kw = t->tag == TypeTag::Lam ? "fn" : t->tag == TypeTag::Exists ? "exists"
                                                   : t->tag == TypeTag::Forall   ? "forall"
                                                                                 : "rec";
      const char* sep = t->tag == TypeTag::Lam ? " ->" : ".";
      return wrap(TOpen, std::string(kw) + " (" + t->name + ": " + kind_text(t->kind, false) + ")" + sep + " " +
                             type_text(t->a, TOpen));
    }
    case TypeTag::Arrow:
      return wrap(TArrow, type_text(t->a, TProd) + " -> " + type_text(t->b, TOpen));
    case TypeTag::Prod:
      return wrap(TProd, type_text(t->a, TApp) + " * " + type_text(t->b, TProd));
    case TypeTag::App:
      return wrap(TApp, type_text(t->a, TApp) + " " + type_text(t->b, TAtom));
    case TypeTag::Thk:
      return wrap(TApp, "Thk " + type_text(t->a, TAtom));
    case TypeTag::Ret:
      return wrap(TApp, "Ret " + type_text(t->a, TAtom));
    case TypeTag::Sum:
    case TypeTag::With: {
      bool sum = t->tag == TypeTag::Sum;
      if (t->fields.empty()) return sum ? "+{}" : "&{}";
      std::string s = sum ? "+{ " : "&{ ";
      for (std::size_t i = 0; i < t->fields.size(); ++i) {
        if (i > 0) s += ", ";
        s += (sum ? "" : ".") + t->fields[i].first + " : " + type_text(t->fields[i].second, TOpen);
      }
      return s + " }";
    }
  }
  return "?";
}

std::string escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      default: out += c;
    }
  }
  return out + "\"";
}

// Computation precedence: binding forms < application < atom.
enum CPrec { COpen, CApp, CAtom };

class Printer {
 public:
  std::string value(const ValuePtr& v, const std::string& ind) {
    switch (v->tag) {
      case ValueTag::Var:
      case ValueTag::Prim:
        return v->name;
      case ValueTag::Unit:
        return "()";
      case ValueTag::Int:
        return std::to_string(v->num);
      case ValueTag::String:
        return escape(v->name);
      case ValueTag::Bool:
        return v->flag ? "true" : "false";
      case ValueTag::Pair:
        return "(" + tuple(v, ind) + ")";
      case ValueTag::Inj:
        if (v->a->tag == ValueTag::Unit) return v->name + "()";
        if (v->a->tag == ValueTag::Pair) return v->name + "(" + tuple(v->a, ind) + ")";
        return v->name + "(" + value(v->a, ind) + ")";
      case ValueTag::Pack:
        return "pack(" + type_text(v->type, TOpen) + ", " + value(v->a, ind) + ")";
      case ValueTag::Thunk: {
        std::string body = comp(v->comp, COpen, ind + "  ");
        if (body.find('\n') == std::string::npos) return "{ " + body + " }";
        return "{\n" + ind + "  " + body + "\n" + ind + "}";
      }
    }
    return "?";
  }

  std::string comp(const CompPtr& c, int prec, const std::string& ind) {
    auto wrap = [&](int own, std::string s) { return prec > own ? "(" + s + ")" : s; };
    switch (c->tag) {
      case CompTag::Force:
        return "! " + value(c->val, ind);
      case CompTag::Return:
        return "ret " + value(c->val, ind);
      case CompTag::Let:
        return wrap(COpen, "let " + c->x + " = " + value(c->val, ind) + " in\n" + ind + comp(c->m, COpen, ind));
      case CompTag::LetPair:
        return wrap(COpen, "let (" + c->x + ", " + c->y + ") = " + value(c->val, ind) + " in\n" + ind +
                               comp(c->m, COpen, ind));
      case CompTag::Unpack:
        return wrap(COpen, "unpack (" + c->x + ", " + c->y + ") = " + value(c->val, ind) + " in\n" + ind +
                               comp(c->m, COpen, ind));
      case CompTag::Bind:
        return wrap(COpen, "do " + c->x + " <- " + comp(c->m0, COpen, ind + "  ") + ";\n" + ind +
                               comp(c->m, COpen, ind));
      case CompTag::Lam: {
        std::string head = "fn";
        CompPtr body = c;
        while (body->tag == CompTag::Lam) {
          head += body->type ? " (" + body->x + ": " + type_text(body->type, TOpen) + ")" : " " + body->x;
          body = body->m;
        }
        return wrap(COpen, head + " -> " + comp(body, COpen, ind));
      }
      case CompTag::TyLam: {
        std::string head = "tyfn";
        CompPtr body = c;
        while (body->tag == CompTag::TyLam) {
          head += body->kind ? " (" + body->x + ": " + kind_text(body->kind, false) + ")" : " " + body->x;
          body = body->m;
        }
        return wrap(COpen, head + " -> " + comp(body, COpen, ind));
      }
      case CompTag::Fix: {
        std::string head = c->type ? "fix (" + c->x + ": " + type_text(c->type, TOpen) + ")" : "fix " + c->x;
        return wrap(COpen, head + " ->\n" + ind + comp(c->m, COpen, ind));
      }
      case CompTag::App:
        return wrap(CApp, comp(c->m, CApp, ind) + " " + value(c->val, ind));
      case CompTag::Dtor:
        return wrap(CApp, comp(c->m, CApp, ind) + " ." + c->x);
      case CompTag::TyApp:
        return wrap(CApp, comp(c->m, CApp, ind) + " @(" + type_text(c->type, TOpen) + ")");
      case CompTag::Roll:
        return "roll " + comp(c->m, CAtom, ind);
      case CompTag::Unroll:
        return "unroll " + comp(c->m, CAtom, ind);
      case CompTag::Monadic: {
        std::string inner = ind + "  ";
        return "monadic {\n" + inner + comp(c->m, COpen, inner) + "\n" + ind + "}";
      }
      case CompTag::Comatch: {
        if (c->arms.empty()) return "comatch end";
        std::string inner = ind + "  ";
        std::string s = "comatch";
        for (const auto& arm : c->arms)
          s += "\n" + ind + "| ." + arm.tag + " -> " + comp(arm.body, COpen, inner);
        return s + "\n" + ind + "end";
      }
      case CompTag::Match: {
        std::string inner = ind + "  ";
        std::string s = "match " + value(c->val, ind);
        for (const auto& arm : c->arms) {
          std::string binder = arm.binder == "_" ? "" : arm.binder;
          s += "\n" + ind + "| " + arm.tag + "(" + binder + ") -> " + comp(arm.body, COpen, inner);
        }
        return s + "\n" + ind + "end";
      }
    }
    return "?";
  }

 private:
  std::string tuple(const ValuePtr& v, const std::string& ind) {
    std::string s = value(v->a, ind);
    ValuePtr rest = v->b;
    while (rest->tag == ValueTag::Pair) {
      s += ", " + value(rest->a, ind);
      rest = rest->b;
    }
    return s + ", " + value(rest, ind);
  }
};

}  // namespace

std::string print(const KindPtr& k) { return kind_text(k, false); }
std::string print(const TypePtr& t) { return type_text(t, TOpen); }
std::string print(const ValuePtr& v) { return Printer().value(v, ""); }
std::string print(const CompPtr& c) { return Printer().comp(c, COpen, ""); }

std::string print(const Module& m) {
  std::ostringstream out;
  for (const auto& a : m.aliases) {
    out << "type " << a.name;
    for (const auto& [x, k] : a.params) out << " (" << x << ": " << kind_text(k, false) << ")";
    out << " = " << type_text(a.body, TOpen) << "\n\n";
  }
  Printer p;
  for (const auto& d : m.defs) {
    out << "def " << d.name << " : " << type_text(d.type, TOpen) << " =\n  " << p.value(d.value, "  ") << "\n\n";
  }
  if (m.main) out << "main =\n  " << p.comp(m.main, COpen, "  ") << "\n";
  std::string body = out.str();
  if (m.elaborated || body.find('$') != std::string::npos)
    return std::string(kElaboratedPragma) + "\n\n" + body;
  return body;
}

bool alpha_eq(const Module& a, const Module& b) {
  if (a.aliases.size() != b.aliases.size() || a.defs.size() != b.defs.size()) return false;
  auto closed = [](const AliasDecl& d) {
    TypePtr t = d.body;
    for (auto it = d.params.rbegin(); it != d.params.rend(); ++it) t = t_lam(it->first, it->second, t);
    return t;
  };
  for (std::size_t i = 0; i < a.aliases.size(); ++i) {
    if (a.aliases[i].name != b.aliases[i].name) return false;
    if (!alpha_eq(closed(a.aliases[i]), closed(b.aliases[i]))) return false;
  }
  for (std::size_t i = 0; i < a.defs.size(); ++i) {
    if (a.defs[i].name != b.defs[i].name) return false;
    if (!alpha_eq(a.defs[i].type, b.defs[i].type)) return false;
    if (!alpha_eq(a.defs[i].value, b.defs[i].value)) return false;
  }
  if ((a.main == nullptr) != (b.main == nullptr)) return false;
  return !a.main || alpha_eq(a.main, b.main);
}

}  // namespace cbpv

#include "cbpv/transformer.hpp"

#include <sstream>
#include <vector>

#include "cbpv/elaborate.hpp"
#include "cbpv/error.hpp"
#include "cbpv/parser.hpp"

namespace cbpv {

namespace {

struct MonadShape {
  std::vector<std::string> params;  // value-kinded, outermost first
  TypePtr monad;                    // S P..., of kind VTy -> CTy
};

MonadShape analyse(const Definition& d) {
  const TypePtr& t = d.type;
  if (!t->ftv.empty())
    throw ElabError("InputNotClosed", d.span, d.name + " mentions free type variable " + t->ftv.front());
  if (t->tag != TypeTag::Thk)
    throw ElabError("InputNotMonadType", d.span, d.name + " is not a thunk: " + print(t));
  MonadShape shape;
  TypePtr body = t->a;
  while (body->tag == TypeTag::Forall) {
    if (!kind_eq(body->kind, k_vty()))
      throw ElabError("InputNotMonadType", d.span,
                      d.name + " quantifies " + body->name + " at kind " + print(body->kind) +
                          "; only value-kinded parameters have trivial structures");
    shape.params.push_back(body->name);
    body = body->a;
  }
  const TypePtr* ret = body->tag == TypeTag::With ? find_field(*body, "return") : nullptr;
  if (!ret || (*ret)->tag != TypeTag::Forall || (*ret)->a->tag != TypeTag::Arrow ||
      (*ret)->a->a->tag != TypeTag::Var || (*ret)->a->a->name != (*ret)->name)
    throw ElabError("InputNotMonadType", d.span, d.name + " does not have a RelMonad type: " + print(body));
  const TypePtr& r = *ret;
  shape.monad = normalize(t_lam(r->name, r->kind, r->a->b));
  if (!type_equal(normalize(rel_monad_type(shape.monad)), body))
    throw ElabError("InputNotMonadType", d.span, d.name + " does not have a RelMonad type: " + print(body));
  return shape;
}

}  // namespace

DerivedTransformer derive_transformer(Session& session, const std::string& monad_def) {
  const Definition* d = session.find(monad_def);
  if (!d || d->companion)
    throw ElabError("UnknownDefinition", {}, "no definition named " + monad_def);
  MonadShape shape = analyse(*d);

  NameSet used = type_names(d->type);
  std::string t = fresh_name("T", used);
  used.push_back(t);
  std::string z = fresh_name("Z", used);
  TypePtr carrier_fn = normalize(carrier(shape.monad, t));

  DerivedTransformer out;
  out.name = "motrans_" + monad_def;
  TypePtr closed = shape.monad;
  for (auto it = shape.params.rbegin(); it != shape.params.rend(); ++it) closed = t_lam(*it, k_vty(), closed);
  out.monad = normalize(closed);
  TypePtr functor = carrier_fn;
  for (auto it = shape.params.rbegin(); it != shape.params.rend(); ++it) functor = t_lam(*it, k_vty(), functor);
  out.functor = normalize(t_lam(t, k_arrow(k_vty(), k_cty()), functor));

  std::string binders, kinded, type_args;
  for (const auto& p : shape.params) {
    binders += " " + p;
    kinded += " (" + p + ": VTy)";
    type_args += " @(" + p + ")";
  }
  std::string trivs;
  for (const auto& p : shape.params) trivs += " @(" + p + ") triv";

  std::ostringstream ss;
  std::string trans = "RelMonadTrans (fn (" + t + ": VTy -> CTy) -> " + print(carrier_fn) + ")";
  ss << "def " << out.name << " : Thk ("
     << (shape.params.empty() ? trans : "forall" + kinded + ". " + trans) << ") = {\n"
     << "  tyfn" << binders << " " << t << " -> fn m ->\n"
     << "    ! removeTriv @(" << t << ") @(" << print(carrier_fn) << ") {\n"
     << "      monadic {\n"
     << (shape.params.empty() ? "" : "        tyfn" + kinded + " ->\n")
     << "        let mo_f = { ! " << monad_def << type_args << " } in\n"
     << "        comatch\n"
     << "        | .monad -> ! mo_f\n"
     << "        | .lift -> tyfn (" << z << ": VTy) -> fn (tz: Thk (Ret " << z << ")) ->\n"
     << "            do z <- ! tz; ! mo_f .return @(" << z << ") z\n"
     << "        end\n"
     << "      } @(" << t << ") m" << trivs << "\n"
     << "    }\n"
     << "}\n";
  out.source = ss.str();
  if (out.source.find('$') != std::string::npos)
    out.source = std::string(kElaboratedPragma) + "\n" + out.source;

  session.load(out.source, "<derived " + out.name + ">");
  out.type = session.find(out.name)->type;
  return out;
}

}  // namespace cbpv

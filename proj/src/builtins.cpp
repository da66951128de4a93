#include "cbpv/builtins.hpp"

namespace cbpv {

namespace {

std::vector<Builtin> make_builtins() {
  TypePtr i = t_prim(PrimType::Int);
  TypePtr s = t_prim(PrimType::String);
  TypePtr b = t_prim(PrimType::Bool);
  TypePtr os = t_prim(PrimType::OS);
  auto fn2 = [](TypePtr x, TypePtr y, TypePtr r) { return t_thk(t_arrow(x, t_arrow(y, t_ret(r)))); };
  TypePtr var_b = t_var("B");
  TypePtr if_type = t_thk(t_forall(
      "B", k_cty(), t_arrow(b, t_arrow(t_thk(var_b), t_arrow(t_thk(var_b), var_b)))));
  return {
      {"add", fn2(i, i, i), 0, 2},
      {"sub", fn2(i, i, i), 0, 2},
      {"times", fn2(i, i, i), 0, 2},
      {"mod", fn2(i, i, i), 0, 2},
      {"int_eq", fn2(i, i, b), 0, 2},
      {"str_append", fn2(s, s, s), 0, 2},
      {"str_eq", fn2(s, s, b), 0, 2},
      {"if", if_type, 1, 3},
      {"write_line", t_thk(t_arrow(s, t_arrow(t_thk(os), os))), 0, 2},
      {"random_int", t_thk(t_arrow(t_thk(t_arrow(i, os)), os)), 0, 1},
      {"halt", t_thk(os), 0, 0},
      {"exit", t_thk(t_arrow(i, os)), 0, 1},
  };
}

}  // namespace

const std::vector<Builtin>& builtins() {
  static const std::vector<Builtin> all = make_builtins();
  return all;
}

const Builtin* find_builtin(const std::string& name) {
  for (const auto& b : builtins())
    if (b.name == name) return &b;
  return nullptr;
}

}  // namespace cbpv

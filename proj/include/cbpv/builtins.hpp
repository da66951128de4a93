#pragma once

#include <string>
#include <vector>

#include "cbpv/syntax.hpp"

namespace cbpv {

struct Builtin {
  std::string name;
  TypePtr type;   // always a Thk type
  int type_args;  // TyArg frames consumed before the value arguments
  int args;       // Arg frames consumed by the delta rule
};

const std::vector<Builtin>& builtins();
const Builtin* find_builtin(const std::string& name);

}  // namespace cbpv

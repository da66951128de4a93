#pragma once

#include <string>

#include "cbpv/session.hpp"

namespace cbpv {

struct DerivedTransformer {
  std::string name;    // motrans_<monad>
  std::string source;  // surface text of the generated definition
  TypePtr monad;       // S, closed over the monad's parameters: fn P... A -> ...
  TypePtr functor;     // fn T P... -> carrier(S P..., T)
  TypePtr type;        // declared type of the generated definition, expanded
};

// Derive a relative monad transformer from a definition of type
// Thk (forall P... . RelMonad (S P...)) whose parameters are value-kinded.
// The definition is generated as surface text and loaded into `session`.
DerivedTransformer derive_transformer(Session& session, const std::string& monad_def);

}  // namespace cbpv

#pragma once

#include <functional>
#include <map>
#include <string>

#include "cbpv/kinds.hpp"
#include "cbpv/syntax.hpp"

namespace cbpv {

// Every variable name (free or bound) occurring in a term or type.
NameSet type_names(const TypePtr& t);
NameSet all_names(const CompPtr& m);
NameSet all_names(const ValuePtr& v);

// &{ .return : forall A. A -> T A, .bind : forall A A'. Thk (T A) -> Thk (A -> T A') -> T A' }
TypePtr rel_monad_type(const TypePtr& monad);
// forall Z. Thk (T Z) -> Thk (Z -> B) -> B
TypePtr algebra_type(const TypePtr& monad, const TypePtr& carrier);

// The carrier translation relative to the monad variable `monad`. Type
// binders equal to `monad` are renamed, so any name works, though a fresh one
// keeps the output readable.
TypePtr carrier(const TypePtr& t, const std::string& monad);
TypePtr sig(const KindPtr& k, const TypePtr& s, const std::string& monad);

// Names used while translating one block.
struct ElabContext {
  std::string monad;                              // T : VTy -> CTy
  std::string instance;                           // m : Thk (RelMonad T)
  std::map<std::string, std::string> structures;  // X -> str_X
  NameSet avoid;

  // Fresh T and m avoiding every name in `avoid`.
  static ElabContext make(NameSet avoid);

  std::string fresh(const std::string& base);
  // Allocate the structure variable for a newly bound type variable.
  std::string bind_structure(const std::string& tyvar);
};

ValueEnv sig_env(const TypeEnv& delta, ElabContext& ctx);

// How the translation treats names bound at top level.
class BlockGlobals {
 public:
  virtual ~BlockGlobals() = default;
  // Declared type (normalized) of a top-level definition, or null.
  virtual const TypePtr* global_type(const std::string& name) const = 0;
  // Block-free value of a non-thunk definition, used for inlining.
  virtual ValuePtr global_value(const std::string& name) const = 0;
  // Name of the companion `g$mo : Thk (forall T. Thk (RelMonad T) -> carrier B)`
  // for a definition `g : Thk B`, scheduling its generation.
  virtual std::string companion(const std::string& name) = 0;
};

// Structure translation; the result synthesizes sig(kind(s), carrier(s)).
CompPtr structure(const TypePtr& s, ElabContext& ctx);

// Term translations of checker-annotated, block-free terms. `locals` holds
// term variables bound outside the term being translated.
ValuePtr translate_value(const ValuePtr& v, ElabContext& ctx, BlockGlobals* globals = nullptr,
                         const NameSet& locals = {});
CompPtr translate_comp(const CompPtr& m, ElabContext& ctx, BlockGlobals* globals = nullptr,
                       const NameSet& locals = {});

// Replace every monadic block, innermost first, by
// tyfn (T: VTy -> CTy) -> fn (m: Thk (RelMonad T)) -> translation.
ValuePtr eliminate_blocks(const ValuePtr& v, BlockGlobals* globals = nullptr);
CompPtr eliminate_blocks(const CompPtr& m, BlockGlobals* globals = nullptr);

bool has_blocks(const CompPtr& m);
bool has_blocks(const ValuePtr& v);

}  // namespace cbpv

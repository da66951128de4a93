#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cbpv/syntax.hpp"

namespace cbpv {

// Ordered; later entries shadow earlier ones.
using TypeEnv = std::vector<std::pair<std::string, KindPtr>>;
using ValueEnv = std::vector<std::pair<std::string, TypePtr>>;

const KindPtr* lookup(const TypeEnv& env, const std::string& name);
const TypePtr* lookup(const ValueEnv& env, const std::string& name);

// Throws KindError (UnboundTypeVariable, KindMismatch, NuBinderNotCTy,
// DuplicateTag).
KindPtr infer_kind(const TypeEnv& env, const TypePtr& t);
void check_kind(const TypeEnv& env, const TypePtr& t, const KindPtr& expected);

}  // namespace cbpv

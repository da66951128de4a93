#pragma once

#include <string>
#include <utility>

#include "cbpv/kinds.hpp"
#include "cbpv/syntax.hpp"

namespace cbpv {

// Types of top-level definitions visible to the checker.
class GlobalScope {
 public:
  virtual ~GlobalScope() = default;
  virtual const TypePtr* global_type(const std::string& name) const = 0;
};

// Bidirectional checker. Every entry point returns an annotated copy of its
// input: lambda and fix annotations, type-lambda kinds, and the payload and
// head/body types of Return and Bind are filled in. Monadic blocks stay in
// place; their bodies are annotated. Throws TypeError or KindError.
class Checker {
 public:
  explicit Checker(const GlobalScope* globals = nullptr) : globals_(globals) {}

  ValuePtr check_value(const TypeEnv& delta, const ValueEnv& gamma, const ValuePtr& v, const TypePtr& a);
  std::pair<ValuePtr, TypePtr> synth_value(const TypeEnv& delta, const ValueEnv& gamma, const ValuePtr& v);
  CompPtr check_comp(const TypeEnv& delta, const ValueEnv& gamma, const CompPtr& m, const TypePtr& b);
  std::pair<CompPtr, TypePtr> synth_comp(const TypeEnv& delta, const ValueEnv& gamma, const CompPtr& m);

  // Type of a monadic block whose body has type b.
  static TypePtr block_type(const TypePtr& b);

 private:
  const GlobalScope* globals_;
};

// Convenience wrappers mirroring the judgments.
void check_value(const TypeEnv& delta, const ValueEnv& gamma, const ValuePtr& v, const TypePtr& a,
                 const GlobalScope* globals = nullptr);
TypePtr synth_computation(const TypeEnv& delta, const ValueEnv& gamma, const CompPtr& m,
                          const GlobalScope* globals = nullptr);
void check_computation(const TypeEnv& delta, const ValueEnv& gamma, const CompPtr& m, const TypePtr& b,
                       const GlobalScope* globals = nullptr);
void check_monadic_block(const TypeEnv& delta, const ValueEnv& gamma, const CompPtr& block,
                         const TypePtr& declared, const GlobalScope* globals = nullptr);

}  // namespace cbpv

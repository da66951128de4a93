#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cbpv/machine.hpp"
#include "cbpv/session.hpp"

namespace cbpv {

struct LawFailure {
  std::size_t sample;
  std::string lhs_source;
  std::string rhs_source;
  Outcome lhs;
  Outcome rhs;
};

struct LawReport {
  std::string law;      // left-unit, right-unit, associativity, linearity
  std::string subject;  // monad name, or the carrier of an algebra
  std::size_t samples = 0;
  bool expected_failure = false;
  std::vector<LawFailure> failures;

  bool passed() const { return failures.empty(); }
  bool as_expected() const { return passed() != expected_failure; }
};

struct LawOptions {
  std::size_t samples = 50;
  std::uint64_t seed = 0;
  std::uint64_t fuel = 1000000;
};

// Monads with an observation context, in a fixed order.
const std::vector<std::string>& law_monads();
const std::vector<std::string>& monad_laws();
const std::vector<std::string>& algebra_laws();

// Every law of `monad` at A = A' = A'' = Int.
std::vector<LawReport> check_monad_laws(const Session& prelude, const std::string& monad,
                                        const LawOptions& options = {});

// Algebra laws at T = Exn String for a source computation type B. With an
// empty `algebra`, the structure generated for B is tested; otherwise
// `algebra` is a closed computation of type Algebra (Exn String) carrier(B).
// B must be one of algebra_carriers().
std::vector<LawReport> check_algebra_laws(const Session& prelude, const std::string& carrier_type,
                                          const std::string& algebra = {}, const LawOptions& options = {});
const std::vector<std::string>& algebra_carriers();

// Both sides of one sample, regenerated from the seed and index.
struct LawSample {
  std::string lhs;
  std::string rhs;
};
LawSample monad_law_sample(const Session& prelude, const std::string& monad, const std::string& law,
                           std::uint64_t seed, std::size_t index);
std::pair<Outcome, Outcome> replay_monad_law(const Session& prelude, const std::string& monad,
                                             const std::string& law, std::uint64_t seed, std::size_t index,
                                             std::uint64_t fuel = 1000000);

// bench under the identity implementation and under the right-unit
// expansion of mexnde.
std::pair<Outcome, Outcome> reproduce_counterexample(const Session& prelude);

// Run a closed computation against a session's globals.
Outcome evaluate(Session& session, const std::string& text, std::uint64_t fuel = 1000000, std::uint64_t seed = 0);

}  // namespace cbpv

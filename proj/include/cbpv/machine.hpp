#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cbpv/syntax.hpp"

namespace cbpv {

enum class FrameTag { Kont, Arg, TyArg, Dtor, Unroll, OsWorld };

struct Frame {
  FrameTag tag;
  std::string name;  // Kont binder, Dtor tag
  CompPtr body;      // Kont
  ValuePtr value;    // Arg
  TypePtr type;      // TyArg
};

const char* frame_name(FrameTag tag);

struct MachineState {
  CompPtr comp;
  std::vector<Frame> stack;  // top is back()
  std::uint64_t steps = 0;
};

enum class OutcomeTag { Terminated, Exited, OutOfFuel, Stuck };

struct Outcome {
  OutcomeTag tag = OutcomeTag::Stuck;
  ValuePtr value;       // Terminated
  std::int64_t code = 0;  // Exited
  std::string reason;   // Stuck
  MachineState state;   // OutOfFuel, Stuck
  std::uint64_t steps = 0;
  std::string output;   // write_line payloads when no stream is given

  bool terminated() const { return tag == OutcomeTag::Terminated; }
};

// Structural comparison of two outcomes' observable parts.
bool same_observation(const Outcome& a, const Outcome& b);
std::string describe(const Outcome& o);

struct TraceLine {
  std::uint64_t index;
  std::string head;
  std::size_t depth;
  std::string top;
};
std::string format(const TraceLine& line);

// Resolves a top-level name to its closed, block-free value.
using GlobalLookup = std::function<ValuePtr(const std::string&)>;

struct RunOptions {
  std::uint64_t fuel = 1000000;
  std::uint64_t seed = 0;
  bool os_entry = false;         // push the OsWorld bottom frame
  std::ostream* out = nullptr;   // write_line target; collected into Outcome::output when null
  std::function<void(const TraceLine&)> trace;
};

class Machine {
 public:
  Machine(CompPtr entry, RunOptions options, GlobalLookup globals = {});

  // One transition; returns the outcome once the state is terminal.
  std::optional<Outcome> step();
  Outcome run();

  const MachineState& state() const { return state_; }
  TraceLine trace_line() const;

 private:
  MachineState state_;
  RunOptions options_;
  GlobalLookup globals_;
  std::mt19937_64 rng_;
  std::string output_;

  ValuePtr resolve(const ValuePtr& v) const;
  Outcome finish(OutcomeTag tag);
  Outcome stuck(const std::string& reason);
  std::optional<Outcome> delta(const std::string& name);
  void emit(const std::string& line);
};

Outcome run(const CompPtr& entry, const RunOptions& options = {}, const GlobalLookup& globals = {});
std::vector<TraceLine> trace(const CompPtr& entry, const RunOptions& options = {},
                             const GlobalLookup& globals = {});

}  // namespace cbpv

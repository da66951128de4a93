#include "cbpv/machine.hpp"

#include <ostream>
#include <sstream>

#include "cbpv/builtins.hpp"
#include "cbpv/parser.hpp"

namespace cbpv {

const char* frame_name(FrameTag tag) {
  switch (tag) {
    case FrameTag::Kont: return "Kont";
    case FrameTag::Arg: return "Arg";
    case FrameTag::TyArg: return "TyArg";
    case FrameTag::Dtor: return "Dtor";
    case FrameTag::Unroll: return "Unroll";
    case FrameTag::OsWorld: return "OsWorld";
  }
  return "?";
}

std::string format(const TraceLine& line) {
  std::ostringstream ss;
  ss << '#' << line.index << '\t' << line.head << '\t' << line.depth << '\t' << line.top;
  return ss.str();
}

bool same_observation(const Outcome& a, const Outcome& b) {
  if (a.tag != b.tag) return false;
  switch (a.tag) {
    case OutcomeTag::Terminated:
      return alpha_eq(a.value, b.value) && a.output == b.output;
    case OutcomeTag::Exited:
      return a.code == b.code && a.output == b.output;
    default:
      return false;
  }
}

std::string describe(const Outcome& o) {
  switch (o.tag) {
    case OutcomeTag::Terminated:
      return print(o.value);
    case OutcomeTag::Exited:
      return "exit " + std::to_string(o.code);
    case OutcomeTag::OutOfFuel:
      return "out of fuel after " + std::to_string(o.steps) + " steps";
    case OutcomeTag::Stuck:
      return "stuck after " + std::to_string(o.steps) + " steps: " + o.reason;
  }
  return "?";
}

Machine::Machine(CompPtr entry, RunOptions options, GlobalLookup globals)
    : options_(std::move(options)), globals_(std::move(globals)), rng_(options_.seed) {
  state_.comp = std::move(entry);
  if (options_.os_entry) state_.stack.push_back({FrameTag::OsWorld, {}, nullptr, nullptr, nullptr});
}

TraceLine Machine::trace_line() const {
  return {state_.steps, tag_name(state_.comp->tag), state_.stack.size(),
          state_.stack.empty() ? "Empty" : frame_name(state_.stack.back().tag)};
}

ValuePtr Machine::resolve(const ValuePtr& v) const {
  if (v->tag != ValueTag::Var || !globals_) return v;
  ValuePtr g = globals_(v->name);
  return g ? g : v;
}

Outcome Machine::finish(OutcomeTag tag) {
  Outcome o;
  o.tag = tag;
  o.steps = state_.steps;
  o.output = output_;
  if (tag != OutcomeTag::Terminated && tag != OutcomeTag::Exited) o.state = state_;
  return o;
}

Outcome Machine::stuck(const std::string& reason) {
  Outcome o = finish(OutcomeTag::Stuck);
  o.reason = reason;
  return o;
}

void Machine::emit(const std::string& line) {
  if (options_.out)
    *options_.out << line << '\n' << std::flush;
  else
    output_ += line + "\n";
}

std::optional<Outcome> Machine::delta(const std::string& name) {
  const Builtin* b = find_builtin(name);
  if (!b) return stuck("unbound variable " + name);
  auto& stack = state_.stack;
  std::size_t need = static_cast<std::size_t>(b->type_args + b->args);
  if (stack.size() < need) return stuck("builtin " + name + " is not saturated");
  std::vector<TypePtr> types;
  std::vector<ValuePtr> args;
  for (int i = 0; i < b->type_args; ++i) {
    if (stack.back().tag != FrameTag::TyArg) return stuck("builtin " + name + " expects a type argument");
    types.push_back(stack.back().type);
    stack.pop_back();
  }
  for (int i = 0; i < b->args; ++i) {
    if (stack.back().tag != FrameTag::Arg) return stuck("builtin " + name + " expects an argument");
    args.push_back(resolve(stack.back().value));
    stack.pop_back();
  }
  auto int_arg = [&](int i) -> std::optional<std::int64_t> {
    if (args[i]->tag != ValueTag::Int) return std::nullopt;
    return args[i]->num;
  };
  auto str_arg = [&](int i) -> std::optional<std::string> {
    if (args[i]->tag != ValueTag::String) return std::nullopt;
    return args[i]->name;
  };
  auto ret = [&](ValuePtr v) -> std::optional<Outcome> {
    state_.comp = c_return(std::move(v));
    return std::nullopt;
  };
  if (name == "add" || name == "sub" || name == "times" || name == "mod" || name == "int_eq") {
    auto x = int_arg(0), y = int_arg(1);
    if (!x || !y) return stuck(name + " applied to a non-integer");
    // Wrapping arithmetic, computed unsigned to avoid overflow traps.
    auto ux = static_cast<std::uint64_t>(*x), uy = static_cast<std::uint64_t>(*y);
    if (name == "add") return ret(v_int(static_cast<std::int64_t>(ux + uy)));
    if (name == "sub") return ret(v_int(static_cast<std::int64_t>(ux - uy)));
    if (name == "times") return ret(v_int(static_cast<std::int64_t>(ux * uy)));
    if (name == "int_eq") return ret(v_bool(*x == *y));
    if (*y == 0) return stuck("mod by zero");
    if (*y == -1) return ret(v_int(0));
    std::int64_t r = *x % *y;
    if (r < 0) r += *y < 0 ? -*y : *y;
    return ret(v_int(r));
  }
  if (name == "str_append" || name == "str_eq") {
    auto x = str_arg(0), y = str_arg(1);
    if (!x || !y) return stuck(name + " applied to a non-string");
    if (name == "str_eq") return ret(v_bool(*x == *y));
    return ret(v_string(*x + *y));
  }
  if (name == "if") {
    if (args[0]->tag != ValueTag::Bool) return stuck("if applied to a non-boolean");
    state_.comp = c_force(args[0]->flag ? args[1] : args[2]);
    return std::nullopt;
  }
  if (name == "write_line") {
    auto s = str_arg(0);
    if (!s) return stuck("write_line applied to a non-string");
    emit(*s);
    state_.comp = c_force(args[1]);
    return std::nullopt;
  }
  if (name == "random_int") {
    auto n = static_cast<std::int64_t>(rng_() >> 33);
    state_.comp = c_app(c_force(args[0]), v_int(n));
    return std::nullopt;
  }
  if (name == "halt" || name == "exit") {
    std::int64_t code = 0;
    if (name == "exit") {
      auto c = int_arg(0);
      if (!c) return stuck("exit applied to a non-integer");
      code = *c;
    }
    Outcome o = finish(OutcomeTag::Exited);
    o.code = code;
    return o;
  }
  return stuck("builtin " + name + " has no delta rule");
}

std::optional<Outcome> Machine::step() {
  auto& stack = state_.stack;
  const CompPtr m = state_.comp;
  auto top_is = [&](FrameTag t) { return !stack.empty() && stack.back().tag == t; };
  auto top_name = [&]() -> std::string { return stack.empty() ? "the empty stack" : frame_name(stack.back().tag); };
  switch (m->tag) {
    case CompTag::Force: {
      ValuePtr v = resolve(m->val);
      if (v->tag == ValueTag::Thunk) {
        state_.comp = v->comp;
        break;
      }
      if (v->tag == ValueTag::Var || v->tag == ValueTag::Prim) {
        if (auto o = delta(v->name)) return o;
        ++state_.steps;
        return std::nullopt;
      }
      return stuck("force of a non-thunk value " + print(v));
    }
    case CompTag::Let:
      state_.comp = subst_comp(m->m, m->val, m->x);
      break;
    case CompTag::LetPair: {
      ValuePtr v = resolve(m->val);
      if (v->tag != ValueTag::Pair) return stuck("let-pair of a non-pair " + print(v));
      state_.comp = subst_comp(subst_comp(m->m, v->a, m->x), v->b, m->y);
      break;
    }
    case CompTag::Match: {
      ValuePtr v = resolve(m->val);
      if (v->tag != ValueTag::Inj) return stuck("match on a non-constructor " + print(v));
      const Arm* arm = nullptr;
      for (const auto& a : m->arms)
        if (a.tag == v->name) arm = &a;
      if (!arm) return stuck("no arm for constructor " + v->name);
      state_.comp = arm->binder.empty() || arm->binder == "_" ? arm->body : subst_comp(arm->body, v->a, arm->binder);
      break;
    }
    case CompTag::Unpack: {
      ValuePtr v = resolve(m->val);
      if (v->tag != ValueTag::Pack) return stuck("unpack of a non-package " + print(v));
      state_.comp = subst_comp(subst_type_comp(m->m, v->type, m->x), v->a, m->y);
      break;
    }
    case CompTag::Return: {
      if (stack.empty()) {
        Outcome o = finish(OutcomeTag::Terminated);
        o.value = resolve(m->val);
        return o;
      }
      if (!top_is(FrameTag::Kont)) return stuck(std::string("return against ") + top_name());
      Frame f = std::move(stack.back());
      stack.pop_back();
      state_.comp = subst_comp(f.body, m->val, f.name);
      break;
    }
    case CompTag::Bind:
      stack.push_back({FrameTag::Kont, m->x, m->m, nullptr, nullptr});
      state_.comp = m->m0;
      break;
    case CompTag::Lam: {
      if (!top_is(FrameTag::Arg)) return stuck(std::string("function against ") + top_name());
      ValuePtr arg = stack.back().value;
      stack.pop_back();
      state_.comp = subst_comp(m->m, arg, m->x);
      break;
    }
    case CompTag::App:
      stack.push_back({FrameTag::Arg, {}, nullptr, m->val, nullptr});
      state_.comp = m->m;
      break;
    case CompTag::Comatch: {
      if (!top_is(FrameTag::Dtor)) return stuck(std::string("comatch against ") + top_name());
      std::string tag = stack.back().name;
      const Arm* arm = nullptr;
      for (const auto& a : m->arms)
        if (a.tag == tag) arm = &a;
      if (!arm) return stuck("comatch has no arm for ." + tag);
      stack.pop_back();
      state_.comp = arm->body;
      break;
    }
    case CompTag::Dtor:
      stack.push_back({FrameTag::Dtor, m->x, nullptr, nullptr, nullptr});
      state_.comp = m->m;
      break;
    case CompTag::TyLam: {
      if (!top_is(FrameTag::TyArg)) return stuck(std::string("type abstraction against ") + top_name());
      TypePtr t = stack.back().type;
      stack.pop_back();
      state_.comp = subst_type_comp(m->m, t, m->x);
      break;
    }
    case CompTag::TyApp:
      stack.push_back({FrameTag::TyArg, {}, nullptr, nullptr, m->type});
      state_.comp = m->m;
      break;
    case CompTag::Roll:
      if (!top_is(FrameTag::Unroll)) return stuck(std::string("roll against ") + top_name());
      stack.pop_back();
      state_.comp = m->m;
      break;
    case CompTag::Unroll:
      stack.push_back({FrameTag::Unroll, {}, nullptr, nullptr, nullptr});
      state_.comp = m->m;
      break;
    case CompTag::Fix:
      state_.comp = subst_comp(m->m, v_thunk(m), m->x);
      break;
    case CompTag::Monadic:
      return stuck("monadic block reached the machine; eliminate blocks first");
  }
  ++state_.steps;
  return std::nullopt;
}

Outcome Machine::run() {
  while (true) {
    if (options_.trace) options_.trace(trace_line());
    if (state_.steps >= options_.fuel) return finish(OutcomeTag::OutOfFuel);
    // Recognizing a terminal or stuck state is not a transition.
    if (auto o = step()) return *o;
  }
}

Outcome run(const CompPtr& entry, const RunOptions& options, const GlobalLookup& globals) {
  return Machine(entry, options, globals).run();
}

std::vector<TraceLine> trace(const CompPtr& entry, const RunOptions& options, const GlobalLookup& globals) {
  std::vector<TraceLine> lines;
  RunOptions opts = options;
  opts.trace = [&lines](const TraceLine& l) { lines.push_back(l); };
  Machine(entry, opts, globals).run();
  return lines;
}

}  // namespace cbpv

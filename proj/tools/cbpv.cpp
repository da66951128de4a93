#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cbpv/error.hpp"
#include "cbpv/laws.hpp"
#include "cbpv/machine.hpp"
#include "cbpv/session.hpp"

namespace fs = std::filesystem;
using namespace cbpv;

namespace {

enum Exit { kOk = 0, kError = 1, kStuck = 2, kFuel = 3, kUsage = 4, kExited = 5 };

struct Common {
  std::uint64_t fuel = 1000000;
  std::uint64_t seed = 0;
  bool no_prelude = false;
  bool trace = false;
};

int report(const Error& e) {
  std::cerr << "error: " << e.what() << '\n';
  return kError;
}

Session base_session(bool with_prelude) {
  Session s;
  if (with_prelude) s.load_prelude();
  return s;
}

int exit_code(const Outcome& o) {
  switch (o.tag) {
    case OutcomeTag::Terminated: return kOk;
    case OutcomeTag::Exited: return o.code == 0 ? kOk : kExited;
    case OutcomeTag::Stuck: return kStuck;
    case OutcomeTag::OutOfFuel: return kFuel;
  }
  return kError;
}

int cmd_check(const std::vector<std::string>& paths) {
  for (const auto& path : paths) {
    Session s;
    if (fs::is_directory(path)) {
      s.load_prelude(path);
      std::cout << path << ": ok (" << s.order().size() << " definitions)\n";
      continue;
    }
    s.load_prelude();
    LoadResult r = s.load_file(path);
    std::cout << path << ": ok (" << r.defs.size() << " definitions";
    if (r.main) std::cout << ", main : " << print(r.main_type);
    std::cout << ")\n";
  }
  return kOk;
}

// Runs `main` of a file. Program output goes to `out`; the trace, when
// requested, to `trace_out`.
int execute(const std::string& path, const Common& opts, std::ostream& out, std::ostream* trace_out) {
  Session s = base_session(!opts.no_prelude);
  LoadResult r = s.load_file(path);
  if (!r.main) {
    std::cerr << "error: " << path << " has no main\n";
    return kUsage;
  }
  RunOptions ro;
  ro.fuel = opts.fuel;
  ro.seed = opts.seed;
  ro.os_entry = r.main_type->tag == TypeTag::Prim && r.main_type->prim == PrimType::OS;
  ro.out = &out;
  if (trace_out) ro.trace = [trace_out](const TraceLine& l) { *trace_out << format(l) << '\n'; };
  Outcome o = run(r.main, ro, [&s](const std::string& name) { return s.runtime_value(name); });
  if (o.tag == OutcomeTag::Terminated)
    out << print(o.value) << '\n';
  else if (o.tag != OutcomeTag::Exited || o.code != 0)
    std::cerr << describe(o) << '\n';
  return exit_code(o);
}

int cmd_elaborate(const std::string& path, const std::string& out_path, bool no_prelude) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << path << '\n';
    return kError;
  }
  std::ostringstream text;
  text << in.rdbuf();
  Session s = base_session(!no_prelude);
  std::string result = print(elaborate_module(s, text.str(), path));
  if (out_path.empty()) {
    std::cout << result;
    return kOk;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << out_path << '\n';
    return kUsage;
  }
  out << result;
  return kOk;
}

void print_report(const LawReport& r, std::size_t width, std::ostream& out) {
  std::string verdict = r.passed() ? "pass" : "fail";
  if (r.expected_failure) verdict += r.passed() ? " (expected to fail)" : " (expected)";
  std::string count = std::to_string(r.failures.size()) + "/" + std::to_string(r.samples);
  out << std::left << std::setw(static_cast<int>(width)) << r.subject << std::setw(15) << r.law << std::setw(8)
      << count << verdict << '\n';
  if (!r.failures.empty()) {
    const LawFailure& f = r.failures.front();
    out << "    first failure: sample " << f.sample << ": " << describe(f.lhs) << " vs " << describe(f.rhs) << '\n';
  }
}

int cmd_laws(const std::string& monad, const LawOptions& options, bool algebras) {
  Session s = base_session(true);
  std::vector<std::string> monads;
  if (monad == "all")
    monads = law_monads();
  else if (std::find(law_monads().begin(), law_monads().end(), monad) != law_monads().end())
    monads = {monad};
  else {
    std::cerr << "error: no observation context for " << monad << "; known: all";
    for (const auto& m : law_monads()) std::cerr << ' ' << m;
    std::cerr << '\n';
    return kUsage;
  }
  std::size_t width = 0;
  for (const auto& m : monads) width = std::max(width, m.size());
  if (algebras)
    for (const auto& b : algebra_carriers()) width = std::max(width, b.size());
  width += 2;
  bool ok = true;
  for (const auto& m : monads)
    for (const auto& r : check_monad_laws(s, m, options)) {
      print_report(r, width, std::cout);
      ok = ok && r.as_expected();
    }
  if (algebras)
    for (const auto& b : algebra_carriers())
      for (const auto& r : check_algebra_laws(s, b, {}, options)) {
        print_report(r, width, std::cout);
        ok = ok && r.as_expected();
      }
  return ok ? kOk : kError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Call-by-push-value with relative monads"};
  app.require_subcommand(1);
  Common opts;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--fuel", opts.fuel, "Maximum machine steps");
    sub->add_option("--seed", opts.seed, "Seed for random_int");
    sub->add_flag("--no-prelude", opts.no_prelude, "Do not load the prelude");
  };

  std::vector<std::string> check_paths;
  auto* check = app.add_subcommand("check", "Kind- and type-check files or a prelude directory");
  check->add_option("paths", check_paths)->required();

  std::string file;
  auto* run_cmd = app.add_subcommand("run", "Run main of a file");
  run_cmd->add_option("file", file)->required();
  add_run_flags(run_cmd);
  run_cmd->add_flag("--trace", opts.trace, "Print machine states to stderr");

  auto* trace_cmd = app.add_subcommand("trace", "Print the machine trace of main");
  trace_cmd->add_option("file", file)->required();
  add_run_flags(trace_cmd);

  std::string out_path;
  auto* elab = app.add_subcommand("elaborate", "Print the block-free translation of a file");
  elab->add_option("file", file)->required();
  elab->add_option("-o,--output", out_path, "Write to a file instead of stdout");
  elab->add_flag("--no-prelude", opts.no_prelude, "Do not load the prelude");

  std::string monad = "all";
  LawOptions law_opts;
  bool algebras = false;
  auto* laws = app.add_subcommand("laws", "Test the monad laws on sampled instances");
  laws->add_option("--monad", monad, "Monad name, or all");
  laws->add_option("--samples", law_opts.samples, "Samples per law");
  laws->add_option("--seed", law_opts.seed, "Sampling seed");
  laws->add_option("--fuel", law_opts.fuel, "Maximum machine steps per side");
  laws->add_flag("--algebras", algebras, "Also test the generated algebras");

  auto* prelude = app.add_subcommand("prelude", "Load the prelude and list its definitions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*check) return cmd_check(check_paths);
    if (*run_cmd) return execute(file, opts, std::cout, opts.trace ? &std::cerr : nullptr);
    if (*trace_cmd) return execute(file, opts, std::cerr, &std::cout);
    if (*elab) return cmd_elaborate(file, out_path, opts.no_prelude);
    if (*laws) return cmd_laws(monad, law_opts, algebras);
    if (*prelude) {
      Session s = base_session(true);
      for (const auto& name : s.order()) {
        const Definition* d = s.find(name);
        if (!d->companion) std::cout << name << " : " << print(d->type) << '\n';
      }
      return kOk;
    }
  } catch (const Error& e) {
    return report(e);
  }
  return kUsage;
}

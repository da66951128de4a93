#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cbpv/elaborate.hpp"
#include "cbpv/parser.hpp"
#include "cbpv/typecheck.hpp"

namespace cbpv {

struct Definition {
  std::string name;
  TypePtr type;         // aliases expanded, normalized
  ValuePtr source;      // aliases expanded
  ValuePtr checked;     // annotated by the checker
  ValuePtr elaborated;  // block-free
  std::string file;
  Span span;
  bool companion = false;
};

struct Alias {
  std::string name;
  TypePtr closed;  // parameters folded into type lambdas
  KindPtr kind;
  std::string file;
};

struct LoadResult {
  std::vector<std::string> defs;        // source order
  std::vector<std::string> companions;  // generated while loading this text
  std::vector<std::string> aliases;
  CompPtr main;  // checked and block-free
  TypePtr main_type;
};

// A growing set of checked top-level definitions. Copies are independent.
class Session : public GlobalScope, public BlockGlobals {
 public:
  // Re-check every elaborated definition after loading.
  bool verify = true;

  LoadResult load(std::string_view text, const std::string& file = "<input>");
  LoadResult load_file(const std::string& path);

  // Load the prelude files in manifest order and compare against the manifest.
  void load_prelude(const std::string& dir = default_prelude_dir());
  static std::string default_prelude_dir();

  TypePtr expand(const TypePtr& t) const;
  ValuePtr expand(const ValuePtr& v) const;
  CompPtr expand(const CompPtr& m) const;

  // Parse, expand and normalize a closed type.
  TypePtr type(std::string_view text) const;

  struct Prepared {
    CompPtr checked;     // annotated, blocks still present
    CompPtr elaborated;  // block-free
    TypePtr type;
  };
  // Check a closed computation: synthesized, or against `expected`, or at OS
  // when it does not synthesize. Blocks are then eliminated.
  Prepared prepare(const CompPtr& m, const TypePtr& expected = nullptr);
  Prepared prepare(std::string_view text, const TypePtr& expected = nullptr);

  // Add a single definition; `type` and `value` are expanded here.
  void define(const std::string& name, const TypePtr& type, const ValuePtr& value,
              const std::string& file = "<generated>");

  const Definition* find(const std::string& name) const;
  const std::vector<std::string>& order() const { return order_; }
  const std::map<std::string, Alias>& aliases() const { return aliases_; }

  // Runtime value of a global (block-free), or null.
  ValuePtr runtime_value(const std::string& name) const;

  const TypePtr* global_type(const std::string& name) const override;
  ValuePtr global_value(const std::string& name) const override;
  std::string companion(const std::string& name) override;

 private:
  std::map<std::string, Definition> defs_;
  std::vector<std::string> order_;
  std::map<std::string, Alias> aliases_;
  std::deque<std::string> pending_companions_;
  std::vector<std::string> new_companions_;
  std::set<std::string> elaborating_;

  void add_aliases(const std::vector<AliasDecl>& decls, const std::string& file, LoadResult& out);
  void check_name(const std::string& name, Span span, const std::string& file) const;
  void register_def(const std::string& name, const TypePtr& type, const ValuePtr& value, Span span,
                    const std::string& file);
  void check_def(const std::string& name);
  const Definition& elaborate_def(const std::string& name);
  std::string register_companion(const std::string& base);
  void generate_companions();
  void discard_unfinished_companions();
  LoadResult load_all(std::string_view text, const std::string& file);
  Prepared prepare_main(const CompPtr& m, const TypePtr& expected);
  void verify_def(const std::string& name);
};

// Load `text` into `session` and return its block-free form: the source
// aliases, elaborated definitions, companions of those definitions and main.
Module elaborate_module(Session& session, std::string_view text, const std::string& file = "<input>");

}  // namespace cbpv

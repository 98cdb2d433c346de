#pragma once

// A checked model with every code block compiled to a bound CFG.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "constabl/cfg.hpp"
#include "constabl/diagnostic.hpp"
#include "constabl/model.hpp"

namespace constabl {

/// Identity of one code block. Entry blocks include the local and parameter
/// initializers that run before the entry code.
struct CodeBlockId {
  enum class Kind { exit, entry, action };
  Kind kind = Kind::exit;
  std::uint32_t owner = 0;  // StateId for exit/entry, TransitionId for action

  static CodeBlockId exit_of(StateId s) { return {Kind::exit, s.value}; }
  static CodeBlockId entry_of(StateId s) { return {Kind::entry, s.value}; }
  static CodeBlockId action_of(TransitionId t) { return {Kind::action, t.value}; }

  auto operator<=>(const CodeBlockId&) const = default;
};

class InvalidModelError : public std::runtime_error {
 public:
  InvalidModelError(const std::string& what, Diagnostics diags)
      : std::runtime_error(what), diagnostics(std::move(diags)) {}
  Diagnostics diagnostics;
};

class Program {
 public:
  /// Runs check_model and throws InvalidModelError if it reports errors.
  explicit Program(Model model);

  const Model& model() const { return *model_; }
  std::shared_ptr<const Model> shared_model() const { return model_; }

  const Cfg& cfg(CodeBlockId id) const;
  const Cfg& exit_cfg(StateId s) const { return exit_[s.value]; }
  const Cfg& entry_cfg(StateId s) const { return entry_[s.value]; }
  const Cfg& action_cfg(TransitionId t) const { return action_[t.value]; }

  /// cca of the transition's endpoints: the scope of its guard and action.
  StateId scope(TransitionId t) const { return scope_[t.value]; }
  const std::vector<VarBinding>& guard_bindings(TransitionId t) const { return guard_bindings_[t.value]; }

  /// Number of entry-CFG nodes that are variable initializers.
  std::size_t initializer_count(StateId s) const { return init_count_[s.value]; }

  /// ASCII label, e.g. "A.exit", "A.entry", "t_AB.action".
  std::string label(CodeBlockId id) const;
  /// Abbreviated label, e.g. "A.𝒳", "A.𝒩", "t_AB.a".
  std::string short_label(CodeBlockId id) const;
  std::optional<CodeBlockId> parse_label(std::string_view text) const;

  /// Qualified identity of a variable, "State.var".
  std::string qualified_name(VarRef ref) const;

 private:
  std::shared_ptr<const Model> model_;
  std::vector<Cfg> exit_;
  std::vector<Cfg> entry_;
  std::vector<Cfg> action_;
  std::vector<StateId> scope_;
  std::vector<std::vector<VarBinding>> guard_bindings_;
  std::vector<std::size_t> init_count_;
};

/// Parses and checks a .cstl file. Throws InvalidModelError carrying every
/// diagnostic on failure; warnings are returned through *warnings.
std::shared_ptr<const Program> load_program(const std::string& path, Diagnostics* warnings = nullptr);

/// Collects bindings for every variable referenced by e.
void bind_expr(const Model& model, const Expr& e, StateId scope, const ResolveOptions& opts,
               std::vector<VarBinding>& out);

}  // namespace constabl

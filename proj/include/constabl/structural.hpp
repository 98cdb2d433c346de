#pragma once

// Containment queries over the state hierarchy and the static checker.

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "constabl/diagnostic.hpp"
#include "constabl/model.hpp"

namespace constabl {

using StateSet = std::vector<StateId>;

class NoCommonAncestorError : public std::runtime_error {
 public:
  explicit NoCommonAncestorError(const std::string& what) : std::runtime_error(what) {}
};

/// True iff s2 lies on the strict parent chain of s1 (s1 is a descendant of s2).
bool is_ancestor(const Model& model, StateId s1, StateId s2);

/// Direct children in declaration order.
StateSet substates(const Model& model, StateId s);

/// Strict ancestors of s, innermost first, ending at the root.
StateSet ancestors(const Model& model, StateId s);

/// States strictly ancestral to every member of ss, innermost first.
StateSet common_ancestors(const Model& model, const StateSet& ss);

/// Closest common ancestor. Throws NoCommonAncestorError when ss contains the root.
StateId cca(const Model& model, const StateSet& ss);
StateId cca_transitions(const Model& model, const std::vector<TransitionId>& ts);

/// A resolved variable: the declaring state and the index into its vars.
struct VarRef {
  StateId state;
  std::uint32_t index = 0;
  auto operator<=>(const VarRef&) const = default;
};

struct ResolveOptions {
  // Only vars[0, visible_in_scope) of the scope state itself are visible.
  std::size_t visible_in_scope = std::numeric_limits<std::size_t>::max();
  bool statics_only = false;
};

/// Innermost-first lookup along the containment chain starting at scope.
std::optional<VarRef> resolve_variable(const Model& model, StateId scope, std::string_view name,
                                       ResolveOptions opts = {});

const VarDecl& var_decl(const Model& model, VarRef ref);

/// The state whose variables a transition's guard and action may use.
StateId transition_scope(const Model& model, TransitionId t);

/// Full static check of containment and transition rules plus variable
/// scoping and typing. Warnings do not make a model invalid.
Diagnostics check_model(const Model& model, const std::string& file = "<input>");

}  // namespace constabl

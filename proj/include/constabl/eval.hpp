#pragma once

// Variable environment and expression evaluation.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "constabl/cfg.hpp"
#include "constabl/model.hpp"
#include "constabl/structural.hpp"

namespace constabl {

class EvalError : public std::runtime_error {
 public:
  // kind: division-by-zero, overflow, unresolved-variable, dead-variable, type
  EvalError(std::string kind, const std::string& what) : std::runtime_error(what), kind(std::move(kind)) {}
  std::string kind;
};

/// σ: one frame per state. Statics persist for the whole run; locals and
/// parameters exist only while their frame is live.
class Environment {
 public:
  Environment() = default;
  explicit Environment(const Model& model);

  const Value& get(VarRef ref) const;
  void set(VarRef ref, Value v);

  bool live(StateId s) const { return live_.at(s.value) != 0; }
  /// Creates or resets the local frame of s; locals get their type's zero value.
  void activate(StateId s);
  void drop(StateId s);

  const std::vector<Value>& frame(StateId s) const { return values_.at(s.value); }

  bool operator==(const Environment&) const = default;

 private:
  const Model* model_ = nullptr;
  std::vector<std::vector<Value>> values_;
  std::vector<char> live_;
};

using VarLookup = std::function<Value(const std::string& name)>;
using StatePredicate = std::function<bool(const std::string& state)>;

/// Evaluates e, resolving names through `lookup`. `and`/`or` short-circuit.
/// `in(S)` is only available when `in_state` is provided.
Value eval(const Expr& e, const VarLookup& lookup, const StatePredicate* in_state = nullptr);

/// Evaluates e against pre-resolved bindings.
Value eval_bound(const Expr& e, const std::vector<VarBinding>& bindings, const Environment& env);

/// Resolves names innermost-first from `scope` and evaluates e.
Value eval_expr(const Model& model, const Environment& env, StateId scope, const Expr& e);

}  // namespace constabl

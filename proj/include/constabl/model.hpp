#pragma once

// Abstract syntax of ConStaBL models and of the embedded action language.

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace constabl {

struct SourceLocation {
  std::uint32_t line = 0;
  std::uint32_t column = 0;
  auto operator<=>(const SourceLocation&) const = default;
};

struct SourceSpan {
  SourceLocation begin;
  SourceLocation end;
};

// Strong index types. Ids are dense indices into the owning Model's tables.
struct StateId {
  std::uint32_t value = 0;
  auto operator<=>(const StateId&) const = default;
};

struct TransitionId {
  std::uint32_t value = 0;
  auto operator<=>(const TransitionId&) const = default;
};

struct EventId {
  std::uint32_t value = 0;
  auto operator<=>(const EventId&) const = default;
};

enum class VarType { integer, boolean };

std::string_view to_string(VarType t);

/// A runtime value: a 64-bit signed integer or a boolean.
class Value {
 public:
  Value() = default;
  static Value integer(std::int64_t v) { return Value(v); }
  static Value boolean(bool v) { return Value(v); }

  VarType type() const { return std::holds_alternative<bool>(v_) ? VarType::boolean : VarType::integer; }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  bool as_bool() const { return std::get<bool>(v_); }

  std::string to_string() const;
  bool operator==(const Value&) const = default;

 private:
  explicit Value(std::int64_t v) : v_(v) {}
  explicit Value(bool v) : v_(v) {}
  std::variant<std::int64_t, bool> v_{std::int64_t{0}};
};

enum class StateType { statechart, atomic, composite, shell };
enum class StorageClass { parameter, local, static_ };

std::string_view to_string(StateType t);
std::string_view to_string(StorageClass s);

enum class BinaryOp { add, sub, mul, div, eq, ne, lt, le, gt, ge, and_, or_ };
enum class UnaryOp { neg, not_ };
// in_state is only accepted in fuzz predicates: in(StateName).
enum class Builtin { min, max, abs, in_state };

std::string_view to_string(BinaryOp op);
std::string_view to_string(Builtin b);

struct Expr {
  enum class Kind { int_const, bool_const, var, unary, binary, call };

  Kind kind = Kind::bool_const;
  std::int64_t int_value = 0;
  bool bool_value = true;
  std::string name;  // variable name (may be dotted in predicates)
  UnaryOp unary_op = UnaryOp::neg;
  BinaryOp binary_op = BinaryOp::add;
  Builtin builtin = Builtin::min;
  std::vector<Expr> args;  // operands or call arguments
  SourceSpan span;

  static Expr make_int(std::int64_t v, SourceSpan sp = {});
  static Expr make_bool(bool v, SourceSpan sp = {});
  static Expr make_var(std::string name, SourceSpan sp = {});
  static Expr make_unary(UnaryOp op, Expr operand, SourceSpan sp = {});
  static Expr make_binary(BinaryOp op, Expr lhs, Expr rhs, SourceSpan sp = {});
  static Expr make_call(Builtin b, std::vector<Expr> args, SourceSpan sp = {});

  bool is_true_literal() const { return kind == Kind::bool_const && bool_value; }
};

struct Stmt;
using Block = std::vector<Stmt>;

struct Stmt {
  enum class Kind { assign, if_, while_, skip };

  Kind kind = Kind::skip;
  std::string var;  // assign target
  Expr expr;        // assign rhs or if/while condition
  Block body;       // then-branch or loop body
  Block else_body;
  SourceSpan span;

  static Stmt make_assign(std::string var, Expr e, SourceSpan sp = {});
  static Stmt make_if(Expr cond, Block then_b, Block else_b, SourceSpan sp = {});
  static Stmt make_while(Expr cond, Block body, SourceSpan sp = {});
  static Stmt make_skip(SourceSpan sp = {});
};

struct VarDecl {
  std::string name;
  StorageClass storage = StorageClass::local;
  VarType type = VarType::integer;
  Expr init;
  SourceSpan span;
};

struct State {
  std::string name;
  std::optional<StateId> parent;
  StateType type = StateType::atomic;
  std::vector<StateId> children;  // declaration order
  std::vector<StateId> initial;   // I
  std::vector<VarDecl> vars;
  Block entry;
  Block exit;
  std::vector<TransitionId> transitions;  // declared inside this state
  SourceSpan span;
};

struct Transition {
  std::string name;
  StateId parent;
  StateId source;
  StateId dest;
  EventId event;
  Expr guard = Expr::make_bool(true);
  Block action;
  SourceSpan span;
};

/// Thrown by lookups on names that are not part of the model.
class UnknownNameError : public std::runtime_error {
 public:
  explicit UnknownNameError(const std::string& what) : std::runtime_error(what) {}
};

/// A statechart model over its states and transitions. The root is always
/// states()[0] and is the only state of type statechart. Immutable after
/// construction; normally produced by parse_model.
class Model {
 public:
  Model() = default;
  Model(std::string name, std::vector<std::string> events, std::vector<State> states,
        std::vector<Transition> transitions);

  const std::string& name() const { return name_; }
  StateId root() const { return StateId{0}; }

  const std::vector<State>& states() const { return states_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<std::string>& events() const { return events_; }

  const State& state(StateId id) const { return states_.at(id.value); }
  const Transition& transition(TransitionId id) const { return transitions_.at(id.value); }
  const std::string& event_name(EventId id) const { return events_.at(id.value); }

  std::optional<StateId> find_state(std::string_view name) const;
  std::optional<TransitionId> find_transition(std::string_view name) const;
  std::optional<EventId> find_event(std::string_view name) const;

  // Throwing variants.
  StateId state_id(std::string_view name) const;
  TransitionId transition_id(std::string_view name) const;
  EventId event_id(std::string_view name) const;

  std::size_t state_count() const { return states_.size(); }
  std::size_t transition_count() const { return transitions_.size(); }

 private:
  std::string name_;
  std::vector<std::string> events_;
  std::vector<State> states_;
  std::vector<Transition> transitions_;
  std::unordered_map<std::string, StateId> state_index_;
  std::unordered_map<std::string, TransitionId> transition_index_;
  std::unordered_map<std::string, EventId> event_index_;
};

const State& lookup_state(const Model& model, std::string_view name);
std::optional<StateId> parent_of(const Model& model, StateId s);

// Structural equality, ignoring source spans.
bool equal(const Expr& a, const Expr& b);
bool equal(const Block& a, const Block& b);
bool equal(const Model& a, const Model& b);

}  // namespace constabl

template <>
struct std::hash<constabl::StateId> {
  std::size_t operator()(constabl::StateId id) const noexcept { return id.value; }
};
template <>
struct std::hash<constabl::TransitionId> {
  std::size_t operator()(constabl::TransitionId id) const noexcept { return id.value; }
};

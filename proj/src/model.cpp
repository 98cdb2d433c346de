#include "constabl/model.hpp"

#include <stdexcept>

namespace constabl {

std::string_view to_string(VarType t) { return t == VarType::integer ? "int" : "bool"; }

std::string Value::to_string() const {
  if (is_bool()) return as_bool() ? "true" : "false";
  return std::to_string(as_int());
}

std::string_view to_string(StateType t) {
  switch (t) {
    case StateType::statechart: return "statechart";
    case StateType::atomic: return "atomic";
    case StateType::composite: return "composite";
    case StateType::shell: return "shell";
  }
  return "?";
}

std::string_view to_string(StorageClass s) {
  switch (s) {
    case StorageClass::parameter: return "param";
    case StorageClass::local: return "local";
    case StorageClass::static_: return "static";
  }
  return "?";
}

std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
    case BinaryOp::eq: return "==";
    case BinaryOp::ne: return "!=";
    case BinaryOp::lt: return "<";
    case BinaryOp::le: return "<=";
    case BinaryOp::gt: return ">";
    case BinaryOp::ge: return ">=";
    case BinaryOp::and_: return "and";
    case BinaryOp::or_: return "or";
  }
  return "?";
}

std::string_view to_string(Builtin b) {
  switch (b) {
    case Builtin::min: return "min";
    case Builtin::max: return "max";
    case Builtin::abs: return "abs";
    case Builtin::in_state: return "in";
  }
  return "?";
}

Expr Expr::make_int(std::int64_t v, SourceSpan sp) {
  Expr e;
  e.kind = Kind::int_const;
  e.int_value = v;
  e.span = sp;
  return e;
}

Expr Expr::make_bool(bool v, SourceSpan sp) {
  Expr e;
  e.kind = Kind::bool_const;
  e.bool_value = v;
  e.span = sp;
  return e;
}

Expr Expr::make_var(std::string name, SourceSpan sp) {
  Expr e;
  e.kind = Kind::var;
  e.name = std::move(name);
  e.span = sp;
  return e;
}

Expr Expr::make_unary(UnaryOp op, Expr operand, SourceSpan sp) {
  Expr e;
  e.kind = Kind::unary;
  e.unary_op = op;
  e.args.push_back(std::move(operand));
  e.span = sp;
  return e;
}

Expr Expr::make_binary(BinaryOp op, Expr lhs, Expr rhs, SourceSpan sp) {
  Expr e;
  e.kind = Kind::binary;
  e.binary_op = op;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  e.span = sp;
  return e;
}

Expr Expr::make_call(Builtin b, std::vector<Expr> args, SourceSpan sp) {
  Expr e;
  e.kind = Kind::call;
  e.builtin = b;
  e.args = std::move(args);
  e.span = sp;
  return e;
}

Stmt Stmt::make_assign(std::string var, Expr e, SourceSpan sp) {
  Stmt s;
  s.kind = Kind::assign;
  s.var = std::move(var);
  s.expr = std::move(e);
  s.span = sp;
  return s;
}

Stmt Stmt::make_if(Expr cond, Block then_b, Block else_b, SourceSpan sp) {
  Stmt s;
  s.kind = Kind::if_;
  s.expr = std::move(cond);
  s.body = std::move(then_b);
  s.else_body = std::move(else_b);
  s.span = sp;
  return s;
}

Stmt Stmt::make_while(Expr cond, Block body, SourceSpan sp) {
  Stmt s;
  s.kind = Kind::while_;
  s.expr = std::move(cond);
  s.body = std::move(body);
  s.span = sp;
  return s;
}

Stmt Stmt::make_skip(SourceSpan sp) {
  Stmt s;
  s.kind = Kind::skip;
  s.span = sp;
  return s;
}

Model::Model(std::string name, std::vector<std::string> events, std::vector<State> states,
             std::vector<Transition> transitions)
    : name_(std::move(name)),
      events_(std::move(events)),
      states_(std::move(states)),
      transitions_(std::move(transitions)) {
  if (states_.empty() || states_[0].type != StateType::statechart || states_[0].parent) {
    throw std::invalid_argument("model root must be a parentless statechart state at index 0");
  }
  for (std::uint32_t i = 0; i < states_.size(); ++i) {
    if (!state_index_.emplace(states_[i].name, StateId{i}).second) {
      throw std::invalid_argument("duplicate state name '" + states_[i].name + "'");
    }
  }
  for (std::uint32_t i = 0; i < transitions_.size(); ++i) {
    if (!transition_index_.emplace(transitions_[i].name, TransitionId{i}).second) {
      throw std::invalid_argument("duplicate transition name '" + transitions_[i].name + "'");
    }
  }
  for (std::uint32_t i = 0; i < events_.size(); ++i) {
    if (!event_index_.emplace(events_[i], EventId{i}).second) {
      throw std::invalid_argument("duplicate event name '" + events_[i] + "'");
    }
  }
}

std::optional<StateId> Model::find_state(std::string_view name) const {
  auto it = state_index_.find(std::string(name));
  if (it == state_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<TransitionId> Model::find_transition(std::string_view name) const {
  auto it = transition_index_.find(std::string(name));
  if (it == transition_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<EventId> Model::find_event(std::string_view name) const {
  auto it = event_index_.find(std::string(name));
  if (it == event_index_.end()) return std::nullopt;
  return it->second;
}

StateId Model::state_id(std::string_view name) const {
  if (auto id = find_state(name)) return *id;
  throw UnknownNameError("unknown state '" + std::string(name) + "'");
}

TransitionId Model::transition_id(std::string_view name) const {
  if (auto id = find_transition(name)) return *id;
  throw UnknownNameError("unknown transition '" + std::string(name) + "'");
}

EventId Model::event_id(std::string_view name) const {
  if (auto id = find_event(name)) return *id;
  throw UnknownNameError("unknown event '" + std::string(name) + "'");
}

const State& lookup_state(const Model& model, std::string_view name) {
  return model.state(model.state_id(name));
}

std::optional<StateId> parent_of(const Model& model, StateId s) { return model.state(s).parent; }

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::int_const: return a.int_value == b.int_value;
    case Expr::Kind::bool_const: return a.bool_value == b.bool_value;
    case Expr::Kind::var: return a.name == b.name;
    case Expr::Kind::unary:
      if (a.unary_op != b.unary_op) return false;
      break;
    case Expr::Kind::binary:
      if (a.binary_op != b.binary_op) return false;
      break;
    case Expr::Kind::call:
      if (a.builtin != b.builtin) return false;
      break;
  }
  if (a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!equal(a.args[i], b.args[i])) return false;
  }
  return true;
}

namespace {

bool equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Stmt::Kind::skip: return true;
    case Stmt::Kind::assign: return a.var == b.var && equal(a.expr, b.expr);
    case Stmt::Kind::while_: return equal(a.expr, b.expr) && equal(a.body, b.body);
    case Stmt::Kind::if_:
      return equal(a.expr, b.expr) && equal(a.body, b.body) && equal(a.else_body, b.else_body);
  }
  return false;
}

bool equal(const VarDecl& a, const VarDecl& b) {
  return a.name == b.name && a.storage == b.storage && a.type == b.type && equal(a.init, b.init);
}

}  // namespace

bool equal(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!equal(a[i], b[i])) return false;
  }
  return true;
}

bool equal(const Model& a, const Model& b) {
  if (a.name() != b.name() || a.events() != b.events()) return false;
  if (a.state_count() != b.state_count() || a.transition_count() != b.transition_count()) {
    return false;
  }
  for (std::size_t i = 0; i < a.state_count(); ++i) {
    const State& x = a.states()[i];
    const State& y = b.states()[i];
    if (x.name != y.name || x.parent != y.parent || x.type != y.type || x.children != y.children ||
        x.initial != y.initial || x.transitions != y.transitions || x.vars.size() != y.vars.size()) {
      return false;
    }
    for (std::size_t v = 0; v < x.vars.size(); ++v) {
      if (!equal(x.vars[v], y.vars[v])) return false;
    }
    if (!equal(x.entry, y.entry) || !equal(x.exit, y.exit)) return false;
  }
  for (std::size_t i = 0; i < a.transition_count(); ++i) {
    const Transition& x = a.transitions()[i];
    const Transition& y = b.transitions()[i];
    if (x.name != y.name || x.parent != y.parent || x.source != y.source || x.dest != y.dest ||
        x.event != y.event || !equal(x.guard, y.guard) || !equal(x.action, y.action)) {
      return false;
    }
  }
  return true;
}

}  // namespace constabl

#include "constabl/eval.hpp"

#include <cstdint>
#include <limits>

namespace constabl {

namespace {

Value zero_of(VarType t) { return t == VarType::boolean ? Value::boolean(false) : Value::integer(0); }

std::int64_t as_int(const Value& v) {
  if (!v.is_int()) throw EvalError("type", "expected an int value");
  return v.as_int();
}

bool as_bool(const Value& v) {
  if (!v.is_bool()) throw EvalError("type", "expected a bool value");
  return v.as_bool();
}

[[noreturn]] void overflow(const char* op) {
  throw EvalError("overflow", std::string("integer overflow in ") + op);
}

Value arith(BinaryOp op, std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  switch (op) {
    case BinaryOp::add:
      if (__builtin_add_overflow(a, b, &r)) overflow("+");
      return Value::integer(r);
    case BinaryOp::sub:
      if (__builtin_sub_overflow(a, b, &r)) overflow("-");
      return Value::integer(r);
    case BinaryOp::mul:
      if (__builtin_mul_overflow(a, b, &r)) overflow("*");
      return Value::integer(r);
    case BinaryOp::div:
      if (b == 0) throw EvalError("division-by-zero", "division by zero");
      if (a == std::numeric_limits<std::int64_t>::min() && b == -1) overflow("/");
      return Value::integer(a / b);
    case BinaryOp::lt: return Value::boolean(a < b);
    case BinaryOp::le: return Value::boolean(a <= b);
    case BinaryOp::gt: return Value::boolean(a > b);
    case BinaryOp::ge: return Value::boolean(a >= b);
    default: break;
  }
  throw EvalError("type", "bad arithmetic operator");
}

}  // namespace

Environment::Environment(const Model& model) : model_(&model) {
  values_.resize(model.state_count());
  live_.assign(model.state_count(), 0);
  for (std::uint32_t i = 0; i < model.state_count(); ++i) {
    for (const auto& v : model.state(StateId{i}).vars) values_[i].push_back(zero_of(v.type));
  }
}

const Value& Environment::get(VarRef ref) const {
  const VarDecl& d = var_decl(*model_, ref);
  if (d.storage != StorageClass::static_ && !live(ref.state)) {
    throw EvalError("dead-variable", "variable '" + model_->state(ref.state).name + "." + d.name +
                                         "' is read outside the lifetime of its state");
  }
  return values_[ref.state.value][ref.index];
}

void Environment::set(VarRef ref, Value v) {
  const VarDecl& d = var_decl(*model_, ref);
  if (d.storage != StorageClass::static_ && !live(ref.state)) {
    throw EvalError("dead-variable", "variable '" + model_->state(ref.state).name + "." + d.name +
                                         "' is written outside the lifetime of its state");
  }
  values_[ref.state.value][ref.index] = v;
}

void Environment::activate(StateId s) {
  const auto& vars = model_->state(s).vars;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].storage != StorageClass::static_) values_[s.value][i] = zero_of(vars[i].type);
  }
  live_[s.value] = 1;
}

void Environment::drop(StateId s) {
  const auto& vars = model_->state(s).vars;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].storage != StorageClass::static_) values_[s.value][i] = zero_of(vars[i].type);
  }
  live_[s.value] = 0;
}

Value eval(const Expr& e, const VarLookup& lookup, const StatePredicate* in_state) {
  switch (e.kind) {
    case Expr::Kind::int_const: return Value::integer(e.int_value);
    case Expr::Kind::bool_const: return Value::boolean(e.bool_value);
    case Expr::Kind::var: return lookup(e.name);
    case Expr::Kind::unary: {
      Value v = eval(e.args[0], lookup, in_state);
      if (e.unary_op == UnaryOp::not_) return Value::boolean(!as_bool(v));
      std::int64_t x = as_int(v);
      if (x == std::numeric_limits<std::int64_t>::min()) overflow("unary -");
      return Value::integer(-x);
    }
    case Expr::Kind::binary: {
      if (e.binary_op == BinaryOp::and_ || e.binary_op == BinaryOp::or_) {
        bool l = as_bool(eval(e.args[0], lookup, in_state));
        if (e.binary_op == BinaryOp::and_ && !l) return Value::boolean(false);
        if (e.binary_op == BinaryOp::or_ && l) return Value::boolean(true);
        return Value::boolean(as_bool(eval(e.args[1], lookup, in_state)));
      }
      Value l = eval(e.args[0], lookup, in_state);
      Value r = eval(e.args[1], lookup, in_state);
      if (e.binary_op == BinaryOp::eq) return Value::boolean(l == r);
      if (e.binary_op == BinaryOp::ne) return Value::boolean(!(l == r));
      return arith(e.binary_op, as_int(l), as_int(r));
    }
    case Expr::Kind::call: {
      if (e.builtin == Builtin::in_state) {
        if (!in_state || e.args.size() != 1) throw EvalError("type", "'in' is not available here");
        return Value::boolean((*in_state)(e.args[0].name));
      }
      std::vector<std::int64_t> xs;
      for (const auto& a : e.args) xs.push_back(as_int(eval(a, lookup, in_state)));
      if (e.builtin == Builtin::abs) {
        if (xs.size() != 1) throw EvalError("type", "abs takes one argument");
        if (xs[0] == std::numeric_limits<std::int64_t>::min()) overflow("abs");
        return Value::integer(xs[0] < 0 ? -xs[0] : xs[0]);
      }
      if (xs.size() != 2) throw EvalError("type", "min/max take two arguments");
      return Value::integer(e.builtin == Builtin::min ? std::min(xs[0], xs[1]) : std::max(xs[0], xs[1]));
    }
  }
  throw EvalError("type", "malformed expression");
}

Value eval_bound(const Expr& e, const std::vector<VarBinding>& bindings, const Environment& env) {
  return eval(e, [&](const std::string& name) -> Value {
    for (const auto& b : bindings) {
      if (b.name == name) return env.get(b.ref);
    }
    throw EvalError("unresolved-variable", "internal error: unresolved variable '" + name + "'");
  });
}

Value eval_expr(const Model& model, const Environment& env, StateId scope, const Expr& e) {
  return eval(e, [&](const std::string& name) -> Value {
    auto ref = resolve_variable(model, scope, name);
    if (!ref) throw EvalError("unresolved-variable", "internal error: unresolved variable '" + name + "'");
    return env.get(*ref);
  });
}

}  // namespace constabl

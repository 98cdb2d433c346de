#include "constabl/structural.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace constabl {

bool is_ancestor(const Model& model, StateId s1, StateId s2) {
  for (auto p = model.state(s1).parent; p; p = model.state(*p).parent) {
    if (*p == s2) return true;
  }
  return false;
}

StateSet substates(const Model& model, StateId s) { return model.state(s).children; }

StateSet ancestors(const Model& model, StateId s) {
  StateSet out;
  for (auto p = model.state(s).parent; p; p = model.state(*p).parent) out.push_back(*p);
  return out;
}

StateSet common_ancestors(const Model& model, const StateSet& ss) {
  if (ss.empty()) return {};
  StateSet out;
  for (StateId a : ancestors(model, ss.front())) {
    bool all = std::all_of(ss.begin() + 1, ss.end(), [&](StateId s) { return is_ancestor(model, s, a); });
    if (all) out.push_back(a);
  }
  return out;
}

StateId cca(const Model& model, const StateSet& ss) {
  StateSet ca = common_ancestors(model, ss);
  if (ca.empty()) throw NoCommonAncestorError("the given states have no common ancestor");
  // The chain is innermost first, so the first common ancestor is the closest.
  return ca.front();
}

StateId cca_transitions(const Model& model, const std::vector<TransitionId>& ts) {
  StateSet ends;
  for (TransitionId t : ts) {
    ends.push_back(model.transition(t).source);
    ends.push_back(model.transition(t).dest);
  }
  return cca(model, ends);
}

std::optional<VarRef> resolve_variable(const Model& model, StateId scope, std::string_view name,
                                       ResolveOptions opts) {
  std::optional<StateId> cur = scope;
  bool first = true;
  while (cur) {
    const State& s = model.state(*cur);
    std::size_t limit = first ? std::min(opts.visible_in_scope, s.vars.size()) : s.vars.size();
    for (std::size_t i = limit; i-- > 0;) {
      if (s.vars[i].name != name) continue;
      if (opts.statics_only && s.vars[i].storage != StorageClass::static_) return std::nullopt;
      return VarRef{*cur, static_cast<std::uint32_t>(i)};
    }
    first = false;
    cur = s.parent;
  }
  return std::nullopt;
}

const VarDecl& var_decl(const Model& model, VarRef ref) { return model.state(ref.state).vars.at(ref.index); }

StateId transition_scope(const Model& model, TransitionId t) { return cca_transitions(model, {t}); }

namespace {

class Checker {
 public:
  Checker(const Model& m, const std::string& file) : m_(m), file_(file) {}

  Diagnostics run() {
    check_containment();
    for (std::uint32_t i = 0; i < m_.transition_count(); ++i) check_transition(TransitionId{i});
    for (std::uint32_t i = 0; i < m_.state_count(); ++i) check_state_code(StateId{i});
    return std::move(diags_);
  }

 private:
  using Resolver = std::function<std::optional<VarRef>(const std::string&)>;

  void report(Severity sev, SourceLocation loc, std::string code, std::string msg) {
    diags_.push_back({sev, file_, loc, std::move(code), std::move(msg)});
  }
  void error(SourceLocation loc, std::string code, std::string msg) {
    report(Severity::error, loc, std::move(code), std::move(msg));
  }

  void check_containment() {
    for (std::uint32_t i = 0; i < m_.state_count(); ++i) {
      const State& s = m_.state(StateId{i});
      const bool is_root = i == 0;
      if (is_root != (s.type == StateType::statechart)) {
        error(s.span.begin, "S-containment",
              is_root ? "the root must be of type statechart" : "state '" + s.name + "' cannot be of type statechart");
      }
      if (s.type == StateType::atomic && !s.children.empty()) {
        error(s.span.begin, "S-containment", "atomic state '" + s.name + "' cannot have substates");
      }
      if (s.type == StateType::shell) {
        if (s.children.empty()) {
          error(s.span.begin, "S-containment", "shell state '" + s.name + "' must have at least one region");
        } else if (s.children.size() == 1) {
          report(Severity::warning, s.span.begin, "W-shell1",
                 "shell state '" + s.name + "' has a single region; it never runs anything concurrently");
        }
        for (StateId c : s.children) {
          const State& cs = m_.state(c);
          if (cs.type != StateType::composite) {
            error(cs.span.begin, "S-containment",
                  "region '" + cs.name + "' of shell '" + s.name + "' must be composite, not " +
                      std::string(to_string(cs.type)));
          }
        }
      }
    }
  }

  void check_transition(TransitionId tid) {
    const Transition& t = m_.transition(tid);
    const State& src = m_.state(t.source);
    const State& dst = m_.state(t.dest);
    bool structurally_ok = true;
    if (src.type == StateType::statechart || dst.type == StateType::statechart) {
      error(t.span.begin, "T3", "transition '" + t.name + "' touches the statechart state '" + m_.state(m_.root()).name + "'");
      structurally_ok = false;
    }
    if (is_ancestor(m_, t.source, t.dest) || is_ancestor(m_, t.dest, t.source)) {
      error(t.span.begin, "T2",
            "transition '" + t.name + "' connects '" + src.name + "' and '" + dst.name +
                "', which are in an ancestor/descendant relation");
      structurally_ok = false;
    }
    if (!structurally_ok) return;
    StateId l = cca(m_, {t.source, t.dest});
    if (m_.state(l).type == StateType::shell) {
      error(t.span.begin, "T1",
            "transition '" + t.name + "' crosses between regions of shell state '" + m_.state(l).name + "'");
      return;
    }
    Resolver res = [&](const std::string& n) { return resolve_variable(m_, l, n); };
    auto g = infer(t.guard, res);
    if (g && *g != VarType::boolean) {
      error(t.guard.span.begin, "G-bool", "guard of transition '" + t.name + "' must be bool, found int");
    }
    check_block(t.action, res);
  }

  void check_state_code(StateId sid) {
    const State& s = m_.state(sid);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < s.vars.size(); ++i) {
      const VarDecl& v = s.vars[i];
      if (!seen.insert(v.name).second) {
        error(v.span.begin, "V-dup", "variable '" + v.name + "' is declared twice in state '" + s.name + "'");
      }
      ResolveOptions opts;
      opts.visible_in_scope = i;
      opts.statics_only = v.storage == StorageClass::static_;
      Resolver res = [&, opts](const std::string& n) { return resolve_variable(m_, sid, n, opts); };
      auto ty = infer(v.init, res);
      if (ty && *ty != v.type) {
        error(v.init.span.begin, "V-type",
              "initializer of '" + v.name + "' has type " + std::string(to_string(*ty)) + ", declared " +
                  std::string(to_string(v.type)));
      }
    }
    Resolver res = [&](const std::string& n) { return resolve_variable(m_, sid, n); };
    check_block(s.entry, res);
    check_block(s.exit, res);
  }

  void check_block(const Block& b, const Resolver& res) {
    for (const auto& st : b) check_stmt(st, res);
  }

  void check_stmt(const Stmt& st, const Resolver& res) {
    switch (st.kind) {
      case Stmt::Kind::skip: return;
      case Stmt::Kind::assign: {
        auto ref = res(st.var);
        auto ty = infer(st.expr, res);
        if (!ref) {
          error(st.span.begin, "V-scope", "assignment to undeclared or out-of-scope variable '" + st.var + "'");
          return;
        }
        VarType target = var_decl(m_, *ref).type;
        if (ty && *ty != target) {
          error(st.expr.span.begin, "V-type",
                "cannot assign " + std::string(to_string(*ty)) + " to '" + st.var + "' of type " +
                    std::string(to_string(target)));
        }
        return;
      }
      case Stmt::Kind::if_:
      case Stmt::Kind::while_: {
        auto ty = infer(st.expr, res);
        if (ty && *ty != VarType::boolean) error(st.expr.span.begin, "V-type", "condition must be bool");
        check_block(st.body, res);
        check_block(st.else_body, res);
        return;
      }
    }
  }

  std::optional<VarType> expect(const Expr& e, VarType want, const Resolver& res) {
    auto ty = infer(e, res);
    if (ty && *ty != want) {
      error(e.span.begin, "V-type",
            "expected " + std::string(to_string(want)) + ", found " + std::string(to_string(*ty)));
    }
    return ty;
  }

  // Returns nullopt when the type could not be determined (an error was already reported).
  std::optional<VarType> infer(const Expr& e, const Resolver& res) {
    switch (e.kind) {
      case Expr::Kind::int_const: return VarType::integer;
      case Expr::Kind::bool_const: return VarType::boolean;
      case Expr::Kind::var: {
        auto ref = res(e.name);
        if (!ref) {
          error(e.span.begin, "V-scope", "undeclared or out-of-scope variable '" + e.name + "'");
          return std::nullopt;
        }
        return var_decl(m_, *ref).type;
      }
      case Expr::Kind::unary:
        if (e.unary_op == UnaryOp::not_) {
          expect(e.args[0], VarType::boolean, res);
          return VarType::boolean;
        }
        expect(e.args[0], VarType::integer, res);
        return VarType::integer;
      case Expr::Kind::binary:
        switch (e.binary_op) {
          case BinaryOp::add:
          case BinaryOp::sub:
          case BinaryOp::mul:
          case BinaryOp::div:
            expect(e.args[0], VarType::integer, res);
            expect(e.args[1], VarType::integer, res);
            return VarType::integer;
          case BinaryOp::and_:
          case BinaryOp::or_:
            expect(e.args[0], VarType::boolean, res);
            expect(e.args[1], VarType::boolean, res);
            return VarType::boolean;
          case BinaryOp::eq:
          case BinaryOp::ne: {
            auto l = infer(e.args[0], res);
            auto r = infer(e.args[1], res);
            if (l && r && *l != *r) error(e.span.begin, "V-type", "cannot compare int with bool");
            return VarType::boolean;
          }
          default:
            expect(e.args[0], VarType::integer, res);
            expect(e.args[1], VarType::integer, res);
            return VarType::boolean;
        }
      case Expr::Kind::call: {
        if (e.builtin == Builtin::in_state) {
          error(e.span.begin, "V-type", "'in' may only be used in fuzz predicates");
          return VarType::boolean;
        }
        std::size_t arity = e.builtin == Builtin::abs ? 1 : 2;
        if (e.args.size() != arity) {
          error(e.span.begin, "V-type",
                std::string(to_string(e.builtin)) + " takes " + std::to_string(arity) + " argument(s), got " +
                    std::to_string(e.args.size()));
        }
        for (const auto& a : e.args) expect(a, VarType::integer, res);
        return VarType::integer;
      }
    }
    return std::nullopt;
  }

  const Model& m_;
  const std::string& file_;
  Diagnostics diags_;
};

}  // namespace

Diagnostics check_model(const Model& model, const std::string& file) { return Checker(model, file).run(); }

}  // namespace constabl

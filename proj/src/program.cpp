#include "constabl/program.hpp"

#include <algorithm>

#include "constabl/parser.hpp"
#include "constabl/structural.hpp"

namespace constabl {

void bind_expr(const Model& model, const Expr& e, StateId scope, const ResolveOptions& opts,
               std::vector<VarBinding>& out) {
  if (e.kind == Expr::Kind::var) {
    bool known = std::any_of(out.begin(), out.end(), [&](const VarBinding& b) { return b.name == e.name; });
    if (!known) {
      if (auto ref = resolve_variable(model, scope, e.name, opts)) out.push_back({e.name, *ref});
    }
    return;
  }
  for (const auto& a : e.args) bind_expr(model, a, scope, opts, out);
}

namespace {

void bind_node(const Model& model, CfgNode& n, StateId scope) {
  if (!n.target.empty()) {
    if (auto ref = resolve_variable(model, scope, n.target)) n.bindings.push_back({n.target, *ref});
  }
  if (!n.is_skip()) bind_expr(model, n.expr, scope, {}, n.bindings);
}

void bind_cfg(const Model& model, Cfg& cfg, StateId scope) {
  for (auto& n : cfg.nodes) bind_node(model, n, scope);
}

}  // namespace

Program::Program(Model model) {
  Diagnostics diags = check_model(model);
  if (has_errors(diags)) throw InvalidModelError("model has static errors", std::move(diags));
  model_ = std::make_shared<const Model>(std::move(model));
  const Model& m = *model_;

  for (std::uint32_t i = 0; i < m.state_count(); ++i) {
    StateId sid{i};
    const State& s = m.state(sid);
    Cfg ex = build_cfg(s.exit);
    bind_cfg(m, ex, sid);
    exit_.push_back(std::move(ex));

    Block entry;
    std::vector<std::uint32_t> init_vars;
    for (std::uint32_t v = 0; v < s.vars.size(); ++v) {
      if (s.vars[v].storage == StorageClass::static_) continue;
      entry.push_back(Stmt::make_assign(s.vars[v].name, s.vars[v].init, s.vars[v].span));
      init_vars.push_back(v);
    }
    entry.insert(entry.end(), s.entry.begin(), s.entry.end());
    Cfg en = build_cfg(entry);
    // Initializers are straight-line, so they occupy the first node ids and
    // see only the variables declared before them.
    for (std::size_t k = 0; k < init_vars.size(); ++k) {
      CfgNode& n = en.nodes[k];
      n.bindings.push_back({n.target, VarRef{sid, init_vars[k]}});
      ResolveOptions opts;
      opts.visible_in_scope = init_vars[k];
      bind_expr(m, n.expr, sid, opts, n.bindings);
    }
    for (std::size_t k = init_vars.size(); k < en.nodes.size(); ++k) bind_node(m, en.nodes[k], sid);
    init_count_.push_back(init_vars.size());
    entry_.push_back(std::move(en));
  }

  for (std::uint32_t i = 0; i < m.transition_count(); ++i) {
    TransitionId tid{i};
    StateId sc = transition_scope(m, tid);
    scope_.push_back(sc);
    Cfg a = build_cfg(m.transition(tid).action);
    bind_cfg(m, a, sc);
    action_.push_back(std::move(a));
    std::vector<VarBinding> gb;
    bind_expr(m, m.transition(tid).guard, sc, {}, gb);
    guard_bindings_.push_back(std::move(gb));
  }
}

const Cfg& Program::cfg(CodeBlockId id) const {
  switch (id.kind) {
    case CodeBlockId::Kind::exit: return exit_.at(id.owner);
    case CodeBlockId::Kind::entry: return entry_.at(id.owner);
    case CodeBlockId::Kind::action: return action_.at(id.owner);
  }
  return exit_.at(id.owner);
}

std::string Program::label(CodeBlockId id) const {
  switch (id.kind) {
    case CodeBlockId::Kind::exit: return model_->state(StateId{id.owner}).name + ".exit";
    case CodeBlockId::Kind::entry: return model_->state(StateId{id.owner}).name + ".entry";
    case CodeBlockId::Kind::action: return model_->transition(TransitionId{id.owner}).name + ".action";
  }
  return "?";
}

std::string Program::short_label(CodeBlockId id) const {
  switch (id.kind) {
    case CodeBlockId::Kind::exit: return model_->state(StateId{id.owner}).name + ".\xF0\x9D\x92\xB3";
    case CodeBlockId::Kind::entry: return model_->state(StateId{id.owner}).name + ".\xF0\x9D\x92\xA9";
    case CodeBlockId::Kind::action: return model_->transition(TransitionId{id.owner}).name + ".a";
  }
  return "?";
}

std::optional<CodeBlockId> Program::parse_label(std::string_view text) const {
  auto dot = text.rfind('.');
  if (dot == std::string_view::npos) return std::nullopt;
  std::string_view owner = text.substr(0, dot);
  std::string_view kind = text.substr(dot + 1);
  if (kind == "exit" || kind == "entry") {
    auto s = model_->find_state(owner);
    if (!s) return std::nullopt;
    return kind == "exit" ? CodeBlockId::exit_of(*s) : CodeBlockId::entry_of(*s);
  }
  if (kind == "action") {
    auto t = model_->find_transition(owner);
    if (!t) return std::nullopt;
    return CodeBlockId::action_of(*t);
  }
  return std::nullopt;
}

std::string Program::qualified_name(VarRef ref) const {
  return model_->state(ref.state).name + "." + var_decl(*model_, ref).name;
}

std::shared_ptr<const Program> load_program(const std::string& path, Diagnostics* warnings) {
  ParseResult pr = parse_file(path);
  if (!pr.ok()) throw InvalidModelError("cannot parse " + path, std::move(pr.diagnostics));
  Diagnostics diags = pr.diagnostics;
  Diagnostics checked = check_model(*pr.model, path);
  diags.insert(diags.end(), checked.begin(), checked.end());
  if (has_errors(diags)) throw InvalidModelError(path + " has static errors", std::move(diags));
  if (warnings) *warnings = diags;
  return std::make_shared<const Program>(std::move(*pr.model));
}

}  // namespace constabl

#include "constabl/engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace constabl {

Configuration make_configuration(const Model& model, const std::vector<std::string>& names) {
  Configuration c;
  for (const auto& n : names) c.push_back(model.state_id(n));
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

std::vector<std::string> state_names(const Model& model, const Configuration& c) {
  std::vector<std::string> out;
  for (StateId s : c) out.push_back(model.state(s).name);
  return out;
}

std::string to_string(const Model& model, const Configuration& c) {
  std::string out = "{";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += ", ";
    out += model.state(c[i]).name;
  }
  return out + "}";
}

bool is_valid_configuration(const Model& model, const Configuration& c) {
  if (c.empty()) return false;
  for (StateId s : c) {
    if (model.state(s).type != StateType::atomic) return false;
  }
  std::set<StateId> in = cst_states(model, c);
  for (StateId s : in) {
    const State& st = model.state(s);
    std::size_t active = std::count_if(st.children.begin(), st.children.end(), [&](StateId ch) { return in.count(ch) > 0; });
    switch (st.type) {
      case StateType::statechart:
      case StateType::composite:
        if (active != 1) return false;
        break;
      case StateType::shell:
        if (active != st.children.size()) return false;
        break;
      case StateType::atomic: break;
    }
  }
  return true;
}

std::vector<TransitionId> enabled_transitions(const Program& program, const Configuration& c, const Environment& env,
                                              EventId e) {
  const Model& m = program.model();
  std::set<StateId> active = cst_states(m, c);
  std::vector<TransitionId> out;
  for (std::uint32_t i = 0; i < m.transition_count(); ++i) {
    TransitionId tid{i};
    const Transition& t = m.transition(tid);
    if (t.event != e || !active.count(t.source)) continue;
    try {
      if (eval_bound(t.guard, program.guard_bindings(tid), env).as_bool()) out.push_back(tid);
    } catch (const EvalError& err) {
      throw GuardError(err, tid, "guard of '" + t.name + "': " + err.what());
    }
  }
  return out;
}

std::string to_string(StepStatus s) {
  switch (s) {
    case StepStatus::fired: return "fired";
    case StepStatus::in_progress: return "in-progress";
    case StepStatus::event_lost: return "event-lost";
    case StepStatus::conflict: return "conflict";
    case StepStatus::runtime_error: return "runtime-error";
    case StepStatus::nontermination: return "nontermination";
    case StepStatus::invalid_configuration: return "invalid-configuration";
  }
  return "?";
}

// ---------------------------------------------------------------------------

ControlPoint RandomScheduler::choose(const std::vector<ControlPoint>& cp, const CodeNavigator&) {
  return cp[rng_() % cp.size()];
}

ControlPoint ScriptedScheduler::choose(const std::vector<ControlPoint>& cp, const CodeNavigator& nav) {
  if (pos_ >= script_.size()) return cp.front();
  const std::string& want = script_[pos_];
  auto parsed = nav.parse(want);
  if (!parsed || !std::binary_search(cp.begin(), cp.end(), *parsed)) {
    throw SchedulerError("scripted control point '" + want + "' is not in CP");
  }
  ++pos_;
  return *parsed;
}

// ---------------------------------------------------------------------------

CodeSimulation::CodeSimulation(const Program& program, Code code, Environment env, std::uint32_t step,
                               EngineOptions opts, Trace* trace)
    : program_(program), nav_(program, std::move(code)), env_(std::move(env)), step_(step), opts_(opts), trace_(trace) {
  for (ControlPoint p : nav_.first()) activate(p.leaf);
}

void CodeSimulation::activate(std::uint32_t leaf) {
  cp_.insert(nav_.entry_point(leaf));
  CodeBlockId b = nav_.block(leaf);
  if (b.kind == CodeBlockId::Kind::entry) env_.activate(StateId{b.owner});
}

std::vector<std::string> CodeSimulation::reads_of(const CfgNode& n) const {
  std::vector<std::string> names;
  std::vector<const Expr*> stack{&n.expr};
  while (!stack.empty()) {
    const Expr* e = stack.back();
    stack.pop_back();
    if (e->kind == Expr::Kind::var) {
      for (const auto& b : n.bindings) {
        if (b.name == e->name) names.push_back(program_.qualified_name(b.ref));
      }
    }
    for (const auto& a : e->args) stack.push_back(&a);
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

void CodeSimulation::execute(ControlPoint cp) {
  if (!cp_.count(cp)) throw std::invalid_argument("control point '" + nav_.label(cp) + "' is not in CP");
  attempted_ = cp;
  if (++executed_ > opts_.step_budget) {
    throw NonterminationError("step exceeded the budget of " + std::to_string(opts_.step_budget) + " executions");
  }
  const CfgNode& n = nav_.node(cp);
  TraceRecord rec;
  rec.step = step_;
  rec.block = program_.label(nav_.block(cp.leaf));
  rec.node = cp.node;
  rec.branch = nav_.branch_of(cp.leaf);
  bool outcome = false;
  if (n.kind == CfgNode::Kind::decision) {
    rec.kind = "decision";
    Value v = eval_bound(n.expr, n.bindings, env_);
    if (!v.is_bool()) throw EvalError("type", "condition did not evaluate to bool");
    outcome = v.as_bool();
    rec.outcome = outcome;
  } else {
    rec.kind = "instr";
    if (!n.is_skip()) {
      Value v = eval_bound(n.expr, n.bindings, env_);
      const VarBinding& target = n.bindings.front();
      rec.var = program_.qualified_name(target.ref);
      rec.old_value = env_.get(target.ref);
      env_.set(target.ref, v);
      rec.new_value = v;
    }
  }
  if (opts_.record_reads && !n.is_skip()) rec.reads = reads_of(n);
  if (trace_) trace_->push_back(std::move(rec));
  attempted_.reset();

  cp_.erase(cp);
  if (!nav_.is_exit(cp)) {
    NodeId next = n.kind == CfgNode::Kind::decision ? (outcome ? n.then_succ : n.else_succ) : *n.succ;
    cp_.insert({cp.leaf, next});
    return;
  }
  for (std::uint32_t j : nav_.next_cfg_codes(cp.leaf)) {
    const auto& preds = nav_.predecessors(j);
    if (preds.size() == 1) {
      activate(j);
      continue;
    }
    ControlPoint key = nav_.entry_point(j);
    auto it = jp_.find(key);
    if (it == jp_.end()) {
      std::set<ControlPoint> pending;
      for (std::uint32_t p : preds) pending.insert(nav_.exit_point(p));
      pending.erase(cp);
      jp_.emplace(key, std::move(pending));
    } else {
      it->second.erase(cp);
      if (it->second.empty()) {
        jp_.erase(it);
        activate(j);
      }
    }
  }
}

void CodeSimulation::run(Scheduler& sched) {
  while (!cp_.empty()) execute(sched.choose(cp(), nav_));
}

// ---------------------------------------------------------------------------

Simulator::Simulator(std::shared_ptr<const Program> program, EngineOptions opts)
    : program_(std::move(program)), opts_(opts), env_(program_->model()) {}

StepResult Simulator::init(Scheduler& sched, std::optional<std::uint64_t> seed) {
  if (initialized_ || pending_) throw std::logic_error("simulator is already initialized");
  const Model& m = program_->model();
  step_ = 0;
  trace_.clear();
  TraceRecord begin;
  begin.kind = "init";
  begin.step = 0;
  begin.seed = seed;
  trace_.push_back(begin);

  StepResult r;
  r.step = 0;
  env_ = Environment(m);
  // Statics are initialized once, ancestors before descendants.
  for (std::uint32_t i = 0; i < m.state_count(); ++i) {
    const State& s = m.state(StateId{i});
    for (std::uint32_t v = 0; v < s.vars.size(); ++v) {
      if (s.vars[v].storage != StorageClass::static_) continue;
      ResolveOptions opts;
      opts.visible_in_scope = v;
      opts.statics_only = true;
      try {
        Value val = eval(s.vars[v].init, [&](const std::string& name) -> Value {
          auto ref = resolve_variable(m, StateId{i}, name, opts);
          if (!ref) throw EvalError("unresolved-variable", "internal error: unresolved variable '" + name + "'");
          return env_.get(*ref);
        });
        env_.set(VarRef{StateId{i}, v}, val);
      } catch (const EvalError& e) {
        r.block = s.name + "." + s.vars[v].name;
        return fail(r, StepStatus::runtime_error, e.kind, std::string("static initializer: ") + e.what());
      }
    }
  }

  StateTree init_tree = initial_subtree(m, m.root());
  Code code = code_of(treemap(init_tree, [](StateId s) { return CodeBlockId::entry_of(s); }));
  pending_ = std::make_unique<CodeSimulation>(*program_, std::move(code), env_, 0, opts_, &trace_);
  pending_fired_.clear();
  Configuration target = leaves(init_tree);
  std::sort(target.begin(), target.end());
  r.after = target;
  pending_result_ = r;
  try {
    while (!pending_->done()) {
      ControlPoint cp = sched.choose(pending_->cp(), pending_->navigator());
      pending_->execute(cp);
    }
  } catch (const EvalError& e) {
    return fail(r, StepStatus::runtime_error, e.kind, e.what());
  } catch (const NonterminationError& e) {
    return fail(r, StepStatus::nontermination, "nontermination", e.what());
  } catch (const SchedulerError& e) {
    return fail(r, StepStatus::runtime_error, "scheduler", e.what());
  }
  initialized_ = true;
  return finish(r);
}

StepResult Simulator::begin_step(EventId e) {
  if (!initialized_) throw std::logic_error("simulator is not initialized");
  if (pending_) throw std::logic_error("a step is already in progress");
  const Model& m = program_->model();
  ++step_;
  TraceRecord begin;
  begin.kind = "step-begin";
  begin.step = step_;
  begin.event = m.event_name(e);
  trace_.push_back(begin);

  StepResult r;
  r.step = step_;
  r.before = config_;
  std::vector<TransitionId> ts;
  try {
    ts = enabled_transitions(*program_, config_, env_, e);
  } catch (const GuardError& err) {
    r.block = m.transition(err.transition).name + ".guard";
    return fail(r, StepStatus::runtime_error, err.kind, err.what());
  }
  if (ts.empty()) {
    TraceRecord lost;
    lost.kind = "event-lost";
    lost.step = step_;
    lost.event = m.event_name(e);
    trace_.push_back(lost);
    r.status = StepStatus::event_lost;
    r.after = config_;
    TraceRecord end;
    end.kind = "step-end";
    end.step = step_;
    end.status = to_string(r.status);
    trace_.push_back(end);
    return r;
  }
  TraceRecord fired;
  fired.kind = "transitions";
  fired.step = step_;
  for (TransitionId t : ts) fired.transitions.push_back(m.transition(t).name);
  trace_.push_back(fired);
  r.fired = ts;

  Code code;
  try {
    code = step_code(*program_, ts, config_);
  } catch (const ConflictError& err) {
    r.conflict_pair = std::make_pair(err.first, err.second);
    r.shared = err.blocks;
    TraceRecord rec;
    rec.kind = "error";
    rec.step = step_;
    rec.error = "conflict";
    rec.detail = err.what();
    rec.transitions = {m.transition(err.first).name, m.transition(err.second).name};
    for (const auto& b : err.blocks) rec.blocks.push_back(program_->label(b));
    trace_.push_back(rec);
    r.status = StepStatus::conflict;
    r.error_kind = "conflict";
    r.detail = err.what();
    r.after = config_;
    TraceRecord end;
    end.kind = "step-end";
    end.step = step_;
    end.status = to_string(r.status);
    trace_.push_back(end);
    return r;
  }

  // ℂ' = (ℂ minus the exited leaves) plus the entered leaves.
  std::set<StateId> next(config_.begin(), config_.end());
  for (TransitionId t : ts) {
    for (StateId s : leaves(source_state_tree(m, t, config_))) next.erase(s);
  }
  for (TransitionId t : ts) {
    for (StateId s : leaves(dest_state_tree(m, t))) next.insert(s);
  }
  r.after.assign(next.begin(), next.end());
  pending_ = std::make_unique<CodeSimulation>(*program_, std::move(code), env_, step_, opts_, &trace_);
  pending_fired_ = ts;
  r.status = StepStatus::in_progress;
  pending_result_ = r;
  return r;
}

StepResult Simulator::choose(ControlPoint cp) {
  if (!pending_) throw std::logic_error("no step is in progress");
  StepResult r = pending_result_;
  try {
    pending_->execute(cp);
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const EvalError& e) {
    return fail(r, StepStatus::runtime_error, e.kind, e.what());
  } catch (const NonterminationError& e) {
    return fail(r, StepStatus::nontermination, "nontermination", e.what());
  }
  if (!pending_->done()) return r;
  return finish(r);
}

StepResult Simulator::step(EventId e, Scheduler& sched) {
  StepResult r = begin_step(e);
  while (r.status == StepStatus::in_progress) {
    ControlPoint cp;
    try {
      cp = sched.choose(pending_->cp(), pending_->navigator());
    } catch (const SchedulerError& err) {
      return fail(pending_result_, StepStatus::runtime_error, "scheduler", err.what());
    }
    r = choose(cp);
  }
  return r;
}

StepResult Simulator::finish(StepResult r) {
  const Model& m = program_->model();
  if (!is_valid_configuration(m, r.after)) {
    return fail(r, StepStatus::invalid_configuration, "invalid-configuration",
                "resulting configuration " + to_string(m, r.after) + " is not valid");
  }
  env_ = pending_->take_env();
  pending_.reset();
  std::set<StateId> alive = cst_states(m, r.after);
  for (std::uint32_t i = 0; i < m.state_count(); ++i) {
    if (env_.live(StateId{i}) && !alive.count(StateId{i})) env_.drop(StateId{i});
  }
  TraceRecord cfg;
  cfg.kind = "config";
  cfg.step = r.step;
  cfg.config_old = state_names(m, config_);
  cfg.config_new = state_names(m, r.after);
  trace_.push_back(cfg);
  config_ = r.after;
  r.status = StepStatus::fired;
  TraceRecord end;
  end.kind = "step-end";
  end.step = r.step;
  end.status = to_string(r.status);
  trace_.push_back(end);
  return r;
}

StepResult Simulator::fail(StepResult r, StepStatus status, const std::string& kind, const std::string& detail) {
  if (pending_) {
    if (auto at = pending_->failed_at(); r.block.empty() && at) {
      r.block = program_->label(pending_->navigator().block(at->leaf));
      r.node = at->node;
    }
    pending_.reset();
  }
  r.status = status;
  r.error_kind = kind;
  r.detail = detail;
  r.after = config_;
  TraceRecord rec;
  rec.kind = "error";
  rec.step = r.step;
  rec.error = kind;
  rec.detail = detail;
  rec.block = r.block;
  rec.node = r.node;
  trace_.push_back(rec);
  TraceRecord end;
  end.kind = "step-end";
  end.step = r.step;
  end.status = to_string(status);
  trace_.push_back(end);
  return r;
}

SimulationResult simulate(std::shared_ptr<const Program> program, const std::vector<std::string>& events,
                          Scheduler& sched, EngineOptions opts, std::optional<std::uint64_t> seed, bool halt_on_error) {
  std::vector<EventId> ids;
  for (const auto& e : events) {
    auto id = program->model().find_event(e);
    if (!id) throw std::invalid_argument("unknown event '" + e + "'");
    ids.push_back(*id);
  }
  Simulator sim(program, opts);
  SimulationResult out;
  out.steps.push_back(sim.init(sched, seed));
  out.ok = out.steps.back().ok();
  if (sim.initialized()) {
    for (EventId e : ids) {
      out.steps.push_back(sim.step(e, sched));
      if (!out.steps.back().ok()) {
        out.ok = false;
        if (halt_on_error) break;
      }
    }
  }
  out.trace = sim.trace();
  out.final_config = sim.configuration();
  out.final_env = sim.environment();
  return out;
}

}  // namespace constabl

#include "constabl/fuzz.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "constabl/parser.hpp"

namespace constabl {

namespace {

using json = nlohmann::json;

const std::set<std::string> kConfigKeys = {"max_events", "runs",       "event_budget", "time_budget_ms", "seed",
                                           "oracles",    "undesired",  "goals",        "minimize",       "step_budget"};
const std::set<std::string> kOracleKeys = {"non_determinism", "concurrency_conflict", "write_conflict", "read_write",
                                           "undesired",       "runtime_error",        "reachability"};

void require_state(const Model& m, const std::string& name, const std::string& where) {
  if (!m.find_state(name)) throw FuzzConfigError(where + ": unknown state '" + name + "'");
}

// Splits "State.var" into its parts; returns false for undotted names.
bool split_qualified(const std::string& name, std::string& state, std::string& var) {
  auto dot = name.rfind('.');
  if (dot == std::string::npos) return false;
  state = name.substr(0, dot);
  var = name.substr(dot + 1);
  return true;
}

std::optional<VarRef> find_qualified(const Model& m, const std::string& name) {
  std::string st, var;
  if (!split_qualified(name, st, var)) return std::nullopt;
  auto sid = m.find_state(st);
  if (!sid) return std::nullopt;
  const auto& vars = m.state(*sid).vars;
  for (std::uint32_t i = 0; i < vars.size(); ++i) {
    if (vars[i].name == var) return VarRef{*sid, i};
  }
  return std::nullopt;
}

void check_predicate_names(const Model& m, const Expr& e, const std::string& where) {
  if (e.kind == Expr::Kind::var) {
    if (!find_qualified(m, e.name)) {
      throw FuzzConfigError(where + ": '" + e.name + "' does not name a variable (use State.var)");
    }
    return;
  }
  if (e.kind == Expr::Kind::call && e.builtin == Builtin::in_state) {
    if (e.args.size() != 1 || e.args[0].kind != Expr::Kind::var) throw FuzzConfigError(where + ": in() takes a state name");
    require_state(m, e.args[0].name, where);
    return;
  }
  for (const auto& a : e.args) check_predicate_names(m, a, where);
}

bool predicate_holds(const Model& m, const UndesiredPredicate& p, const std::set<StateId>& active,
                     const Environment& env) {
  for (const auto& s : p.states) {
    if (!active.count(m.state_id(s))) return false;
  }
  if (!p.expr) return true;
  StatePredicate in = [&](const std::string& name) {
    auto id = m.find_state(name);
    return id && active.count(*id) > 0;
  };
  try {
    Value v = eval(*p.expr, [&](const std::string& name) -> Value {
      auto ref = find_qualified(m, name);
      if (!ref) throw EvalError("unresolved-variable", name);
      return env.get(*ref);
    }, &in);
    return v.is_bool() && v.as_bool();
  } catch (const EvalError&) {
    // A variable outside its lifetime makes the predicate false.
    return false;
  }
}

std::string join(const std::vector<std::string>& xs, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

std::string finding_id(const Finding& f) { return to_string(f.kind) + "|" + f.key; }

}  // namespace

std::string Goal::describe() const {
  switch (kind) {
    case Kind::state: return "state " + names.front();
    case Kind::transition: return "transition " + names.front();
    case Kind::configuration: return "configuration {" + join(names, ", ") + "}";
  }
  return "?";
}

FuzzConfig parse_fuzz_config(const std::string& json_text, const Model& model) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FuzzConfigError(std::string("malformed fuzz config: ") + e.what());
  }
  if (!j.is_object()) throw FuzzConfigError("fuzz config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kConfigKeys.count(it.key())) throw FuzzConfigError("unknown fuzz config key '" + it.key() + "'");
  }
  FuzzConfig c;
  try {
    c.max_events = j.value("max_events", c.max_events);
    c.runs = j.value("runs", c.runs);
    if (j.contains("event_budget")) c.event_budget = j["event_budget"].get<std::uint64_t>();
    if (j.contains("time_budget_ms")) c.time_budget_ms = j["time_budget_ms"].get<std::uint64_t>();
    c.seed = j.value("seed", c.seed);
    c.minimize = j.value("minimize", c.minimize);
    c.engine.step_budget = j.value("step_budget", c.engine.step_budget);
    if (j.contains("oracles")) {
      const json& o = j["oracles"];
      for (auto it = o.begin(); it != o.end(); ++it) {
        if (!kOracleKeys.count(it.key())) throw FuzzConfigError("unknown oracle '" + it.key() + "'");
      }
      c.oracles.non_determinism = o.value("non_determinism", c.oracles.non_determinism);
      c.oracles.concurrency_conflict = o.value("concurrency_conflict", c.oracles.concurrency_conflict);
      c.oracles.write_conflict = o.value("write_conflict", c.oracles.write_conflict);
      c.oracles.read_write = o.value("read_write", c.oracles.read_write);
      c.oracles.undesired = o.value("undesired", c.oracles.undesired);
      c.oracles.runtime_error = o.value("runtime_error", c.oracles.runtime_error);
      c.oracles.reachability = o.value("reachability", c.oracles.reachability);
    }
    if (j.contains("undesired")) {
      std::size_t idx = 0;
      for (const json& u : j["undesired"]) {
        UndesiredPredicate p;
        p.name = u.value("name", "undesired-" + std::to_string(idx++));
        if (u.contains("states")) {
          p.states = u["states"].get<std::vector<std::string>>();
          for (const auto& s : p.states) require_state(model, s, p.name);
        }
        if (u.contains("expr")) {
          p.expr_text = u["expr"].get<std::string>();
          Diagnostics d;
          p.expr = parse_expression(p.expr_text, d, true);
          if (!p.expr || has_errors(d)) {
            std::string msg = d.empty() ? "syntax error" : d.front().message;
            throw FuzzConfigError(p.name + ": bad predicate '" + p.expr_text + "': " + msg);
          }
          check_predicate_names(model, *p.expr, p.name);
        }
        if (p.states.empty() && !p.expr) throw FuzzConfigError(p.name + ": needs 'states' or 'expr'");
        c.undesired.push_back(std::move(p));
      }
    }
    if (j.contains("goals")) {
      for (const json& g : j["goals"]) {
        Goal goal;
        if (g.contains("state")) {
          goal.kind = Goal::Kind::state;
          goal.names = {g["state"].get<std::string>()};
          require_state(model, goal.names[0], "goal");
        } else if (g.contains("transition")) {
          goal.kind = Goal::Kind::transition;
          goal.names = {g["transition"].get<std::string>()};
          if (!model.find_transition(goal.names[0])) {
            throw FuzzConfigError("goal: unknown transition '" + goal.names[0] + "'");
          }
        } else if (g.contains("configuration")) {
          goal.kind = Goal::Kind::configuration;
          goal.names = g["configuration"].get<std::vector<std::string>>();
          for (const auto& s : goal.names) {
            require_state(model, s, "goal");
            if (model.state(model.state_id(s)).type != StateType::atomic) {
              throw FuzzConfigError("goal: configuration member '" + s + "' is not atomic");
            }
          }
        } else {
          throw FuzzConfigError("goal needs 'state', 'transition' or 'configuration'");
        }
        c.goals.push_back(std::move(goal));
      }
    }
  } catch (const json::exception& e) {
    throw FuzzConfigError(std::string("fuzz config: ") + e.what());
  }
  if (c.max_events == 0) throw FuzzConfigError("max_events must be positive");
  return c;
}

std::string to_string(FindingKind k) {
  switch (k) {
    case FindingKind::non_determinism: return "non-determinism";
    case FindingKind::concurrency_conflict: return "concurrency-conflict";
    case FindingKind::undesired_configuration: return "undesired-configuration";
    case FindingKind::runtime_error: return "runtime-error";
    case FindingKind::nontermination: return "nontermination";
    case FindingKind::reachability_report: return "reachability-report";
  }
  return "?";
}

std::string describe(const Finding& f) {
  std::ostringstream os;
  os << to_string(f.kind) << " [" << f.key << "]";
  if (f.kind == FindingKind::reachability_report) {
    os << (f.reached ? " reached" : " not reached");
    if (!f.reached) return os.str();
  }
  os << " at step " << f.step;
  if (!f.detail.empty()) os << ": " << f.detail;
  os << "; witness events=[" << join(f.witness.events, ",") << "]";
  if (f.witness.script) {
    os << " script=[" << join(*f.witness.script, ",") << "]";
  } else {
    os << " seed=" << f.witness.seed;
  }
  return os.str();
}

std::string to_json_line(const Finding& f) {
  nlohmann::ordered_json j;
  j["kind"] = "finding";
  j["finding"] = to_string(f.kind);
  j["key"] = f.key;
  if (f.kind == FindingKind::reachability_report) j["reached"] = f.reached;
  j["step"] = f.step;
  j["events"] = f.witness.events;
  if (f.witness.script) {
    j["script"] = *f.witness.script;
  } else {
    j["seed"] = f.witness.seed;
  }
  if (!f.transitions.empty()) j["transitions"] = f.transitions;
  if (!f.var.empty()) j["var"] = f.var;
  if (!f.blocks.empty()) j["blocks"] = f.blocks;
  if (!f.detail.empty()) j["detail"] = f.detail;
  return j.dump();
}

std::vector<std::string> events_from_bytes(const Model& model, const std::vector<std::uint8_t>& bytes) {
  std::vector<std::string> out;
  const auto& es = model.events();
  if (es.empty()) return out;
  out.reserve(bytes.size());
  for (std::uint8_t b : bytes) out.push_back(es[b % es.size()]);
  return out;
}

std::optional<Finding> check_write_conflict(const Program& program, const Trace& step_trace, bool read_write) {
  (void)program;
  std::map<std::string, std::set<std::uint32_t>> writers, readers;
  for (const auto& r : step_trace) {
    if (!r.branch) continue;
    if (r.kind == "instr" && !r.var.empty()) writers[r.var].insert(*r.branch);
    if (read_write) {
      for (const auto& v : r.reads) readers[v].insert(*r.branch);
    }
  }
  for (const auto& [var, ws] : writers) {
    std::set<std::uint32_t> touching = ws;
    if (read_write && readers.count(var)) touching.insert(readers[var].begin(), readers[var].end());
    if (ws.size() >= 2 || (ws.size() == 1 && touching.size() >= 2)) {
      Finding f;
      f.kind = FindingKind::concurrency_conflict;
      f.var = var;
      f.key = (ws.size() >= 2 ? "write:" : "read-write:") + var;
      f.detail = ws.size() >= 2 ? "variable " + var + " is written by " + std::to_string(ws.size()) +
                                      " concurrent branches"
                                : "variable " + var + " is written in one branch and read in another";
      std::set<std::string> ts;
      for (const auto& r : step_trace) {
        if (r.kind == "transitions") ts.insert(r.transitions.begin(), r.transitions.end());
      }
      f.transitions.assign(ts.begin(), ts.end());
      std::set<std::string> bs;
      for (const auto& r : step_trace) {
        if (!r.branch || !touching.count(*r.branch)) continue;
        bool writes = r.kind == "instr" && r.var == var;
        bool reads = read_write && std::find(r.reads.begin(), r.reads.end(), var) != r.reads.end();
        if (writes || reads) bs.insert(r.block);
      }
      f.blocks.assign(bs.begin(), bs.end());
      return f;
    }
  }
  return std::nullopt;
}

std::string Coverage::report() const {
  std::ostringstream os;
  os << "coverage after " << runs << " runs, " << events << " events\n";
  os << "states entered:\n";
  for (const auto& [name, n] : states) os << "  " << name << " " << n << "\n";
  os << "transitions fired:\n";
  for (const auto& [name, n] : transitions) os << "  " << name << " " << n << "\n";
  return os.str();
}

RunReport run_witness(std::shared_ptr<const Program> program, const Witness& w, const FuzzConfig& config) {
  const Model& m = program->model();
  std::vector<EventId> ids;
  for (const auto& e : w.events) {
    auto id = m.find_event(e);
    if (!id) throw std::invalid_argument("unknown event '" + e + "'");
    ids.push_back(*id);
  }

  EngineOptions opts = config.engine;
  opts.record_reads = opts.record_reads || config.oracles.read_write;
  Simulator sim(program, opts);
  std::unique_ptr<Scheduler> sched;
  if (w.script) {
    sched = std::make_unique<ScriptedScheduler>(*w.script);
  } else {
    sched = std::make_unique<RandomScheduler>(w.seed);
  }

  RunReport rep;
  std::set<std::string> seen;
  std::vector<Configuration> goal_configs(config.goals.size());
  for (std::size_t g = 0; g < config.goals.size(); ++g) {
    if (config.goals[g].kind == Goal::Kind::configuration) goal_configs[g] = make_configuration(m, config.goals[g].names);
  }

  auto add = [&](Finding f, std::uint32_t step) {
    f.step = step;
    f.witness.events.assign(w.events.begin(), w.events.begin() + std::min<std::size_t>(step, w.events.size()));
    f.witness.seed = w.seed;
    f.witness.script = w.script;
    if (seen.insert(finding_id(f)).second) rep.findings.push_back(std::move(f));
  };

  auto process = [&](const StepResult& r, std::size_t mark) {
    Trace slice(sim.trace().begin() + static_cast<std::ptrdiff_t>(mark), sim.trace().end());
    switch (r.status) {
      case StepStatus::conflict: {
        auto [t1, t2] = *r.conflict_pair;
        const Transition& a = m.transition(t1);
        const Transition& b = m.transition(t2);
        bool hierarchical = a.source == b.source || is_ancestor(m, a.source, b.source) || is_ancestor(m, b.source, a.source);
        Finding f;
        f.kind = hierarchical ? FindingKind::non_determinism : FindingKind::concurrency_conflict;
        if (hierarchical ? !config.oracles.non_determinism : !config.oracles.concurrency_conflict) break;
        std::vector<std::string> names{a.name, b.name};
        std::sort(names.begin(), names.end());
        f.transitions = names;
        f.key = join(names, ",");
        for (const auto& blk : r.shared) f.blocks.push_back(program->label(blk));
        f.detail = r.detail;
        add(std::move(f), r.step);
        break;
      }
      case StepStatus::runtime_error:
      case StepStatus::invalid_configuration:
        if (config.oracles.runtime_error) {
          Finding f;
          f.kind = FindingKind::runtime_error;
          f.key = r.error_kind + (r.block.empty() ? "" : "@" + r.block);
          f.detail = r.detail;
          if (!r.block.empty()) f.blocks = {r.block};
          add(std::move(f), r.step);
        }
        break;
      case StepStatus::nontermination:
        if (config.oracles.runtime_error) {
          Finding f;
          f.kind = FindingKind::nontermination;
          f.key = r.block;
          f.detail = r.detail;
          if (!r.block.empty()) f.blocks = {r.block};
          add(std::move(f), r.step);
        }
        break;
      default: break;
    }
    if (config.oracles.write_conflict || config.oracles.read_write) {
      if (auto f = check_write_conflict(*program, slice, config.oracles.read_write)) add(std::move(*f), r.step);
    }
    if (r.status != StepStatus::fired) return;

    std::set<StateId> active = cst_states(m, r.after);
    if (r.step == 0) {
      for (StateId s : active) ++rep.coverage.states[m.state(s).name];
    } else {
      for (TransitionId t : r.fired) {
        ++rep.coverage.transitions[m.transition(t).name];
        for (StateId s : preorder(dest_state_tree(m, t))) ++rep.coverage.states[m.state(s).name];
      }
    }
    if (config.oracles.undesired) {
      for (const auto& p : config.undesired) {
        if (!predicate_holds(m, p, active, sim.environment())) continue;
        Finding f;
        f.kind = FindingKind::undesired_configuration;
        f.key = p.name;
        f.detail = "configuration " + to_string(m, r.after) + " satisfies " +
                   (p.expr ? "'" + p.expr_text + "'" : "{" + join(p.states, ", ") + "}");
        add(std::move(f), r.step);
      }
    }
    for (std::size_t g = 0; g < config.goals.size(); ++g) {
      if (rep.goal_steps.count(g)) continue;
      const Goal& goal = config.goals[g];
      bool hit = false;
      switch (goal.kind) {
        case Goal::Kind::state: hit = active.count(m.state_id(goal.names[0])) > 0; break;
        case Goal::Kind::transition: {
          TransitionId t = m.transition_id(goal.names[0]);
          hit = std::find(r.fired.begin(), r.fired.end(), t) != r.fired.end();
          break;
        }
        case Goal::Kind::configuration: hit = r.after == goal_configs[g]; break;
      }
      if (hit) rep.goal_steps[g] = r.step;
    }
  };

  std::size_t mark = sim.trace().size();
  StepResult r = sim.init(*sched, w.script ? std::nullopt : std::optional<std::uint64_t>(w.seed));
  process(r, mark);
  if (sim.initialized()) {
    for (EventId e : ids) {
      mark = sim.trace().size();
      r = sim.step(e, *sched);
      process(r, mark);
      ++rep.coverage.events;
    }
  }
  rep.coverage.runs = 1;
  rep.trace = sim.trace();
  return rep;
}

bool reproduces(std::shared_ptr<const Program> program, const Finding& f, const FuzzConfig& config,
                std::uint32_t* step) {
  RunReport rep = run_witness(std::move(program), f.witness, config);
  for (const auto& g : rep.findings) {
    if (g.kind == f.kind && g.key == f.key) {
      if (step) *step = g.step;
      return true;
    }
  }
  return false;
}

Finding minimize(std::shared_ptr<const Program> program, const Finding& f, const FuzzConfig& config) {
  std::uint32_t step = 0;
  if (!reproduces(program, f, config, &step)) {
    throw NonReproducibleError("finding " + to_string(f.kind) + " [" + f.key + "] does not reproduce");
  }
  Finding best = f;
  best.step = step;
  if (best.witness.events.size() > step) best.witness.events.resize(step);

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < best.witness.events.size();) {
      Finding cand = best;
      cand.witness.events.erase(cand.witness.events.begin() + static_cast<std::ptrdiff_t>(i));
      std::uint32_t s = 0;
      if (reproduces(program, cand, config, &s)) {
        cand.step = s;
        if (cand.witness.events.size() > s) cand.witness.events.resize(s);
        best = std::move(cand);
        changed = true;
      } else {
        ++i;
      }
    }
  }
  if (best.witness.script) {
    // Drop script entries that are not needed for the finding.
    auto& script = *best.witness.script;
    while (!script.empty()) {
      Finding cand = best;
      cand.witness.script->pop_back();
      std::uint32_t s = 0;
      if (!reproduces(program, cand, config, &s)) break;
      cand.step = s;
      best = std::move(cand);
    }
  }
  // Refresh descriptive fields from the final replay.
  RunReport rep = run_witness(program, best.witness, config);
  for (const auto& g : rep.findings) {
    if (g.kind == best.kind && g.key == best.key) {
      Witness w = best.witness;
      best = g;
      best.witness = w;
      break;
    }
  }
  return best;
}

std::size_t FuzzResult::defect_count() const {
  return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(), [](const Finding& f) { return f.is_defect(); }));
}

FuzzResult fuzz_run(std::shared_ptr<const Program> program, const FuzzConfig& config, const CoverageObserver& observer) {
  const Model& m = program->model();
  auto start = std::chrono::steady_clock::now();
  FuzzResult out;
  std::mt19937_64 rng(config.seed);
  std::set<std::string> seen;
  std::map<std::size_t, Finding> goal_hits;

  auto out_of_time = [&] {
    if (!config.time_budget_ms) return false;
    auto el = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    return static_cast<std::uint64_t>(el.count()) >= *config.time_budget_ms;
  };

  while (out.runs < config.runs && !m.events().empty()) {
    if (config.event_budget && out.events >= *config.event_budget) break;
    if (out_of_time()) break;
    Witness w;
    w.seed = rng();
    std::uint64_t n = 1 + rng() % config.max_events;
    if (config.event_budget) n = std::min<std::uint64_t>(n, *config.event_budget - out.events);
    for (std::uint64_t k = 0; k < n; ++k) w.events.push_back(m.events()[rng() % m.events().size()]);

    RunReport rep = run_witness(program, w, config);
    ++out.runs;
    out.events += n;
    for (const auto& [name, c] : rep.coverage.states) out.coverage.states[name] += c;
    for (const auto& [name, c] : rep.coverage.transitions) out.coverage.transitions[name] += c;
    out.coverage.runs = out.runs;
    out.coverage.events = out.events;
    for (auto& f : rep.findings) {
      if (seen.insert(finding_id(f)).second) out.findings.push_back(std::move(f));
    }
    for (const auto& [g, step] : rep.goal_steps) {
      if (goal_hits.count(g)) continue;
      Finding f;
      f.kind = FindingKind::reachability_report;
      f.key = config.goals[g].describe();
      f.step = step;
      f.witness = w;
      f.witness.events.resize(std::min<std::size_t>(step, w.events.size()));
      goal_hits.emplace(g, std::move(f));
    }
    if (observer) observer(out.coverage);
  }

  if (config.minimize) {
    for (auto& f : out.findings) {
      try {
        f = minimize(program, f, config);
      } catch (const NonReproducibleError&) {
        // Keep the original witness.
      }
    }
  }
  if (config.oracles.reachability) {
    for (std::size_t g = 0; g < config.goals.size(); ++g) {
      auto it = goal_hits.find(g);
      if (it != goal_hits.end()) {
        out.findings.push_back(it->second);
      } else {
        Finding f;
        f.kind = FindingKind::reachability_report;
        f.key = config.goals[g].describe();
        f.reached = false;
        out.findings.push_back(std::move(f));
      }
    }
  }
  out.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  return out;
}

}  // namespace constabl

#include "constabl/session.hpp"

#include <algorithm>

namespace constabl {

std::string to_string(SessionMode m) { return m == SessionMode::event ? "event" : "instruction"; }

std::optional<SessionMode> parse_session_mode(const std::string& s) {
  if (s == "event") return SessionMode::event;
  if (s == "instruction") return SessionMode::instruction;
  return std::nullopt;
}

Session::Session(std::string id, std::shared_ptr<const Program> program, SessionMode mode, std::uint64_t seed,
                 EngineOptions opts)
    : id_(std::move(id)), program_(std::move(program)), mode_(mode), seed_(seed), sched_(seed), sim_(program_, opts) {
  init_ = sim_.init(sched_, seed);
  if (!init_.ok()) last_error_ = init_.error_kind + ": " + init_.detail;
}

StepOutcome Session::outcome(const StepResult& r, std::size_t mark) {
  StepOutcome o;
  o.result = r;
  const Trace& t = sim_.trace();
  o.delta.assign(t.begin() + static_cast<std::ptrdiff_t>(mark), t.end());
  o.complete = r.status != StepStatus::in_progress;
  if (const CodeSimulation* p = sim_.pending()) {
    const CodeNavigator& nav = p->navigator();
    for (ControlPoint c : p->cp()) o.cp.push_back(nav.label(c));
    for (const auto& [key, pend] : p->jp()) {
      auto& v = o.jp[nav.label(key)];
      for (ControlPoint c : pend) v.push_back(nav.label(c));
    }
  }
  if (!r.ok()) {
    last_error_ = r.error_kind + ": " + r.detail;
  } else if (o.complete) {
    last_error_.reset();
  }
  return o;
}

StepOutcome Session::step_event(const std::string& event) {
  if (!sim_.initialized()) throw SessionError("not-initialized", "session failed to initialize: " + last_error_.value_or(""));
  if (sim_.mid_step()) throw SessionError("mid-step", "a step is in progress; choose a control point first");
  auto e = program_->model().find_event(event);
  if (!e) throw SessionError("unknown-event", "unknown event '" + event + "'");
  log_.push_back({SessionCall::Op::step, event});
  std::size_t mark = sim_.trace().size();
  StepResult r = mode_ == SessionMode::event ? sim_.step(*e, sched_) : sim_.begin_step(*e);
  return outcome(r, mark);
}

StepOutcome Session::choose(const std::string& cp_label) {
  const CodeSimulation* p = sim_.pending();
  if (!p) throw SessionError("not-mid-step", "no step is in progress");
  auto cp = p->navigator().parse(cp_label);
  auto live = p->cp();
  if (!cp || !std::binary_search(live.begin(), live.end(), *cp)) {
    throw SessionError("not-in-cp", "control point '" + cp_label + "' is not in CP");
  }
  log_.push_back({SessionCall::Op::choose, cp_label});
  std::size_t mark = sim_.trace().size();
  StepResult r = sim_.choose(*cp);
  return outcome(r, mark);
}

Snapshot Session::state() const {
  const Model& m = program_->model();
  Snapshot s;
  s.step = sim_.steps();
  s.mode = mode_;
  s.config = sim_.configuration();
  if (!s.config.empty()) s.cst = to_string(m, cst(m, s.config));
  const CodeSimulation* p = sim_.pending();
  const Environment& env = p ? p->env() : sim_.environment();
  for (std::uint32_t i = 0; i < m.state_count(); ++i) {
    StateId sid{i};
    const State& st = m.state(sid);
    if (st.vars.empty()) continue;
    FrameView f;
    f.state = st.name;
    f.live = env.live(sid);
    for (std::size_t v = 0; v < st.vars.size(); ++v) {
      if (!f.live && st.vars[v].storage != StorageClass::static_) continue;
      f.vars.emplace_back(st.vars[v].name, env.frame(sid)[v]);
    }
    if (!f.vars.empty()) s.frames.push_back(std::move(f));
  }
  s.mid_step = p != nullptr;
  if (p) {
    const CodeNavigator& nav = p->navigator();
    for (ControlPoint c : p->cp()) s.cp.push_back(nav.label(c));
    for (const auto& [key, pend] : p->jp()) {
      auto& v = s.jp[nav.label(key)];
      for (ControlPoint c : pend) v.push_back(nav.label(c));
    }
  }
  if (sim_.initialized()) {
    for (std::uint32_t i = 0; i < m.events().size(); ++i) {
      const std::string& name = m.events()[i];
      try {
        auto ts = enabled_transitions(*program_, sim_.configuration(), sim_.environment(), EventId{i});
        auto& v = s.enabled[name];
        for (TransitionId t : ts) v.push_back(m.transition(t).name);
      } catch (const GuardError& e) {
        s.enabled_errors[name] = e.what();
      }
    }
  }
  s.last_error = last_error_;
  return s;
}

std::unique_ptr<Session> replay_session(std::shared_ptr<const Program> program, SessionMode mode,
                                        std::uint64_t seed, const std::vector<SessionCall>& calls) {
  auto s = std::make_unique<Session>("replay", std::move(program), mode, seed);
  for (const auto& c : calls) {
    if (c.op == SessionCall::Op::step) {
      s->step_event(c.arg);
    } else {
      s->choose(c.arg);
    }
  }
  return s;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson value_json(const Value& v) { return v.is_bool() ? ojson(v.as_bool()) : ojson(v.as_int()); }

ojson trace_json(const Trace& t) {
  ojson arr = ojson::array();
  for (const auto& r : t) arr.push_back(ojson::parse(to_json_line(r)));
  return arr;
}

}  // namespace

nlohmann::ordered_json to_json(const Program& program, const StepOutcome& o) {
  const Model& m = program.model();
  ojson j;
  j["step"] = o.result.step;
  j["status"] = to_string(o.result.status);
  j["complete"] = o.complete;
  ojson fired = ojson::array();
  for (TransitionId t : o.result.fired) fired.push_back(m.transition(t).name);
  j["fired"] = fired;
  j["configuration"] = state_names(m, o.complete ? o.result.after : o.result.before);
  if (!o.complete) j["target"] = state_names(m, o.result.after);
  if (o.result.conflict_pair) {
    j["conflict"] = {m.transition(o.result.conflict_pair->first).name, m.transition(o.result.conflict_pair->second).name};
  }
  if (!o.result.error_kind.empty()) {
    j["error"] = o.result.error_kind;
    j["detail"] = o.result.detail;
  }
  j["cp"] = o.cp;
  ojson jp = ojson::object();
  for (const auto& [k, v] : o.jp) jp[k] = v;
  j["jp"] = jp;
  j["trace"] = trace_json(o.delta);
  return j;
}

nlohmann::ordered_json to_json(const Program& program, const Snapshot& s) {
  const Model& m = program.model();
  ojson j;
  j["step"] = s.step;
  j["mode"] = to_string(s.mode);
  j["configuration"] = state_names(m, s.config);
  j["cst"] = s.cst;
  ojson frames = ojson::array();
  for (const auto& f : s.frames) {
    ojson fj;
    fj["state"] = f.state;
    fj["live"] = f.live;
    ojson vars = ojson::object();
    for (const auto& [name, v] : f.vars) vars[name] = value_json(v);
    fj["vars"] = vars;
    frames.push_back(fj);
  }
  j["frames"] = frames;
  j["mid_step"] = s.mid_step;
  j["cp"] = s.cp;
  ojson jp = ojson::object();
  for (const auto& [k, v] : s.jp) jp[k] = v;
  j["jp"] = jp;
  ojson en = ojson::object();
  for (const auto& [k, v] : s.enabled) en[k] = v;
  j["enabled"] = en;
  if (!s.enabled_errors.empty()) {
    ojson ee = ojson::object();
    for (const auto& [k, v] : s.enabled_errors) ee[k] = v;
    j["enabled_errors"] = ee;
  }
  j["last_error"] = s.last_error ? ojson(*s.last_error) : ojson(nullptr);
  return j;
}

}  // namespace constabl

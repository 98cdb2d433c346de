#pragma once

// The simulator. A step fires the enabled transitions by interleaving their
// code over a control front, then records everything in the trace.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "constabl/eval.hpp"
#include "constabl/program.hpp"
#include "constabl/transcode.hpp"

namespace constabl {

/// ℂ: active atomic states, kept sorted by id.
using Configuration = std::vector<StateId>;

Configuration make_configuration(const Model& model, const std::vector<std::string>& names);
std::vector<std::string> state_names(const Model& model, const Configuration& c);
/// "{A, C}"
std::string to_string(const Model& model, const Configuration& c);

bool is_valid_configuration(const Model& model, const Configuration& c);

class GuardError : public EvalError {
 public:
  GuardError(const EvalError& cause, TransitionId t, const std::string& what)
      : EvalError(cause.kind, what), transition(t) {}
  TransitionId transition;
};

/// Transitions whose source is active, whose event matches and whose guard
/// holds; sorted by id. Guard failures raise GuardError.
std::vector<TransitionId> enabled_transitions(const Program& program, const Configuration& c, const Environment& env,
                                              EventId e);

// ---------------------------------------------------------------------------
// Trace

struct TraceRecord {
  std::string kind;  // init, step-begin, transitions, instr, decision, config, event-lost, error, step-end
  std::uint32_t step = 0;
  std::optional<std::uint64_t> seed;
  std::string event;
  std::vector<std::string> transitions;
  std::string block;
  std::optional<NodeId> node;
  std::optional<std::uint32_t> branch;
  std::string var;
  std::optional<Value> old_value;
  std::optional<Value> new_value;
  std::optional<bool> outcome;
  std::vector<std::string> reads;
  std::vector<std::string> config_old;
  std::vector<std::string> config_new;
  std::string status;
  std::string error;
  std::string detail;
  std::vector<std::string> blocks;

  bool operator==(const TraceRecord&) const = default;
};

using Trace = std::vector<TraceRecord>;

/// One JSON object per line, fields in a fixed order.
std::string to_json_line(const TraceRecord& r);
void write_ndjson(std::ostream& os, const Trace& trace);
std::string to_ndjson(const Trace& trace);
/// Throws std::runtime_error on malformed input.
Trace read_ndjson(std::istream& is);

/// "block#node" labels of every executed control point, in order. Feeding
/// them to a ScriptedScheduler reproduces the interleaving.
std::vector<std::string> schedule_of(const Trace& trace);
std::vector<std::string> events_of(const Trace& trace);

// ---------------------------------------------------------------------------
// Scheduling

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  /// Picks one member of cp (sorted, non-empty).
  virtual ControlPoint choose(const std::vector<ControlPoint>& cp, const CodeNavigator& nav) = 0;
};

class RandomScheduler : public Scheduler {
 public:
  explicit RandomScheduler(std::uint64_t seed) : rng_(seed) {}
  ControlPoint choose(const std::vector<ControlPoint>& cp, const CodeNavigator& nav) override;

 private:
  std::mt19937_64 rng_;
};

class SchedulerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Follows a list of control-point labels; once exhausted it takes the
/// smallest control point. A label not currently in CP is an error.
class ScriptedScheduler : public Scheduler {
 public:
  explicit ScriptedScheduler(std::vector<std::string> script) : script_(std::move(script)) {}
  ControlPoint choose(const std::vector<ControlPoint>& cp, const CodeNavigator& nav) override;
  std::size_t consumed() const { return pos_; }

 private:
  std::vector<std::string> script_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Code simulation

struct EngineOptions {
  std::uint64_t step_budget = 1'000'000;
  bool record_reads = false;
};

class NonterminationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The control front (CP, JP) of one step. JP maps the entry control point
/// of a join leaf to the exit control points it still waits for.
using JoinPoints = std::map<ControlPoint, std::set<ControlPoint>>;

/// Interleaved execution of one step code. Each execute() call runs exactly
/// one control point (instruction or decision).
class CodeSimulation {
 public:
  CodeSimulation(const Program& program, Code code, Environment env, std::uint32_t step, EngineOptions opts,
                 Trace* trace);

  const CodeNavigator& navigator() const { return nav_; }
  std::vector<ControlPoint> cp() const { return {cp_.begin(), cp_.end()}; }
  const JoinPoints& jp() const { return jp_; }
  bool done() const { return cp_.empty() && jp_.empty(); }
  const Environment& env() const { return env_; }
  Environment take_env() { return std::move(env_); }
  std::uint64_t executed() const { return executed_; }
  /// The control point whose execution threw, if any.
  std::optional<ControlPoint> failed_at() const { return attempted_; }

  /// Throws std::invalid_argument if cp is not in CP, EvalError from the
  /// node's expression and NonterminationError past the step budget.
  void execute(ControlPoint cp);
  /// Runs to completion.
  void run(Scheduler& sched);

 private:
  void activate(std::uint32_t leaf);
  std::vector<std::string> reads_of(const CfgNode& n) const;

  const Program& program_;
  CodeNavigator nav_;
  Environment env_;
  std::uint32_t step_;
  EngineOptions opts_;
  Trace* trace_;
  std::set<ControlPoint> cp_;
  JoinPoints jp_;
  std::uint64_t executed_ = 0;
  std::optional<ControlPoint> attempted_;
};

// ---------------------------------------------------------------------------
// Simulation steps

enum class StepStatus { fired, in_progress, event_lost, conflict, runtime_error, nontermination, invalid_configuration };

std::string to_string(StepStatus s);

struct StepResult {
  StepStatus status = StepStatus::fired;
  std::uint32_t step = 0;
  std::vector<TransitionId> fired;
  Configuration before;
  Configuration after;
  // conflict
  std::optional<std::pair<TransitionId, TransitionId>> conflict_pair;
  std::vector<CodeBlockId> shared;
  // runtime errors
  std::string error_kind;
  std::string detail;
  std::string block;
  std::optional<NodeId> node;

  bool ok() const { return status == StepStatus::fired || status == StepStatus::event_lost || status == StepStatus::in_progress; }
};

/// A running statechart instance. Between steps it holds (ℂ, σ); during an
/// instruction-granular step it also holds the pending CodeSimulation. A
/// failed step leaves (ℂ, σ) as they were before the step.
class Simulator {
 public:
  Simulator(std::shared_ptr<const Program> program, EngineOptions opts = {});

  const Program& program() const { return *program_; }
  std::shared_ptr<const Program> shared_program() const { return program_; }

  /// Initializes statics, enters the initial state tree (step 0).
  StepResult init(Scheduler& sched, std::optional<std::uint64_t> seed = std::nullopt);
  /// A full simulation step for event e.
  StepResult step(EventId e, Scheduler& sched);

  /// Starts a step without executing code. Returns in_progress when code
  /// must be stepped through choose(); any other status ends the step.
  StepResult begin_step(EventId e);
  /// Executes one control point of the pending step.
  StepResult choose(ControlPoint cp);
  bool mid_step() const { return pending_ != nullptr; }
  const CodeSimulation* pending() const { return pending_.get(); }

  bool initialized() const { return initialized_; }
  const Configuration& configuration() const { return config_; }
  const Environment& environment() const { return env_; }
  const Trace& trace() const { return trace_; }
  std::uint32_t steps() const { return step_; }

 private:
  StepResult finish(StepResult r);
  StepResult fail(StepResult r, StepStatus status, const std::string& kind, const std::string& detail);

  std::shared_ptr<const Program> program_;
  EngineOptions opts_;
  Configuration config_;
  Environment env_;
  Trace trace_;
  std::uint32_t step_ = 0;
  bool initialized_ = false;
  // pending step
  std::unique_ptr<CodeSimulation> pending_;
  StepResult pending_result_;
  std::vector<TransitionId> pending_fired_;
};

struct SimulationResult {
  Trace trace;
  Configuration final_config;
  Environment final_env;
  std::vector<StepResult> steps;  // steps[0] is initialization
  bool ok = true;
};

/// init_model followed by one step per event; stops at the first failing step
/// unless halt_on_error is false. Unknown event names raise std::invalid_argument.
SimulationResult simulate(std::shared_ptr<const Program> program, const std::vector<std::string>& events,
                          Scheduler& sched, EngineOptions opts = {}, std::optional<std::uint64_t> seed = std::nullopt,
                          bool halt_on_error = true);

}  // namespace constabl

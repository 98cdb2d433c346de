#pragma once

// Black-box fuzzing of statechart models: random event sequences, random
// interleavings and per-step defect oracles.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "constabl/engine.hpp"

namespace constabl {

struct OracleSet {
  bool non_determinism = true;
  bool concurrency_conflict = true;
  bool write_conflict = true;
  bool read_write = false;
  bool undesired = true;
  bool runtime_error = true;
  bool reachability = true;
};

/// A configuration that must never occur: either a set of states that must
/// not be active together, or a boolean predicate over σ and ℂ. Predicates
/// name variables as `State.var` and test activity with `in(State)`.
struct UndesiredPredicate {
  std::string name;
  std::vector<std::string> states;
  std::optional<Expr> expr;
  std::string expr_text;
};

struct Goal {
  enum class Kind { state, transition, configuration };
  Kind kind = Kind::state;
  std::vector<std::string> names;

  std::string describe() const;
};

struct FuzzConfig {
  std::uint32_t max_events = 20;
  std::uint64_t runs = 1000;
  std::optional<std::uint64_t> event_budget;
  std::optional<std::uint64_t> time_budget_ms;
  std::uint64_t seed = 0;
  OracleSet oracles;
  std::vector<UndesiredPredicate> undesired;
  std::vector<Goal> goals;
  bool minimize = true;
  EngineOptions engine;
};

class FuzzConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the JSON config and checks every referenced name against the model.
FuzzConfig parse_fuzz_config(const std::string& json_text, const Model& model);

enum class FindingKind {
  non_determinism,
  concurrency_conflict,
  undesired_configuration,
  runtime_error,
  nontermination,
  reachability_report,
};

std::string to_string(FindingKind k);

/// Everything needed to replay a run: the events and the scheduler, either a
/// random seed or an explicit control-point script.
struct Witness {
  std::vector<std::string> events;
  std::uint64_t seed = 0;
  std::optional<std::vector<std::string>> script;
};

struct Finding {
  FindingKind kind = FindingKind::runtime_error;
  std::string key;  // identifies the defect for deduplication and replay
  std::uint32_t step = 0;
  Witness witness;
  std::string detail;
  std::vector<std::string> transitions;
  std::vector<std::string> blocks;
  std::string var;
  bool reached = true;  // reachability reports only

  bool is_defect() const { return kind != FindingKind::reachability_report; }
};

/// Human-readable single-line summary.
std::string describe(const Finding& f);
/// Trace-format record for a finding (kind "finding").
std::string to_json_line(const Finding& f);

/// Maps each byte b to events[b mod |E|].
std::vector<std::string> events_from_bytes(const Model& model, const std::vector<std::uint8_t>& bytes);

/// Write-set intersection between top-level branches of one step. With
/// read_write, a read in one branch of a variable written by another also counts.
std::optional<Finding> check_write_conflict(const Program& program, const Trace& step_trace, bool read_write = false);

struct Coverage {
  std::map<std::string, std::uint64_t> states;       // times entered
  std::map<std::string, std::uint64_t> transitions;  // times fired
  std::uint64_t runs = 0;
  std::uint64_t events = 0;

  std::string report() const;
};

/// Result of running one witness with every enabled oracle.
struct RunReport {
  std::vector<Finding> findings;  // defects only, in step order
  Coverage coverage;
  Trace trace;
  std::map<std::size_t, std::uint32_t> goal_steps;  // goal index -> first step it was reached
};

RunReport run_witness(std::shared_ptr<const Program> program, const Witness& w, const FuzzConfig& config);

class NonReproducibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// True iff replaying the witness yields a finding of the same kind and key;
/// the step of the first such finding is stored in *step.
bool reproduces(std::shared_ptr<const Program> program, const Finding& f, const FuzzConfig& config,
                std::uint32_t* step = nullptr);

/// Truncates after the finding's step, then greedily deletes single events
/// (and shortens scripts) while the finding still reproduces.
Finding minimize(std::shared_ptr<const Program> program, const Finding& f, const FuzzConfig& config);

struct FuzzResult {
  std::vector<Finding> findings;  // defects, deduplicated, then reachability reports
  Coverage coverage;
  std::uint64_t runs = 0;
  std::uint64_t events = 0;
  std::chrono::milliseconds elapsed{0};

  std::size_t defect_count() const;
};

/// Called after each run with the cumulative coverage.
using CoverageObserver = std::function<void(const Coverage&)>;

FuzzResult fuzz_run(std::shared_ptr<const Program> program, const FuzzConfig& config,
                    const CoverageObserver& observer = {});

}  // namespace constabl

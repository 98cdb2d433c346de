#pragma once

// Interactive simulation sessions: event-granular stepping, instruction-
// granular steering through explicit control-point choices, and read-only
// snapshots. The HTTP server in server.hpp is a thin transport over these.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "constabl/engine.hpp"

namespace constabl {

enum class SessionMode { event, instruction };

std::string to_string(SessionMode m);
std::optional<SessionMode> parse_session_mode(const std::string& s);

class SessionError : public std::runtime_error {
 public:
  // code: unknown-event, mid-step, not-mid-step, not-in-cp
  SessionError(std::string code, const std::string& what) : std::runtime_error(what), code(std::move(code)) {}
  std::string code;
};

/// One protocol call, as recorded for replay.
struct SessionCall {
  enum class Op { step, choose };
  Op op = Op::step;
  std::string arg;  // event name or control-point label
};

struct StepOutcome {
  StepResult result;
  Trace delta;           // trace records produced by the call
  bool complete = true;  // false while an instruction-granular step is pending
  std::vector<std::string> cp;
  std::map<std::string, std::vector<std::string>> jp;
};

struct FrameView {
  std::string state;
  bool live = false;
  std::vector<std::pair<std::string, Value>> vars;
};

struct Snapshot {
  std::uint32_t step = 0;
  SessionMode mode = SessionMode::event;
  Configuration config;
  std::string cst;  // "𝓜(G(E(A),F(C)))"
  std::vector<FrameView> frames;
  bool mid_step = false;
  std::vector<std::string> cp;
  std::map<std::string, std::vector<std::string>> jp;
  std::map<std::string, std::vector<std::string>> enabled;  // per event
  std::map<std::string, std::string> enabled_errors;        // guard errors per event
  std::optional<std::string> last_error;
};

class Session {
 public:
  /// Initializes the model immediately, using a random scheduler seeded with `seed`.
  Session(std::string id, std::shared_ptr<const Program> program, SessionMode mode, std::uint64_t seed,
          EngineOptions opts = {});

  const std::string& id() const { return id_; }
  SessionMode mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }
  const Simulator& simulator() const { return sim_; }
  const std::vector<SessionCall>& log() const { return log_; }
  const StepResult& init_result() const { return init_; }

  /// Event mode runs the whole step; instruction mode stops once code is
  /// pending and waits for choose().
  StepOutcome step_event(const std::string& event);
  StepOutcome choose(const std::string& cp_label);
  Snapshot state() const;

 private:
  StepOutcome outcome(const StepResult& r, std::size_t mark);

  std::string id_;
  std::shared_ptr<const Program> program_;
  SessionMode mode_;
  std::uint64_t seed_;
  RandomScheduler sched_;
  Simulator sim_;
  StepResult init_;
  std::vector<SessionCall> log_;
  std::optional<std::string> last_error_;
};

/// Re-issues a recorded call sequence on a fresh session.
std::unique_ptr<Session> replay_session(std::shared_ptr<const Program> program, SessionMode mode,
                                        std::uint64_t seed, const std::vector<SessionCall>& calls);

nlohmann::ordered_json to_json(const Program& program, const StepOutcome& o);
nlohmann::ordered_json to_json(const Program& program, const Snapshot& s);

}  // namespace constabl

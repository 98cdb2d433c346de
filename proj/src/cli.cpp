#include "constabl/cli.hpp"

#include <csignal>
#include <fstream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>

#include "constabl/fuzz.hpp"
#include "constabl/server.hpp"

namespace constabl {

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::shared_ptr<const Program> load(const std::string& path, std::ostream& err) {
  Diagnostics warnings;
  auto p = load_program(path, &warnings);
  print(err, warnings);
  return p;
}

void print_step(std::ostream& out, const Model& m, const StepResult& r, const std::string& event) {
  out << "step " << r.step;
  if (!event.empty()) out << " [" << event << "]";
  out << ": " << to_string(r.status);
  if (!r.fired.empty()) {
    out << " (";
    for (std::size_t i = 0; i < r.fired.size(); ++i) out << (i ? ", " : "") << m.transition(r.fired[i]).name;
    out << ")";
  }
  if (r.ok()) {
    out << " -> " << to_string(m, r.after);
  } else {
    out << ": " << r.detail;
  }
  out << "\n";
}

int run_check(const std::string& file, std::ostream& out, std::ostream& err) {
  auto p = load(file, err);
  const Model& m = p->model();
  out << file << ": ok (" << m.state_count() << " states, " << m.transition_count() << " transitions, "
      << m.events().size() << " events)\n";
  return kOk;
}

int run_simulate(const std::string& file, const std::vector<std::string>& events, std::uint64_t seed,
                 const std::string& trace_out, const std::vector<std::string>& schedule, std::ostream& out,
                 std::ostream& err) {
  auto p = load(file, err);
  const Model& m = p->model();
  for (const auto& e : events) {
    if (!m.find_event(e)) throw UsageError("unknown event '" + e + "'");
  }
  std::unique_ptr<Scheduler> sched;
  if (schedule.empty()) {
    sched = std::make_unique<RandomScheduler>(seed);
  } else {
    sched = std::make_unique<ScriptedScheduler>(schedule);
  }
  SimulationResult res = simulate(p, events, *sched, {}, seed, true);
  for (std::size_t i = 0; i < res.steps.size(); ++i) print_step(out, m, res.steps[i], i == 0 ? "init" : events[i - 1]);
  out << "final configuration: " << to_string(m, res.final_config) << "\n";
  if (!trace_out.empty()) {
    std::ofstream f(trace_out, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + trace_out + "'");
    write_ndjson(f, res.trace);
  }
  return res.ok ? kOk : kFail;
}

int run_replay(const std::string& file, const std::string& trace_in, std::ostream& out, std::ostream& err) {
  auto p = load(file, err);
  std::ifstream f(trace_in, std::ios::binary);
  if (!f) throw UsageError("cannot read '" + trace_in + "'");
  std::string original((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  std::istringstream is(original);
  Trace t;
  try {
    t = read_ndjson(is);
  } catch (const std::runtime_error& e) {
    err << trace_in << ": " << e.what() << "\n";
    return kFail;
  }
  std::optional<std::uint64_t> seed;
  if (!t.empty() && t.front().kind == "init") seed = t.front().seed;
  ScriptedScheduler sched(schedule_of(t));
  SimulationResult res = simulate(p, events_of(t), sched, {}, seed, true);
  std::string again = to_ndjson(res.trace);
  if (again == original) {
    out << "replay: identical (" << res.trace.size() << " records)\n";
    return kOk;
  }
  out << "replay: traces differ\n";
  return kFail;
}

void emit_findings(const std::vector<Finding>& findings, const std::string& findings_out, std::ostream& out) {
  for (const auto& f : findings) out << describe(f) << "\n";
  if (!findings_out.empty()) {
    std::ofstream fo(findings_out, std::ios::binary);
    if (!fo) throw UsageError("cannot write '" + findings_out + "'");
    for (const auto& f : findings) fo << to_json_line(f) << "\n";
  }
}

FuzzConfig load_config(const std::string& path, const Model& m) {
  if (path.empty()) return {};
  try {
    return parse_fuzz_config(read_text(path), m);
  } catch (const FuzzConfigError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

int run_fuzz(const std::string& file, const std::string& config_path, const std::string& findings_out,
             bool coverage, std::ostream& out, std::ostream& err) {
  auto p = load(file, err);
  FuzzConfig cfg = load_config(config_path, p->model());
  FuzzResult res = fuzz_run(p, cfg);
  emit_findings(res.findings, findings_out, out);
  out << res.defect_count() << " finding(s) in " << res.runs << " runs, " << res.events << " events, "
      << res.elapsed.count() << " ms\n";
  if (coverage) out << res.coverage.report();
  return res.defect_count() == 0 ? kOk : kFail;
}

int run_fuzz_bytes(const std::string& file, const std::string& input, std::uint64_t seed,
                   const std::string& config_path, std::ostream& out, std::ostream& err, std::istream& in) {
  auto p = load(file, err);
  FuzzConfig cfg = load_config(config_path, p->model());
  std::string bytes;
  if (input.empty() || input == "-") {
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } else {
    bytes = read_text(input);
  }
  Witness w;
  w.events = events_from_bytes(p->model(), std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
  w.seed = seed;
  RunReport rep = run_witness(p, w, cfg);
  emit_findings(rep.findings, "", out);
  out << rep.findings.size() << " finding(s) over " << w.events.size() << " events\n";
  return rep.findings.empty() ? kOk : kFail;
}

Server* g_server = nullptr;

extern "C" void handle_stop_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(const std::string& file, const std::string& host, int port, std::ostream& out, std::ostream& err) {
  auto p = load(file, err);
  Server server(p);
  g_server = &server;
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  out << "serving " << file << " on http://" << host << ":" << port << "\n" << std::flush;
  bool ok = server.listen(host, port);
  g_server = nullptr;
  if (!ok) {
    err << "cannot listen on " << host << ":" << port << "\n";
    return kFail;
  }
  return kOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in) {
  CLI::App app{"Concurrent statechart simulator and fuzzer", "constabl"};
  app.require_subcommand(1);

  std::string file;
  auto* check = app.add_subcommand("check", "Parse and statically check a model");
  check->add_option("file", file, "Model file")->required();

  std::vector<std::string> events;
  std::uint64_t seed = 0;
  std::string trace_out;
  std::vector<std::string> schedule;
  auto* sim = app.add_subcommand("simulate", "Simulate a sequence of events");
  sim->add_option("file", file, "Model file")->required();
  sim->add_option("--events", events, "Comma-separated events")->delimiter(',');
  sim->add_option("--seed", seed, "Scheduler seed");
  sim->add_option("--trace", trace_out, "Write the NDJSON trace here");
  sim->add_option("--schedule", schedule, "Comma-separated control points to run in order")->delimiter(',');

  std::string trace_in;
  auto* replay = app.add_subcommand("replay", "Re-run a recorded trace and compare");
  replay->add_option("file", file, "Model file")->required();
  replay->add_option("--trace", trace_in, "Recorded NDJSON trace")->required();

  std::string config;
  std::string findings_out;
  bool coverage = false;
  auto* fuzz = app.add_subcommand("fuzz", "Random fuzzing with defect oracles");
  fuzz->add_option("file", file, "Model file")->required();
  fuzz->add_option("--config", config, "Fuzz config (JSON)");
  fuzz->add_option("--findings", findings_out, "Write findings as NDJSON here");
  fuzz->add_flag("--coverage", coverage, "Print the coverage report");

  std::string input;
  auto* fbytes = app.add_subcommand("fuzz-bytes", "Run one event sequence decoded from raw bytes");
  fbytes->add_option("file", file, "Model file")->required();
  fbytes->add_option("--input", input, "Byte file (default: standard input)");
  fbytes->add_option("--seed", seed, "Scheduler seed");
  fbytes->add_option("--config", config, "Fuzz config (JSON) selecting oracles and predicates");

  int port = default_port();
  std::string host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "Serve the interactive session API");
  serve->add_option("file", file, "Model file")->required();
  serve->add_option("--port", port, "Port (default: CONSTABL_PORT or 8080)");
  serve->add_option("--host", host, "Bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*check) return run_check(file, out, err);
    if (*sim) return run_simulate(file, events, seed, trace_out, schedule, out, err);
    if (*replay) return run_replay(file, trace_in, out, err);
    if (*fuzz) return run_fuzz(file, config, findings_out, coverage, out, err);
    if (*fbytes) return run_fuzz_bytes(file, input, seed, config, out, err, in);
    if (*serve) return run_serve(file, host, port, out, err);
  } catch (const InvalidModelError& e) {
    print(err, e.diagnostics);
    return kFail;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace constabl

#include <gtest/gtest.h>

#include <json.hpp>

#include "constabl/fuzz.hpp"
#include "oracles.hpp"

using namespace constabl;

namespace {

FuzzConfig config_for(const Program& p, const std::string& json) { return parse_fuzz_config(json, p.model()); }

std::vector<Finding> defects(const FuzzResult& r) {
  std::vector<Finding> out;
  for (const auto& f : r.findings) {
    if (f.is_defect()) out.push_back(f);
  }
  return out;
}

Trace step_records(const Trace& t, std::uint32_t step) {
  Trace out;
  for (const auto& r : t) {
    if (r.step == step) out.push_back(r);
  }
  return out;
}

}  // namespace

TEST(EventsFromBytes, ModularMapping) {
  Model m = oracle::parse_only("m1.cstl");
  EXPECT_EQ(events_from_bytes(m, {0x00, 0x01}), (std::vector<std::string>{"e", "e1"}));
  EXPECT_TRUE(events_from_bytes(m, {}).empty());
  EXPECT_EQ(events_from_bytes(m, {0x05}), std::vector<std::string>{"e2"});
  EXPECT_EQ(events_from_bytes(m, {0xff}), std::vector<std::string>{"e"});  // 255 mod 3 = 0
}

TEST(FuzzConfig, ParsesAllFields) {
  auto p = oracle::load("m1.cstl");
  FuzzConfig c = config_for(*p, R"j({"max_events": 5, "runs": 7, "event_budget": 100, "time_budget_ms": 50,
      "seed": 9, "minimize": false, "step_budget": 1000,
      "oracles": {"read_write": true, "reachability": false},
      "undesired": [{"name": "both", "states": ["B", "D"]}, {"expr": "G.n1 > 3 and in(N)"}],
      "goals": [{"state": "K"}, {"transition": "t_GN"}, {"configuration": ["I", "K"]}]})j");
  EXPECT_EQ(c.max_events, 5u);
  EXPECT_EQ(c.runs, 7u);
  EXPECT_EQ(*c.event_budget, 100u);
  EXPECT_EQ(*c.time_budget_ms, 50u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_FALSE(c.minimize);
  EXPECT_EQ(c.engine.step_budget, 1000u);
  EXPECT_TRUE(c.oracles.read_write);
  EXPECT_FALSE(c.oracles.reachability);
  ASSERT_EQ(c.undesired.size(), 2u);
  EXPECT_EQ(c.undesired[0].states, (std::vector<std::string>{"B", "D"}));
  EXPECT_TRUE(c.undesired[1].expr.has_value());
  ASSERT_EQ(c.goals.size(), 3u);
  EXPECT_EQ(c.goals[2].kind, Goal::Kind::configuration);
}

TEST(FuzzConfig, RejectsUndeclaredNames) {
  auto p = oracle::load("m1.cstl");
  const char* bad[] = {
      R"j({"undesired": [{"states": ["B", "Nope"]}]})j",
      R"j({"undesired": [{"expr": "G.zz > 0"}]})j",
      R"j({"undesired": [{"expr": "in(Nope)"}]})j",
      R"j({"undesired": [{"expr": "1 +"}]})j",
      R"j({"goals": [{"state": "Nope"}]})j",
      R"j({"goals": [{"transition": "t_XX"}]})j",
      R"j({"goals": [{"configuration": ["G"]}]})j",
      R"j({"bogus": 1})j",
      R"j({"runs": "many"})j",
      R"j(not json)j",
  };
  for (const char* text : bad) EXPECT_THROW(config_for(*p, text), FuzzConfigError) << text;
}

// --- oracles ---------------------------------------------------------------------

TEST(WriteConflict, SharedStaticAcrossBranches) {
  auto p = oracle::load("m1_write_conflict.cstl");
  RandomScheduler s(0);
  auto r = simulate(p, {"e1"}, s, {}, 0);
  auto f = check_write_conflict(*p, step_records(r.trace, 1));
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(f->var, "G.n1");
  EXPECT_EQ(f->kind, FindingKind::concurrency_conflict);
  EXPECT_EQ(f->blocks, (std::vector<std::string>{"t_AB.action", "t_CD.action"}));
}

TEST(WriteConflict, DisjointWritesAndSingleBranchAreClean) {
  auto p = oracle::load("m1.cstl");
  RandomScheduler s(0);
  auto r = simulate(p, {"e1", "e"}, s, {}, 0);
  EXPECT_FALSE(check_write_conflict(*p, step_records(r.trace, 1)).has_value());
  // One transition writing many variables is a single branch.
  EXPECT_FALSE(check_write_conflict(*p, step_records(r.trace, 2)).has_value());
}

TEST(WriteConflict, ReadWriteFlagWidensTheCheck) {
  auto p = std::make_shared<const Program>(*parse_model(
      "statechart M { events e; static x : int = 0; static y : int = 0; state s : shell { "
      "state r1 { state a { } state b { } init a; transition t1 : a -> b on e / { x := 1; }; } "
      "state r2 { state c { } state d { } init c; transition t2 : c -> d on e / { y := x; }; } } init s; }")
                                                    .model);
  RandomScheduler s(0);
  EngineOptions opts;
  opts.record_reads = true;
  auto r = simulate(p, {"e"}, s, opts, 0);
  EXPECT_FALSE(check_write_conflict(*p, step_records(r.trace, 1), false).has_value());
  auto f = check_write_conflict(*p, step_records(r.trace, 1), true);
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(f->var, "M.x");
}

TEST(RunWitness, HierarchicalConflictIsNonDeterminism) {
  auto p = oracle::load("nondet.cstl");
  FuzzConfig c;
  RunReport r = run_witness(p, {{"inc", "e"}, 1, std::nullopt}, c);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].kind, FindingKind::non_determinism);
  EXPECT_EQ(r.findings[0].step, 2u);
  EXPECT_EQ(r.findings[0].transitions, (std::vector<std::string>{"t1", "t2"}));
}

TEST(RunWitness, CrossRegionConflictIsConcurrencyConflict) {
  auto p = oracle::load("region_conflict.cstl");
  FuzzConfig c;
  RunReport r = run_witness(p, {{"e"}, 1, std::nullopt}, c);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].kind, FindingKind::concurrency_conflict);
}

TEST(RunWitness, UndesiredStateSetAndPredicate) {
  auto p = oracle::load("traffic.cstl");
  FuzzConfig c = config_for(*p, R"j({"undesired": [{"name": "both-green", "states": ["green1", "green2"]}]})j");
  RunReport r = run_witness(p, {{"go1", "blink", "go2"}, 0, std::nullopt}, c);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].kind, FindingKind::undesired_configuration);
  EXPECT_EQ(r.findings[0].step, 3u);
  EXPECT_EQ(r.findings[0].key, "both-green");

  FuzzConfig e = config_for(*p, R"j({"undesired": [{"name": "turn2", "expr": "Junction.turn == 2 and in(red2)"}]})j");
  RunReport r2 = run_witness(p, {{"go1", "stop1"}, 0, std::nullopt}, e);
  ASSERT_EQ(r2.findings.size(), 1u);
  EXPECT_EQ(r2.findings[0].step, 2u);
}

TEST(RunWitness, RuntimeErrorAndNontermination) {
  auto p = oracle::load("m4.cstl");
  FuzzConfig c;
  c.engine.step_budget = 5;
  RunReport r = run_witness(p, {{"go"}, 0, std::nullopt}, c);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].kind, FindingKind::nontermination);

  auto q = std::make_shared<const Program>(*parse_model(
      "statechart M { events e; static x : int = 0; state a { } state b { } init a; "
      "transition t : a -> b on e / { x := 5 / x; }; }").model);
  RunReport r2 = run_witness(q, {{"e"}, 0, std::nullopt}, FuzzConfig{});
  ASSERT_EQ(r2.findings.size(), 1u);
  EXPECT_EQ(r2.findings[0].kind, FindingKind::runtime_error);
  EXPECT_EQ(r2.findings[0].key, "division-by-zero@t.action");
}

TEST(RunWitness, GoalsRecordFirstStep) {
  auto p = oracle::load("m1.cstl");
  FuzzConfig c = config_for(*p, R"j({"goals": [{"state": "K"}, {"transition": "t_GN"}, {"configuration": ["I", "K"]}]})j");
  RunReport r = run_witness(p, {{"e1", "e", "e2"}, 0, std::nullopt}, c);
  EXPECT_TRUE(r.findings.empty());
  EXPECT_EQ(r.goal_steps.at(0), 3u);
  EXPECT_EQ(r.goal_steps.at(1), 2u);
  EXPECT_EQ(r.goal_steps.at(2), 3u);
}

// --- campaigns ------------------------------------------------------------------

TEST(FuzzRun, OverlappingGuardsFindNonDeterminism) {
  auto p = oracle::load("nondet.cstl");
  FuzzConfig c;
  c.runs = 100;
  c.seed = 1;
  auto found = defects(fuzz_run(p, c));
  ASSERT_FALSE(found.empty());
  EXPECT_EQ(found[0].kind, FindingKind::non_determinism);
}

TEST(FuzzRun, ExclusiveGuardsGiveNoFalsePositives) {
  for (const char* f : {"nondet_exclusive.cstl", "region_conflict_exclusive.cstl"}) {
    auto p = oracle::load(f);
    FuzzConfig c;
    c.runs = 10000;
    c.max_events = 12;
    c.seed = 2;
    FuzzResult r = fuzz_run(p, c);
    EXPECT_EQ(r.runs, 10000u);
    EXPECT_EQ(r.defect_count(), 0u) << f << ": " << (r.findings.empty() ? "" : describe(r.findings[0]));
    // The exclusive guards are both exercised.
    EXPECT_GT(r.coverage.transitions["t1"], 0u) << f;
    EXPECT_GT(r.coverage.transitions["t2"], 0u) << f;
  }
}

TEST(FuzzRun, TrafficBugMinimizedToShortestSequence) {
  auto p = oracle::load("traffic.cstl");
  FuzzConfig c = config_for(*p, R"j({"runs": 2000, "seed": 3,
      "undesired": [{"name": "both-green", "states": ["green1", "green2"]}]})j");
  auto found = defects(fuzz_run(p, c));
  ASSERT_EQ(found.size(), 1u);
  const Model& m = p->model();
  auto shortest = oracle::bfs_shortest(p, 6, [&](const SimulationResult& r) {
    auto c2 = r.final_config;
    return std::count(c2.begin(), c2.end(), m.state_id("green1")) && std::count(c2.begin(), c2.end(), m.state_id("green2"));
  });
  ASSERT_TRUE(shortest.has_value());
  EXPECT_EQ(found[0].witness.events.size(), shortest->size());
  EXPECT_TRUE(reproduces(p, found[0], c));
}

TEST(FuzzRun, ReachabilityGoalReported) {
  auto p = oracle::load("m1.cstl");
  FuzzConfig c = config_for(*p, R"j({"runs": 1000, "seed": 4, "goals": [{"state": "K"}]})j");
  FuzzResult r = fuzz_run(p, c);
  EXPECT_EQ(r.defect_count(), 0u);
  ASSERT_EQ(r.findings.size(), 1u);
  const Finding& f = r.findings[0];
  EXPECT_EQ(f.kind, FindingKind::reachability_report);
  EXPECT_TRUE(f.reached);
  // The minimized witness is the hand-built path to K.
  EXPECT_EQ(f.witness.events, (std::vector<std::string>{"e", "e2"}));
}

TEST(FuzzRun, UnreachableGoalReportedAsNotReached) {
  auto p = oracle::load("nondet_exclusive.cstl");
  // Q needs three inc events before e, which a one-event run cannot supply.
  FuzzConfig c = config_for(*p, R"j({"runs": 50, "seed": 4, "max_events": 1, "goals": [{"state": "Q"}]})j");
  FuzzResult r = fuzz_run(p, c);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_FALSE(r.findings[0].reached);
}

TEST(FuzzRun, CoverageGrowsMonotonically) {
  auto p = oracle::load("automotive.cstl");
  FuzzConfig c;
  c.runs = 200;
  c.seed = 5;
  Coverage prev;
  int calls = 0;
  fuzz_run(p, c, [&](const Coverage& cov) {
    ++calls;
    for (const auto& [k, v] : prev.states) EXPECT_GE(cov.states.count(k) ? cov.states.at(k) : 0, v) << k;
    for (const auto& [k, v] : prev.transitions) EXPECT_GE(cov.transitions.count(k) ? cov.transitions.at(k) : 0, v) << k;
    EXPECT_GE(cov.runs, prev.runs);
    EXPECT_GE(cov.events, prev.events);
    prev = cov;
  });
  EXPECT_EQ(calls, 200);
  EXPECT_GT(prev.transitions.size(), 20u);
}

TEST(FuzzRun, EventBudgetBoundsTheCampaign) {
  auto p = oracle::load("m1.cstl");
  FuzzConfig c;
  c.runs = 1000000;
  c.event_budget = 500;
  FuzzResult r = fuzz_run(p, c);
  EXPECT_LE(r.events, 500u);
  EXPECT_LT(r.runs, 1000000u);
}

TEST(FuzzRun, FindingsReplayToSameKindAndStep) {
  auto p = oracle::load("automotive.cstl");
  FuzzConfig c = config_for(*p, R"j({"event_budget": 5000, "seed": 6,
      "undesired": [{"states": ["EVA_Slow", "CA_Mitigate"]}]})j");
  FuzzResult r = fuzz_run(p, c);
  ASSERT_GT(r.defect_count(), 0u);
  for (const auto& f : defects(r)) {
    std::uint32_t step = 0;
    EXPECT_TRUE(reproduces(p, f, c, &step)) << describe(f);
    EXPECT_EQ(step, f.step) << describe(f);
  }
}

TEST(FuzzRun, SameSeedSameFindings) {
  auto p = oracle::load("traffic.cstl");
  FuzzConfig c = config_for(*p, R"j({"runs": 300, "seed": 8, "undesired": [{"states": ["green1", "green2"]}]})j");
  auto a = fuzz_run(p, c), b = fuzz_run(p, c);
  ASSERT_EQ(a.findings.size(), b.findings.size());
  for (std::size_t i = 0; i < a.findings.size(); ++i) EXPECT_EQ(to_json_line(a.findings[i]), to_json_line(b.findings[i]));
}

// --- minimization -----------------------------------------------------------------

TEST(Minimize, ShrinksToSubsequenceThatStillFails) {
  auto p = oracle::load("nondet.cstl");
  FuzzConfig c;
  RunReport r = run_witness(p, {{"inc", "back", "e", "inc"}, 3, std::nullopt}, c);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].step, 3u);
  Finding m = minimize(p, r.findings[0], c);
  EXPECT_LE(m.witness.events.size(), 4u);
  EXPECT_EQ(m.witness.events, std::vector<std::string>{"e"});
  EXPECT_TRUE(reproduces(p, m, c));
}

TEST(Minimize, MinimalWitnessUnchanged) {
  auto p = oracle::load("nondet.cstl");
  FuzzConfig c;
  RunReport r = run_witness(p, {{"e"}, 0, std::nullopt}, c);
  ASSERT_EQ(r.findings.size(), 1u);
  Finding m = minimize(p, r.findings[0], c);
  EXPECT_EQ(m.witness.events, r.findings[0].witness.events);
}

TEST(Minimize, NonReproducibleInputThrows) {
  auto p = oracle::load("nondet.cstl");
  Finding f;
  f.kind = FindingKind::non_determinism;
  f.key = "t1,t2";
  f.witness.events = {"inc"};
  EXPECT_THROW(minimize(p, f, FuzzConfig{}), NonReproducibleError);
}

TEST(Minimize, ScriptIsShortenedWhileStillReproducing) {
  auto p = oracle::load("m1_write_conflict.cstl");
  FuzzConfig c;
  RandomScheduler s(0);
  auto sim = simulate(p, {"e2", "e1"}, s, {}, 0);
  Witness w{{"e2", "e1"}, 0, schedule_of(sim.trace)};
  RunReport r = run_witness(p, w, c);
  ASSERT_EQ(r.findings.size(), 1u);
  Finding m = minimize(p, r.findings[0], c);
  EXPECT_EQ(m.witness.events, std::vector<std::string>{"e1"});
  ASSERT_TRUE(m.witness.script.has_value());
  EXPECT_LE(m.witness.script->size(), w.script->size());
  EXPECT_TRUE(reproduces(p, m, c));
}

TEST(Finding, JsonLineCarriesWitness) {
  auto p = oracle::load("region_conflict.cstl");
  RunReport r = run_witness(p, {{"e"}, 12, std::nullopt}, FuzzConfig{});
  ASSERT_EQ(r.findings.size(), 1u);
  auto j = nlohmann::json::parse(to_json_line(r.findings[0]));
  EXPECT_EQ(j["kind"], "finding");
  EXPECT_EQ(j["finding"], "concurrency-conflict");
  EXPECT_EQ(j["events"], nlohmann::json::array({"e"}));
  EXPECT_EQ(j["seed"], 12);
  EXPECT_NE(describe(r.findings[0]).find("concurrency-conflict"), std::string::npos);
}

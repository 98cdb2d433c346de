#include <gtest/gtest.h>

#include "constabl/structural.hpp"
#include "oracles.hpp"

using namespace constabl;

namespace {

const Model& m1() {
  static Model m = oracle::parse_only("m1.cstl");
  return m;
}

StateSet ids(const Model& m, std::initializer_list<const char*> names) {
  StateSet out;
  for (const char* n : names) out.push_back(m.state_id(n));
  return out;
}

std::set<std::string> names(const Model& m, const StateSet& ss) {
  std::set<std::string> out;
  for (StateId s : ss) out.insert(m.state(s).name);
  return out;
}

std::string name(const Model& m, StateId s) { return m.state(s).name; }

}  // namespace

TEST(IsAncestor, Goldens) {
  const Model& m = m1();
  EXPECT_TRUE(is_ancestor(m, m.state_id("E"), m.root()));
  EXPECT_FALSE(is_ancestor(m, m.state_id("A"), m.state_id("A")));
  EXPECT_FALSE(is_ancestor(m, m.root(), m.state_id("E")));
}

TEST(IsAncestor, AgreesWithChainWalkOnAllPairs) {
  const Model& m = m1();
  for (const auto& a : m.states()) {
    auto chain = oracle::chain(m, a.name);
    for (const auto& b : m.states()) {
      bool want = std::find(chain.begin(), chain.end(), b.name) != chain.end();
      EXPECT_EQ(is_ancestor(m, m.state_id(a.name), m.state_id(b.name)), want) << a.name << " " << b.name;
    }
  }
}

TEST(Substates, Goldens) {
  const Model& m = m1();
  EXPECT_EQ(names(m, substates(m, m.root())), (std::set<std::string>{"G", "N"}));
  EXPECT_TRUE(substates(m, m.state_id("A")).empty());
  EXPECT_EQ(names(m, substates(m, m.state_id("G"))), (std::set<std::string>{"E", "F"}));
}

TEST(CommonAncestors, Goldens) {
  const Model& m = m1();
  EXPECT_EQ(names(m, common_ancestors(m, ids(m, {"A", "D"}))), (std::set<std::string>{"G", "𝓜"}));
  EXPECT_EQ(names(m, common_ancestors(m, ids(m, {"A", "J"}))), (std::set<std::string>{"𝓜"}));
  EXPECT_TRUE(common_ancestors(m, ids(m, {"𝓜"})).empty());
}

TEST(CommonAncestors, AgreesWithOracleOnAllPairs) {
  const Model& m = m1();
  for (const auto& a : m.states()) {
    for (const auto& b : m.states()) {
      auto got = names(m, common_ancestors(m, {m.state_id(a.name), m.state_id(b.name)}));
      EXPECT_EQ(got, oracle::common_ancestors(m, {a.name, b.name})) << a.name << " " << b.name;
    }
  }
}

TEST(Cca, Goldens) {
  const Model& m = m1();
  EXPECT_EQ(name(m, cca(m, ids(m, {"A", "B", "C", "D"}))), "G");
  EXPECT_EQ(name(m, cca(m, ids(m, {"A", "B"}))), "E");
  EXPECT_EQ(name(m, cca(m, ids(m, {"A"}))), "E");
  EXPECT_THROW(cca(m, ids(m, {"𝓜"})), NoCommonAncestorError);
}

TEST(Cca, AgreesWithOracleOnAllTriples) {
  const Model& m = m1();
  for (const auto& a : m.states()) {
    for (const auto& b : m.states()) {
      for (const auto& c : m.states()) {
        std::vector<std::string> ss{a.name, b.name, c.name};
        std::string want = oracle::closest_common_ancestor(m, ss);
        StateSet in = {m.state_id(a.name), m.state_id(b.name), m.state_id(c.name)};
        if (want.empty()) {
          EXPECT_THROW(cca(m, in), NoCommonAncestorError);
        } else {
          EXPECT_EQ(name(m, cca(m, in)), want);
        }
      }
    }
  }
}

TEST(CcaTransitions, Goldens) {
  const Model& m = m1();
  TransitionId ab = m.transition_id("t_AB"), cd = m.transition_id("t_CD"), gn = m.transition_id("t_GN");
  EXPECT_EQ(name(m, cca_transitions(m, {ab, cd})), "G");
  EXPECT_EQ(name(m, cca_transitions(m, {ab})), "E");
  EXPECT_EQ(name(m, cca_transitions(m, {gn})), "𝓜");
}

TEST(CheckModel, BundledValidModelsAreClean) {
  for (const char* f : {"m1.cstl", "m1_trunc.cstl", "m1_write_conflict.cstl", "m4.cstl", "numbered.cstl", "nondet.cstl",
                        "nondet_exclusive.cstl", "region_conflict.cstl", "region_conflict_exclusive.cstl", "traffic.cstl",
                        "automotive.cstl"}) {
    Model m = oracle::parse_only(f);
    EXPECT_TRUE(check_model(m, f).empty()) << f;
  }
}

namespace {

std::vector<std::string> check_codes(const std::string& file) {
  Model m = oracle::parse_only(file);
  std::vector<std::string> out;
  for (const auto& d : check_model(m, file)) out.push_back(d.code);
  return out;
}

}  // namespace

TEST(CheckModel, Fixtures) {
  EXPECT_EQ(check_codes("bad_t1.cstl"), std::vector<std::string>{"T1"});
  EXPECT_EQ(check_codes("bad_t2.cstl"), std::vector<std::string>{"T2"});
  auto t3 = check_codes("bad_t3.cstl");
  EXPECT_NE(std::find(t3.begin(), t3.end(), "T3"), t3.end());
  EXPECT_EQ(check_codes("bad_containment.cstl"), (std::vector<std::string>{"S-containment", "S-containment"}));
  EXPECT_EQ(check_codes("bad_scope.cstl"), std::vector<std::string>{"V-scope"});
  EXPECT_EQ(check_codes("bad_type.cstl"), std::vector<std::string>{"V-type"});
  EXPECT_EQ(check_codes("bad_guard.cstl"), std::vector<std::string>{"G-bool"});
}

TEST(CheckModel, InlineRules) {
  auto run = [](const std::string& text) {
    ParseResult r = parse_model(text);
    EXPECT_TRUE(r.ok()) << text;
    std::vector<std::string> out;
    for (const auto& d : check_model(*r.model)) out.push_back(d.code);
    return out;
  };
  // A shell with a single region is legal but suspicious.
  EXPECT_EQ(run("statechart M { events e; state s : shell { state r { state a { } init a; } } init s; }"),
            std::vector<std::string>{"W-shell1"});
  EXPECT_EQ(run("statechart M { events e; static x : int = 0; static x : int = 1; state a { } init a; }"),
            std::vector<std::string>{"V-dup"});
  // Statics are initialized once, so they cannot read locals.
  EXPECT_EQ(run("statechart M { events e; local l : int = 0; static x : int = l; state a { } init a; }"),
            std::vector<std::string>{"V-scope"});
  // Locals see earlier declarations only.
  EXPECT_EQ(run("statechart M { events e; local a1 : int = b1; local b1 : int = 0; state a { } init a; }"),
            std::vector<std::string>{"V-scope"});
  EXPECT_EQ(run("statechart M { events e; static x : int = min(1); state a { } init a; }"),
            std::vector<std::string>{"V-type"});
  EXPECT_TRUE(run("statechart M { events e; static x : int = 0; state a { } state b { } init a; "
                  "transition t : a -> b on e [x > 0 and not (x == 3)] / { if (x < 2) { x := abs(x - 5); } "
                  "else { x := max(x, 1) / 2; } }; }")
                  .empty());
}

TEST(Scope, ResolveVariableInnermostFirst) {
  Model m = *parse_model("statechart M { events e; static x : int = 0; state a { local x : int = 1; "
                         "state b { } init b; } init a; }")
                 .model;
  auto r = resolve_variable(m, m.state_id("b"), "x");
  ASSERT_TRUE(r);
  EXPECT_EQ(name(m, r->state), "a");
  auto s = resolve_variable(m, m.root(), "x");
  ASSERT_TRUE(s);
  EXPECT_EQ(s->state, m.root());
  ResolveOptions statics;
  statics.statics_only = true;
  EXPECT_FALSE(resolve_variable(m, m.state_id("b"), "x", statics).has_value());
}

TEST(Scope, TransitionScopeIsCca) {
  const Model& m = m1();
  EXPECT_EQ(name(m, transition_scope(m, m.transition_id("t_AB"))), "E");
  EXPECT_EQ(name(m, transition_scope(m, m.transition_id("t_GN"))), "𝓜");
}

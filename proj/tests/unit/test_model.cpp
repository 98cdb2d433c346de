#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace constabl;

namespace {

const Model& m1() {
  static Model m = oracle::parse_only("m1.cstl");
  return m;
}

}  // namespace

TEST(LookupState, FindsShellG) {
  const State& g = lookup_state(m1(), "G");
  EXPECT_EQ(g.name, "G");
  EXPECT_EQ(g.type, StateType::shell);
}

TEST(LookupState, UnknownNameThrows) { EXPECT_THROW(lookup_state(m1(), "Z"), UnknownNameError); }

TEST(LookupState, RootByUnicodeName) {
  const State& r = lookup_state(m1(), "𝓜");
  EXPECT_EQ(r.type, StateType::statechart);
  EXPECT_EQ(m1().state_id("𝓜"), m1().root());
}

TEST(ParentOf, MatchesChainWalk) {
  const Model& m = m1();
  EXPECT_EQ(m.state(*parent_of(m, m.state_id("G"))).name, "𝓜");
  EXPECT_FALSE(parent_of(m, m.root()).has_value());
  EXPECT_EQ(m.state(*parent_of(m, m.state_id("A"))).name, "E");
  for (const auto& s : m.states()) {
    auto c = oracle::chain(m, s.name);
    auto p = parent_of(m, m.state_id(s.name));
    if (c.empty()) {
      EXPECT_FALSE(p.has_value()) << s.name;
    } else {
      ASSERT_TRUE(p.has_value()) << s.name;
      EXPECT_EQ(m.state(*p).name, c.front()) << s.name;
    }
  }
}

TEST(Model, CountsAndEvents) {
  EXPECT_EQ(m1().state_count(), 15u);
  EXPECT_EQ(m1().transition_count(), 5u);
  EXPECT_EQ(m1().events(), (std::vector<std::string>{"e", "e1", "e2"}));
}

TEST(Model, ThrowingLookups) {
  EXPECT_THROW(m1().transition_id("t_XY"), UnknownNameError);
  EXPECT_THROW(m1().event_id("nope"), UnknownNameError);
  EXPECT_FALSE(m1().find_event("nope").has_value());
  EXPECT_EQ(m1().transition(m1().transition_id("t_GN")).source, m1().state_id("G"));
}

TEST(Value, IntAndBoolAreDistinct) {
  EXPECT_NE(Value::integer(0), Value::boolean(false));
  EXPECT_EQ(Value::integer(3), Value::integer(3));
  EXPECT_TRUE(Value::boolean(true).is_bool());
}

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"

using namespace constabl;

namespace {

std::string read(const std::string& name) {
  std::ifstream f(oracle::model_path(name), std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> codes(const Diagnostics& ds) {
  std::vector<std::string> out;
  for (const auto& d : ds) out.push_back(d.code);
  return out;
}

ParseResult parse(const std::string& text) { return parse_model(text, "t.cstl"); }

}  // namespace

TEST(Parse, M1Shape) {
  ParseResult r = parse_file(oracle::model_path("m1.cstl"));
  ASSERT_TRUE(r.ok()) << codes(r.diagnostics).size();
  const Model& m = *r.model;
  EXPECT_EQ(m.state_count(), 15u);
  EXPECT_EQ(m.transition_count(), 5u);
  EXPECT_EQ(m.events(), (std::vector<std::string>{"e", "e1", "e2"}));
  EXPECT_EQ(m.state(m.state_id("G")).type, StateType::shell);
  EXPECT_EQ(m.state(m.state_id("N")).type, StateType::shell);
  EXPECT_EQ(m.state(m.state_id("E")).type, StateType::composite);
  EXPECT_EQ(m.state(m.state_id("A")).type, StateType::atomic);
  EXPECT_EQ(m.state(m.root()).type, StateType::statechart);
}

TEST(Parse, M4LoopBlock) {
  ParseResult r = parse_file(oracle::model_path("m4.cstl"));
  ASSERT_TRUE(r.ok());
  const Block& a = r.model->transition(r.model->transition_id("t")).action;
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].kind, Stmt::Kind::assign);
  EXPECT_EQ(a[0].var, "x");
  EXPECT_EQ(a[1].kind, Stmt::Kind::while_);
  ASSERT_EQ(a[1].body.size(), 1u);
  EXPECT_EQ(to_source(a[1].expr), "x < 10");
}

TEST(Parse, EmptyStatechartNeedsInit) {
  ParseResult r = parse("statechart M { }");
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(codes(r.diagnostics), std::vector<std::string>{"P005"});
}

TEST(Parse, MissingSemicolonReportsLocation) {
  ParseResult r = parse_file(oracle::model_path("bad_syntax.cstl"));
  ASSERT_FALSE(r.ok());
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].code, "P001");
  EXPECT_EQ(r.diagnostics[0].location.line, 8u);
  EXPECT_EQ(r.diagnostics[0].location.column, 1u);
}

TEST(Parse, ColumnsCountCodePoints) {
  // The 𝓜 before the error is four bytes but one column.
  ParseResult r = parse("statechart 𝓜 { events e; state a { } init a; @ }");
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.diagnostics[0].location.line, 1u);
  EXPECT_EQ(r.diagnostics[0].location.column, 46u);
}

TEST(Parse, ResolutionErrors) {
  EXPECT_EQ(codes(parse("statechart M { events e, e; state a { } init a; }").diagnostics),
            std::vector<std::string>{"P004"});
  EXPECT_EQ(codes(parse("statechart M { events e; state a { } state a { } init a; }").diagnostics),
            std::vector<std::string>{"P002"});
  EXPECT_EQ(codes(parse("statechart M { events e; state a { } init a; transition t : a -> zz on e; }").diagnostics),
            std::vector<std::string>{"P006"});
  EXPECT_EQ(codes(parse("statechart M { events e; state a { } init a; transition t : a -> a on f; }").diagnostics),
            std::vector<std::string>{"P007"});
  EXPECT_EQ(codes(parse("statechart M { events e; state a { } state b { } init a, b; }").diagnostics),
            std::vector<std::string>{"P009"});
  EXPECT_EQ(codes(parse("statechart M { events e; state a { state c { } init c; } init c; }").diagnostics),
            std::vector<std::string>{"P008"});
  EXPECT_EQ(codes(parse("statechart M { events e; state a { } init a; transition t : a -> a on e; "
                        "transition t : a -> a on e; }").diagnostics),
            std::vector<std::string>{"P003"});
  EXPECT_EQ(codes(parse("statechart M { events e; static x : int = foo(1); state a { } init a; }").diagnostics),
            std::vector<std::string>{"P012"});
}

TEST(Parse, MissingFile) {
  ParseResult r = parse_file(oracle::model_path("does_not_exist.cstl"));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(codes(r.diagnostics), std::vector<std::string>{"P000"});
}

TEST(Parse, TypeInference) {
  ParseResult r = parse("statechart M { events e; state s : shell { state r1 { state a { } init a; } "
                        "state r2 { state b { } init b; } } init s; }");
  ASSERT_TRUE(r.ok());
  const Model& m = *r.model;
  EXPECT_EQ(m.state(m.state_id("s")).type, StateType::shell);
  EXPECT_EQ(m.state(m.state_id("r1")).type, StateType::composite);
  EXPECT_EQ(m.state(m.state_id("b")).type, StateType::atomic);
  // Shell initial set is all regions.
  EXPECT_EQ(m.state(m.state_id("s")).initial.size(), 2u);
}

TEST(Parse, Precedence) {
  Diagnostics d;
  auto e = parse_expression("1 + 2 * 3 < 7 and not x or y", d);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->binary_op, BinaryOp::or_);
  EXPECT_EQ(e->args[0].binary_op, BinaryOp::and_);
  EXPECT_EQ(to_source(*e), "1 + 2 * 3 < 7 and not x or y");
  auto f = parse_expression("(1 + 2) * 3", d);
  ASSERT_TRUE(f);
  EXPECT_EQ(f->binary_op, BinaryOp::mul);
  EXPECT_EQ(to_source(*f), "(1 + 2) * 3");
  auto g = parse_expression("a - (b - c)", d);
  EXPECT_EQ(to_source(*g), "a - (b - c)");
  auto h = parse_expression("x && y || !z", d);
  EXPECT_EQ(to_source(*h), "x and y or not z");
}

TEST(Parse, PredicateMode) {
  Diagnostics d;
  EXPECT_FALSE(parse_expression("in(A)", d).has_value());
  d.clear();
  auto e = parse_expression("in(A) and G.x1 > 0", d, true);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->args[0].builtin, Builtin::in_state);
  EXPECT_EQ(e->args[1].args[0].name, "G.x1");
}

// Round trip: pretty-printed text parses back to a structurally equal model.
class RoundTrip : public ::testing::TestWithParam<std::string> {};

TEST_P(RoundTrip, PrettyPrintReparses) {
  ParseResult a = parse_file(oracle::model_path(GetParam()));
  ASSERT_TRUE(a.ok());
  std::string text = pretty_print(*a.model);
  ParseResult b = parse_model(text);
  ASSERT_TRUE(b.ok()) << text;
  EXPECT_TRUE(equal(*a.model, *b.model)) << text;
  EXPECT_EQ(pretty_print(*b.model), text);
}

INSTANTIATE_TEST_SUITE_P(Models, RoundTrip,
                         ::testing::Values("m1.cstl", "m4.cstl", "numbered.cstl", "nondet.cstl", "region_conflict_exclusive.cstl",
                                           "traffic.cstl", "automotive.cstl"),
                         [](const auto& info) {
                           std::string n = info.param;
                           return n.substr(0, n.find('.'));
                         });

TEST(Parse, SourceTextIsNotTheOnlyEqualModel) {
  std::string text = read("m1.cstl");
  ParseResult a = parse_model(text);
  std::string mutated = text;
  mutated.replace(mutated.find("ab := ab + 10"), 13, "ab := ab + 11");
  ParseResult b = parse_model(mutated);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_FALSE(equal(*a.model, *b.model));
}

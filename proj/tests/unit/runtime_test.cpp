#include <gtest/gtest.h>

#include "alda/parser.hpp"
#include "alda/runtime.hpp"
#include "harness.hpp"

namespace alda {
namespace {

using testing::run_source;

RuntimeErrorKind error_of(const std::string& src) {
  try {
    run_source(src);
  } catch (const RuntimeError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no runtime error for:\n" << src;
  return RuntimeErrorKind::IoError;
}

TEST(Runtime, PrintsCanonicalDisplay) {
  EXPECT_EQ(run_source("print({3, 1, 2})\n"), "{1, 2, 3}\n");
  EXPECT_EQ(run_source("print((1, 'a'))\n"), "(1, 'a')\n");
  EXPECT_EQ(run_source("print('hi')\n"), "hi\n");
  EXPECT_EQ(run_source("print({'b', 'a'})\n"), "{'a', 'b'}\n");
  EXPECT_EQ(run_source("print({(2,), (1,)})\n"), "{1, 2}\n");
  EXPECT_EQ(run_source("print(None)\nprint(False)\n"), "None\nFalse\n");
}

TEST(Runtime, Arithmetic) {
  EXPECT_EQ(run_source("print(7 / 2)\nprint(-7 / 2)\nprint(-7 % 3)\nprint(2 * 3 - 1)\n"),
            "3\n-4\n2\n5\n");
  EXPECT_EQ(error_of("print(1 / 0)\n"), RuntimeErrorKind::DivisionByZero);
  EXPECT_EQ(error_of("print(9223372036854775807 + 1)\n"), RuntimeErrorKind::IntegerOverflow);
  EXPECT_EQ(error_of("print(1 + 'a')\n"), RuntimeErrorKind::TypeError);
}

TEST(Runtime, SetsAndAggregates) {
  EXPECT_EQ(run_source("print({1, 2} + {3})\nprint({1, 2} - {1})\n"), "{1, 2, 3}\n{2}\n");
  EXPECT_EQ(run_source("print(count {})\nprint(sum {1, 2, 3})\nprint(max {1, 5, 3})\nprint(min {4, 2})\n"),
            "0\n6\n5\n2\n");
  EXPECT_EQ(run_source("print({}.any())\n"), "None\n");
  EXPECT_EQ(error_of("print(max {})\n"), RuntimeErrorKind::EmptyAggregate);
  EXPECT_EQ(error_of("print(max {1, 'a'})\n"), RuntimeErrorKind::TypeError);
}

TEST(Runtime, TuplesAndSelect) {
  EXPECT_EQ(run_source("print(select((4, 5, 6), 2))\nprint(len((1, 2)))\nprint(isTuple(3))\n"),
            "5\n2\nFalse\n");
  EXPECT_EQ(error_of("print(select((4, 5), 3))\n"), RuntimeErrorKind::IndexOutOfRange);
  EXPECT_EQ(error_of("print(select(4, 1))\n"), RuntimeErrorKind::NotATuple);
}

TEST(Runtime, Quantifiers) {
  EXPECT_EQ(run_source("print(each x in {1, 2} | x > 0)\nprint(some x in {1, 2} | x > 1)\n"),
            "True\nTrue\n");
  EXPECT_EQ(run_source("print(some x in {} | True)\nprint(each x in {} | False)\n"), "False\nTrue\n");
  EXPECT_EQ(run_source("y = 4\nprint(some (x, =y) in {(1, 2), (3, 4)} | x > 2)\n"), "True\n");
}

TEST(Runtime, WitnessesFromIfSome) {
  std::string src =
      "S = {(1, 'a'), (2, 'b')}\n"
      "if some (k, v) in S | k > 1:\n"
      "  print(v)\n";
  EXPECT_EQ(run_source(src), "b\n");
  std::string loop =
      "todo = {3, 1, 2}\n"
      "out = {}\n"
      "while some x in todo | True:\n"
      "  todo.del(x)\n"
      "  out.add(x * 10)\n"
      "print(out)\n";
  EXPECT_EQ(run_source(loop), "{10, 20, 30}\n");
}

TEST(Runtime, ObjectsMethodsInheritance) {
  std::string src =
      "class A:\n"
      "  def setup(v):\n"
      "    self.v := v\n"
      "  def get():\n"
      "    return v\n"
      "  def twice():\n"
      "    return get() * 2\n"
      "class B extends A:\n"
      "  def get():\n"
      "    return super().get() + 1\n"
      "a = new(A, [4])\n"
      "b = new(B, [4])\n"
      "print(a.twice())\n"
      "print(b.twice())\n"
      "print(isinstance(b, A))\n"
      "print(isinstance(a, B))\n";
  EXPECT_EQ(run_source(src), "8\n10\nTrue\nFalse\n");
}

TEST(Runtime, ObjectErrors) {
  std::string cls = "class A:\n  def m(x):\n    return x\n";
  EXPECT_EQ(error_of(cls + "a = new A\nprint(a.zz)\n"), RuntimeErrorKind::FieldUndefined);
  EXPECT_EQ(error_of(cls + "a = new A\nprint(a.nope())\n"), RuntimeErrorKind::MethodUndefined);
  EXPECT_EQ(error_of(cls + "a = new A\nprint(a.m(1, 2))\n"), RuntimeErrorKind::ArityMismatch);
}

TEST(Runtime, ErrorsCarryLocation) {
  try {
    run_source("x := 1\ny := x / 0\n");
    FAIL();
  } catch (const RuntimeError& e) {
    EXPECT_EQ(e.loc().line, 2);
  }
}

TEST(Runtime, LeftToRightErrorOrder) {
  EXPECT_EQ(error_of("print((1 / 0, max {}))\n"), RuntimeErrorKind::DivisionByZero);
  EXPECT_EQ(error_of("print((max {}, 1 / 0))\n"), RuntimeErrorKind::EmptyAggregate);
}

const char* kTrans =
    "rules trans_rs:\n"
    "  path(x,y) if edge(x,y)\n"
    "  path(x,y) if edge(x,z), path(z,y)\n";

TEST(Runtime, InferQueryShapes) {
  std::string src = std::string(kTrans) +
                    "E = {(1,2), (2,3)}\n"
                    "R = 3\n"
                    "a := infer(path, edge=E, rules=trans_rs)\n"
                    "b := infer(path(_,_), edge=E, rules=trans_rs)\n"
                    "c, d := infer(path(1,_), path(_,=R), edge=E, rules=trans_rs)\n"
                    "print(a)\nprint(b)\nprint(c)\nprint(d)\n"
                    "print(some t in c | isTuple(t))\n";
  EXPECT_EQ(run_source(src),
            "{(1, 2), (1, 3), (2, 3)}\n{(1, 2), (1, 3), (2, 3)}\n{2, 3}\n{1, 2}\nTrue\n");
}

TEST(Runtime, GlobalRuleSetIsMaintained) {
  std::string src = std::string(
                        "rules trans_rs:\n"
                        "  path(x,y) if edge(x,y)\n"
                        "  path(x,y) if edge(x,z), path(z,y)\n") +
                    "edge = {(1,2)}\n"
                    "print(path)\n"
                    "edge.add((2,3))\n"
                    "print(path)\n"
                    "edge := {(5,6)}\n"
                    "print(path)\n";
  EXPECT_EQ(run_source(src), "{(1, 2)}\n{(1, 2), (1, 3), (2, 3)}\n{(5, 6)}\n");
}

TEST(Runtime, ObjectRuleSetIsMaintained) {
  std::string src =
      "class G:\n"
      "  def setup():\n"
      "    self.edge := {}\n"
      "  rules rs:\n"
      "    path(x,y) if edge(x,y)\n"
      "    path(x,y) if edge(x,z), path(z,y)\n"
      "g = new(G, [])\n"
      "g.edge.add((1,2))\n"
      "g.edge.add((2,3))\n"
      "print(g.path)\n"
      "s := g.edge\n"
      "s.del((1,2))\n"
      "print(g.path)\n";
  EXPECT_EQ(run_source(src), "{(1, 2), (1, 3), (2, 3)}\n{(2, 3)}\n");
}

TEST(Runtime, DerivedWriteThroughAliasFails) {
  std::string src =
      "class G:\n"
      "  def setup():\n"
      "    self.edge := {(1,2)}\n"
      "  rules rs:\n"
      "    path(x,y) if edge(x,y)\n"
      "g = new(G, [])\n"
      "p := g.path\n"
      "p.add((7,7))\n";
  EXPECT_EQ(error_of(src), RuntimeErrorKind::DerivedWrite);
}

TEST(Runtime, BaseMustBeASet) {
  std::string src = std::string(kTrans) + "edge = 5\nprint(path)\n";
  EXPECT_EQ(error_of(src), RuntimeErrorKind::BaseNotASet);
}

TEST(Runtime, KeywordArgumentMustBeLocalBase) {
  std::string src = std::string(kTrans) + "x := infer(path, path={}, rules=trans_rs)\n";
  EXPECT_EQ(error_of(src), RuntimeErrorKind::NotABasePredicate);
}

TEST(Runtime, PoliciesAgreeOnFinalHeap) {
  for (const char* name : {"rbac.alda", "rbac_allloc.alda", "rbac_nonloc.alda", "skip.alda"}) {
    SCOPED_TRACE(name);
    std::string src = testing::read_file(testing::corpus_path(name));
    EXPECT_EQ(testing::final_heap(src, MaintenancePolicy::EveryMutation),
              testing::final_heap(src, MaintenancePolicy::Flagged));
  }
}

TEST(Runtime, SeedDoesNotChangeResults) {
  std::string src = testing::read_file(testing::corpus_path("rbac.alda"));
  std::string base = run_source(src);
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    RunOptions o;
    o.seed = seed;
    EXPECT_EQ(run_source(src, o), base);
  }
}

TEST(Runtime, TraceReportsImplicitInference) {
  std::vector<MaintenanceEvent> events;
  RunOptions o;
  o.on_maintain = [&](const MaintenanceEvent& e) { events.push_back(e); };
  run_source(std::string(kTrans) + "edge = {(1,2)}\nedge.add((2,3))\nprint(count path)\n", o);
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.back().ruleset, "$Globals.trans_rs");
  ASSERT_FALSE(events.back().deltas.empty());
  EXPECT_EQ(events.back().deltas.front().added, 2u);
}

TEST(Runtime, RbacExample) {
  EXPECT_EQ(run_source(testing::read_file(testing::corpus_path("rbac.alda"))), "{'ann', 'bob'}\n");
}

}  // namespace
}  // namespace alda

#include <gtest/gtest.h>

#include "alda/lowering.hpp"
#include "alda/parser.hpp"
#include "harness.hpp"

namespace alda {
namespace {

using namespace ast;

Program lowered(const std::string& src) { return lowering::lower(parse_program(src)); }

std::string kernel_text(const std::string& src) { return pretty_print(lowered(src)); }

std::string lowering_code(const std::string& src) {
  try {
    lowered(src);
  } catch (const CompileError& e) {
    return e.diagnostics().front().code;
  }
  return "";
}

const char* kSugar =
    "rules trans_rs:\n"
    "  path(x,y) if edge(x,y)\n"
    "  path(x,y) if edge(x,z), path(z,y)\n"
    "S = {(1, 2), (2, 3)}\n"
    "E = {(1, 2), (2, 3)}\n"
    "a = each (x, y) in S | x < y and y > 0\n"
    "b = {x: (x, _) in S | x > 1}\n"
    "ifSome (x, 3) in S | True:\n"
    "  c = x\n"
    "T = {1, 2, 3}\n"
    "whileSome y in T | y > 1:\n"
    "  T.del(y)\n"
    "d = infer(path(1, _), edge=E, rules=trans_rs)\n";

TEST(Lowering, EachBecomesNotSomeNot) {
  std::string k = kernel_text("S = {1}\nprint(each x in S | x > 0)\n");
  EXPECT_EQ(k.find("each"), std::string::npos);
  EXPECT_NE(k.find("not (some"), std::string::npos);
}

TEST(Lowering, SugarDisappears) {
  std::string k = kernel_text(kSugar);
  for (const char* word : {"each", "ifSome", "whileSome", " and ", "(1, _)"}) {
    EXPECT_EQ(k.find(word), std::string::npos) << word << " survives in\n" << k;
  }
  EXPECT_NO_THROW(lowering::audit_kernel(lowered(kSugar)));
}

TEST(Lowering, AuditRejectsSurfaceForms) {
  EXPECT_THROW(lowering::audit_kernel(parse_program("S = {1}\nifSome x in S | True:\n  skip\n")),
               CompileError);
  EXPECT_THROW(lowering::audit_kernel(parse_program("x = (some y in {1} | True) and True\n")),
               CompileError);
}

TEST(Lowering, PipelineIsIdempotent) {
  for (const auto& src : {std::string(kSugar), testing::read_file(testing::corpus_path("rbac.alda")),
                          testing::read_file(testing::corpus_path("rbac_nonloc.alda"))}) {
    Program once = lowered(src);
    EXPECT_EQ(lowering::lower(once), once);
  }
}

TEST(Lowering, PassesLeaveUnrelatedProgramsAlone) {
  Program p = lowering::globals_to_fields(parse_program("x = 1\ny = x + 2\nprint(y)\n"));
  EXPECT_EQ(lowering::some_statements(p), p);
  EXPECT_EQ(lowering::comprehensions(p), p);
  EXPECT_EQ(lowering::infer_patterns(p), p);
  EXPECT_EQ(lowering::iterator_patterns(p), p);
  EXPECT_EQ(lowering::wildcards(p), p);
}

TEST(Lowering, EachPassIsIdempotent) {
  Program p = lowering::unique_ruleset_names(parse_program(kSugar));
  p = lowering::globals_to_fields(std::move(p));
  using Pass = Program (*)(Program);
  for (Pass pass : {Pass(lowering::boolean_ops), Pass(lowering::hoist_effects),
                    Pass(lowering::pattern_exprs), Pass(lowering::wildcards),
                    Pass(lowering::infer_patterns), Pass(lowering::some_statements),
                    Pass(lowering::comprehensions), Pass(lowering::iterator_patterns)}) {
    p = pass(std::move(p));
    EXPECT_EQ(pass(p), p);
  }
}

TEST(Lowering, ClassRuleSetsAreQualified) {
  Program k = lowered(testing::read_file(testing::corpus_path("rbac.alda")));
  bool found = false;
  for (const auto& c : k.classes) {
    for (const auto& rs : c.rulesets) found = found || rs.name == "HierRBAC.trans_rs";
  }
  EXPECT_TRUE(found);
}

TEST(Lowering, FreshNamesAvoidSourceNames) {
  Program k = lowered(kSugar);
  std::string text = pretty_print(k);
  EXPECT_NE(text.find('$'), std::string::npos);
  EXPECT_NO_THROW(lowering::audit_kernel(k));
}

TEST(Lowering, GlobalNames) {
  auto names = lowering::global_names(lowered("x = 1\ny = x\n"));
  EXPECT_NE(std::find(names.begin(), names.end(), "x"), names.end());
  EXPECT_NE(std::find(names.begin(), names.end(), "y"), names.end());
}

TEST(Lowering, Errors) {
  EXPECT_EQ(lowering_code("rules rs:\n  self.p(x) if q(x)\n"), "self-in-global-rules");
}

TEST(Lowering, SugarAndKernelAgree) {
  std::string sugar =
      "S = {(1, 2), (2, 3), (3, 3)}\n"
      "r = {x: (x, 3) in S}\n";
  std::string kernel =
      "S = {(1, 2), (2, 3), (3, 3)}\n"
      "r = {}\n"
      "for tmp_t in S:\n"
      "  if isTuple(tmp_t):\n"
      "    if len(tmp_t) is 2:\n"
      "      if select(tmp_t, 2) is 3:\n"
      "        r.add(select(tmp_t, 1))\n";
  EXPECT_EQ(testing::final_heap(sugar), testing::final_heap(kernel));
}

}  // namespace
}  // namespace alda

#include <gtest/gtest.h>

#include "alda/analysis.hpp"
#include "alda/parser.hpp"
#include "alda/runtime.hpp"

namespace alda {
namespace {

using Names = std::set<std::string>;

ast::RuleSetDef rules(const std::string& body) {
  return parse_program("rules rs:\n" + body).rulesets.at(0);
}

const char* kTrans = "  path(x,y) if edge(x,y)\n  path(x,y) if edge(x,z), path(z,y)\n";

TEST(Classify, TransitiveClosure) {
  RuleSetInfo info = classify_predicates(rules(kTrans));
  EXPECT_EQ(info.base, Names{"edge"});
  EXPECT_EQ(info.derived, Names{"path"});
  EXPECT_EQ(info.find("path")->arity, 2u);
  EXPECT_EQ(info.base_deps.at("path"), Names{"edge"});
}

TEST(Classify, FactsOnly) {
  RuleSetInfo info = classify_predicates(rules("  p(1)\n  q(2, 3)\n"));
  EXPECT_TRUE(info.base.empty());
  EXPECT_EQ(info.derived, (Names{"p", "q"}));
}

TEST(Classify, AllLocalVariant) {
  RuleSetInfo info = classify_predicates(rules(std::string(kTrans) + "  path(x,x) if role(x)\n"));
  EXPECT_EQ(info.base, (Names{"edge", "role"}));
  EXPECT_EQ(info.derived, Names{"path"});
}

TEST(Dependencies, Transitive) {
  auto g = dependency_graph(rules("  a(x) if b(x)\n  b(x) if c(x), not d(x)\n  e(x) if c(x)\n").rules);
  EXPECT_EQ(depends_on(g, "a"), (Names{"b", "c", "d"}));
  EXPECT_EQ(depends_on(g, "e"), Names{"c"});
  EXPECT_TRUE(g.neg_edges.contains({"d", "b"}));
}

TEST(FullyDepends, PartialBases) {
  RuleSetInfo info = classify_predicates(rules("  a(x) if b(x)\n  c(x) if b(x), d(x)\n  e(x) if a(x)\n"));
  EXPECT_EQ(fully_depends(info, {"b"}), (Names{"a", "e"}));
  EXPECT_EQ(fully_depends(info, {"b", "d"}), (Names{"a", "c", "e"}));
  EXPECT_EQ(fully_depends(info, {}), Names{});
  EXPECT_EQ(fully_depends(classify_predicates(rules("  p(1)\n")), {}), Names{"p"});
}

TEST(Stratify, NegationLayers) {
  auto strata = stratify(rules("  r(x) if e(x,y)\n  u(x) if n(x), not r(x)\n  w(x) if n(x), not u(x)\n").rules);
  ASSERT_EQ(strata.size(), 3u);
  EXPECT_EQ(strata[0], Names{"r"});
  EXPECT_EQ(strata[1], Names{"u"});
  EXPECT_EQ(strata[2], Names{"w"});
}

TEST(Stratify, RecursionSharesStratum) {
  auto strata = stratify(rules("  a(x) if b(x)\n  b(x) if a(x)\n  b(x) if c(x)\n").rules);
  ASSERT_EQ(strata.size(), 1u);
  EXPECT_EQ(strata[0], (Names{"a", "b"}));
}

TEST(Stratify, NegativeCycleRejected) {
  try {
    stratify(rules("  p(x) if q(x), not r(x)\n  r(x) if q(x), not p(x)\n").rules);
    FAIL();
  } catch (const RuntimeError& e) {
    EXPECT_EQ(e.kind(), RuntimeErrorKind::StratificationError);
  }
}

// ---- update sites --------------------------------------------------------

std::string compile_error_code(const std::string& src) {
  try {
    compile(parse_program(src));
  } catch (const CompileError& e) {
    return e.diagnostics().front().code;
  }
  return "";
}

const char* kGlobalTc = "rules trans_rs:\n  path(x,y) if edge(x,y)\n  path(x,y) if edge(x,z), path(z,y)\n";

TEST(UpdateSites, GlobalBaseAssignment) {
  auto cp = compile(parse_program(std::string(kGlobalTc) + "edge := {(1,2)}\nx := 3\nprint(path)\n"));
  std::map<std::string, const UpdateSite*> by_what;
  for (const auto& s : cp->sites.sites) by_what[s.what] = &s;
  ASSERT_TRUE(by_what.contains("globals.edge"));
  EXPECT_EQ(by_what["globals.edge"]->kind, SiteKind::BaseOfRuleSets);
  EXPECT_EQ(by_what["globals.edge"]->rulesets, std::vector<std::string>{"$Globals.trans_rs"});
  ASSERT_TRUE(by_what.contains("globals.x"));
  EXPECT_EQ(by_what["globals.x"]->kind, SiteKind::LocalOnly);
}

TEST(UpdateSites, DerivedAssignmentIsCompileError) {
  EXPECT_EQ(compile_error_code(std::string(kGlobalTc) + "path := {(1,2)}\n"), "derived-write");
  EXPECT_EQ(compile_error_code(std::string(kGlobalTc) + "edge := {}\npath.add((1,2))\n"), "derived-write");
  std::string cls =
      "class G:\n"
      "  def setup():\n"
      "    self.edge := {}\n"
      "  rules rs:\n"
      "    path(x,y) if edge(x,y)\n"
      "  def bad():\n"
      "    self.path := {}\n";
  EXPECT_EQ(compile_error_code(cls), "derived-write");
}

TEST(UpdateSites, SetMutationThroughVariableMayAlias) {
  auto cp = compile(parse_program(std::string(kGlobalTc) + "edge := {}\ns := edge\ns.add((1,2))\nprint(path)\n"));
  bool found = false;
  for (const auto& s : cp->sites.sites) {
    if (s.what.ends_with(".add")) {
      found = true;
      EXPECT_EQ(s.kind, SiteKind::MaybeAliased);
    }
  }
  EXPECT_TRUE(found);
}

TEST(UpdateSites, NewObjectOfBearingClass) {
  std::string src =
      "class G:\n"
      "  def setup():\n"
      "    self.edge := {}\n"
      "  rules rs:\n"
      "    path(x,y) if edge(x,y)\n"
      "  def get():\n"
      "    return path\n"
      "class P:\n"
      "  def m():\n"
      "    skip\n"
      "g := new G\n"
      "p := new P\n";
  auto cp = compile(parse_program(src));
  std::map<std::string, const UpdateSite*> by_what;
  for (const auto& s : cp->sites.sites) by_what[s.what] = &s;
  ASSERT_TRUE(by_what.contains("globals.g"));
  EXPECT_EQ(by_what["globals.g"]->kind, SiteKind::BaseOfRuleSets);
  EXPECT_EQ(by_what["globals.g"]->rulesets, std::vector<std::string>{"G.rs"});
  ASSERT_TRUE(by_what.contains("globals.p"));
  EXPECT_EQ(by_what["globals.p"]->kind, SiteKind::LocalOnly);
}

TEST(UpdateSites, ReportsStableOrder) {
  auto cp = compile(parse_program(std::string(kGlobalTc) + "edge := {}\nedge.add((1,2))\nprint(path)\n"));
  for (std::size_t i = 1; i < cp->sites.sites.size(); ++i) {
    EXPECT_LT(cp->sites.sites[i - 1].stmt, cp->sites.sites[i].stmt);
  }
  for (const auto& s : cp->sites.sites) EXPECT_EQ(cp->sites.find(s.stmt), &s);
  EXPECT_FALSE(cp->sites.has_errors());
}

}  // namespace
}  // namespace alda

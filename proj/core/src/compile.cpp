#include <algorithm>

#include "alda/lowering.hpp"
#include "alda/runtime.hpp"

namespace alda {

std::unique_ptr<CompiledProgram> compile(const ast::Program& source,
                                         const std::vector<std::string>& extra_globals) {
  auto cp = std::make_unique<CompiledProgram>();
  cp->kernel = lowering::lower(source, extra_globals);

  std::vector<Diagnostic> diags;
  for (const auto& c : cp->kernel.classes) {
    for (const auto& rs : c.rulesets) {
      CompiledRuleSet crs;
      crs.name = rs.name;
      crs.owner = c.name;
      crs.info = classify_predicates(rs);
      try {
        crs.program = std::make_shared<datalog::RuleProgram>(rs.rules);
      } catch (const RuntimeError& e) {
        diags.push_back({Diagnostic::Stage::Analysis, "stratification",
                         rs.name + ": " + e.detail(), rs.loc});
        continue;
      }
      std::set<std::string> nl_base;
      for (const auto& [key, pi] : crs.info.preds) {
        if (pi.local()) continue;
        if (pi.derived) {
          crs.nonlocal_derived.push_back(key);
        } else {
          crs.nonlocal_base.push_back(key);
          nl_base.insert(key);
        }
      }
      for (const auto& d : fully_depends(crs.info, nl_base)) {
        if (!crs.info.find(d)->local()) crs.maintained.insert(d);
      }
      cp->rulesets.emplace(rs.name, std::move(crs));
    }
  }

  cp->sites = classify_update_sites(cp->kernel);
  for (const auto& s : cp->sites.sites) {
    if (s.kind == SiteKind::DerivedError) {
      diags.push_back({Diagnostic::Stage::Analysis, "derived-write",
                       "assignment to derived predicate: " + s.what, s.loc});
    }
  }
  if (!diags.empty()) {
    std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
      return std::tie(a.loc.line, a.loc.column) < std::tie(b.loc.line, b.loc.column);
    });
    throw CompileError(std::move(diags));
  }
  cp->globals = lowering::global_names(cp->kernel);
  return cp;
}

}  // namespace alda

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alda/programs.hpp"
#include "alda/runtime.hpp"

namespace alda::bench {

enum class GraphKind { Cycle, Random };

struct TcParams {
  std::size_t n = 500;
  bool reversed = false;
  GraphKind graph = GraphKind::Cycle;
  double density = 0.01;  // random graphs: probability of each edge
  std::uint64_t seed = 1;
};

struct TcResult {
  std::size_t edges = 0;
  std::size_t closure = 0;
  double seconds = 0;
};

std::vector<Value> make_graph(const TcParams& p);
TcResult run_tc(const TcParams& p);

struct RbacParams {
  std::size_t users = 500;
  std::size_t roles = 50;
  std::size_t updates = 50;
  std::uint64_t seed = 1;
};

/// Inputs of one RBAC run. Roles are 'r<i>', users 'u<i>'.
struct RbacScenario {
  std::vector<Value> roles;
  std::vector<Value> users;
  std::vector<Value> ur;       // (user, role)
  std::vector<Value> rh;       // (senior, junior)
  std::vector<Value> updates;  // (step, kind, x, y, queried role)
};

RbacScenario make_rbac_scenario(const RbacParams& p);

struct RbacVariantResult {
  programs::RbacVariant variant;
  double seconds = 0;
  std::vector<Value> answers;  // sorted (step, user)
};

struct RbacResult {
  std::vector<RbacVariantResult> variants;
  bool identical = true;
};

RbacVariantResult run_rbac_variant(programs::RbacVariant v, const RbacScenario& s,
                                   MaintenancePolicy policy = MaintenancePolicy::Flagged);
RbacResult run_rbac(const RbacParams& p, MaintenancePolicy policy = MaintenancePolicy::Flagged);

}  // namespace alda::bench

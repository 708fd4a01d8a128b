#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "alda/datalog.hpp"
#include "datalog_gen.hpp"

namespace alda::testing {

/// Least model by grounding every rule over the whole domain and iterating
/// the immediate-consequence operator, one level at a time.
datalog::FactStore ground_fixpoint(const DatalogInstance& inst);

/// Least model by enumerating every candidate interpretation of each level
/// and intersecting the models among them. Returns nullopt when a level has
/// more than `max_atoms` ground atoms.
std::optional<datalog::FactStore> enumerate_minimal_model(const DatalogInstance& inst,
                                                          int max_atoms = 16);

/// Reachability in one or more steps.
std::set<std::pair<int, int>> floyd_warshall(int n, const std::vector<std::pair<int, int>>& edges);

/// Users authorized for `role`: holders of some role that reaches `role`
/// along the hierarchy, found by breadth-first search.
struct RbacState {
  std::set<std::string> users, roles;
  std::set<std::pair<std::string, std::string>> ur;  // (user, role)
  std::set<std::pair<std::string, std::string>> rh;  // (senior, junior)
};
std::set<std::string> authorized_users(const RbacState& s, const std::string& role);

}  // namespace alda::testing

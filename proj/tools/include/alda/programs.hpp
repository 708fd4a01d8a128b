#pragma once

#include <string>

// Program texts driven by the bench suites.
namespace alda::programs {

enum class RbacVariant { Union, AllLocal, NonLocal };

const char* rbac_variant_name(RbacVariant v);

/// The CoreRBAC and HierRBAC classes of one variant.
std::string rbac_classes(RbacVariant v);

/// Drives one scenario through a HierRBAC object. Expects the globals
/// roles_in, users_in, ur_in, rh_in and updates_in, a set of
/// (step, kind, x, y, queried_role) with kind 'ur' or 'rh', and leaves
/// answers = {(step, user)}.
std::string rbac_driver();

/// Closure of the global relation edge into the global path.
std::string tc_program(bool reversed);

}  // namespace alda::programs

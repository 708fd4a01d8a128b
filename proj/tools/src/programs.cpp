#include "alda/programs.hpp"

namespace alda::programs {

namespace {

const char* kCore = R"(class CoreRBAC:
  def setup():
    self.USERS, self.ROLES, self.UR := {},{},{}
  def AddUser(user):
    USERS.add(user)
  def AddRole(role):
    ROLES.add(role)
  def AssignUser(user, role):
    UR.add((user,role))
  def AssignedUsers(role):
    return {u: u in USERS | (u,role) in UR}

class HierRBAC extends CoreRBAC:
  def setup():
    super().setup()
    self.RH := {}
  def AddInheritance(a,d):
    RH.add((a,d))
)";

const char* kUnion = R"(  rules trans_rs:
    path(x,y) if edge(x,y)
    path(x,y) if edge(x,z), path(z,y)
  def transRH():
    return infer(path, edge=RH, rules=trans_rs) + {(r,r): r in ROLES}
  def AuthorizedUsers(role):
    trans := transRH()
    return {u: u in USERS, r in ROLES | (u,r) in UR and (r,role) in trans}
)";

const char* kAllLocal = R"(  rules trans_rs:
    path(x,y) if edge(x,y)
    path(x,y) if edge(x,z), path(z,y)
    path(x,x) if role(x)
  def transRH():
    return infer(path, edge=RH, role=ROLES, rules=trans_rs)
  def AuthorizedUsers(role):
    trans := transRH()
    return {u: u in USERS, r in ROLES | (u,r) in UR and (r,role) in trans}
)";

const char* kNonLocal = R"(  rules trans_rs:
    transRH(x,y) if RH(x,y)
    transRH(x,y) if RH(x,z), transRH(z,y)
    transRH(x,x) if ROLES(x)
  def AuthorizedUsers(role):
    return {u: u in USERS, r in ROLES | (u,r) in UR and (r,role) in transRH}
)";

}  // namespace

const char* rbac_variant_name(RbacVariant v) {
  switch (v) {
    case RbacVariant::Union: return "union";
    case RbacVariant::AllLocal: return "allloc";
    case RbacVariant::NonLocal: return "nonloc";
  }
  return "?";
}

std::string rbac_classes(RbacVariant v) {
  std::string s = kCore;
  switch (v) {
    case RbacVariant::Union: return s + kUnion;
    case RbacVariant::AllLocal: return s + kAllLocal;
    case RbacVariant::NonLocal: return s + kNonLocal;
  }
  return s;
}

std::string rbac_driver() {
  return R"(h = new(HierRBAC, [])
for r in roles_in:
  h.AddRole(r)
for u in users_in:
  h.AddUser(u)
for (u, r) in ur_in:
  h.AssignUser(u, r)
for (a, d) in rh_in:
  h.AddInheritance(a, d)
answers = {}
step = 0
n = count(updates_in)
while step < n:
  if some (=step, kind, x, y, q) in updates_in | True:
    if kind is 'ur':
      h.AssignUser(x, y)
    else:
      h.AddInheritance(x, y)
    for u in h.AuthorizedUsers(q):
      answers.add((step, u))
  step := step + 1
)";
}

std::string tc_program(bool reversed) {
  std::string s = "rules trans_rs:\n  path(x,y) if edge(x,y)\n";
  s += reversed ? "  path(x,y) if path(x,z), edge(z,y)\n" : "  path(x,y) if edge(x,z), path(z,y)\n";
  return s + "result = count(path)\n";
}

}  // namespace alda::programs

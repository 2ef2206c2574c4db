#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>

#include "beac/abac.hpp"
#include "beac/dac.hpp"
#include "beac/record.hpp"

namespace beac {

struct RolePermission {
  Uid role = 0;
  DeviceTarget target;
  PermissionType permission = PermissionType::kList;
  Effect effect = Effect::kGrant;

  auto operator<=>(const RolePermission&) const = default;
};

// Roles of one domain with an optional lattice hierarchy. An edge
// (parent, child) means the parent role subsumes the child's permissions.
// A flat domain is simply one without edges.
class RoleRegistry {
 public:
  explicit RoleRegistry(Fingerprint domain) : domain_(domain) {}

  const Fingerprint& domain() const { return domain_; }
  Uid next_uid() const { return next_uid_; }

  bool is_live(Uid uid) const { return live_.count(uid) != 0; }
  bool is_nullified(Uid uid) const { return nullified_.count(uid) != 0; }
  const std::map<Uid, std::string>& live() const { return live_; }
  const std::set<Uid>& nullified() const { return nullified_; }
  const std::map<Uid, std::set<Fingerprint>>& members() const {
    return members_;
  }
  const std::set<RolePermission>& permissions() const { return permissions_; }
  const std::set<std::pair<Uid, Uid>>& hierarchy() const { return edges_; }

  // True when `to` is reachable from `from` along parent->child edges.
  bool reaches(Uid from, Uid to) const;

  bool operator==(const RoleRegistry&) const = default;

 private:
  friend void apply_rbac(RoleRegistry&, const Payload&);

  void require_live(Uid uid) const;

  Fingerprint domain_;
  Uid next_uid_ = 1;
  std::map<Uid, std::string> live_;
  std::set<Uid> nullified_;
  std::map<Uid, std::set<Fingerprint>> members_;
  std::set<RolePermission> permissions_;
  std::set<std::pair<Uid, Uid>> edges_;
};

// One RBAC record (a RoleBatch is applied through apply_rbac_batch).
// Throws kStaleUid, kDuplicateUid or kHierarchyCycle.
void apply_rbac(RoleRegistry& registry, const Payload& payload);

// All-or-nothing. On failure the registry is untouched and kBatchAbort is
// thrown with the index of the failing op.
void apply_rbac_batch(RoleRegistry& registry, std::span<const RoleOp> ops);

// Directly assigned roles plus every role reachable below them.
std::set<Uid> effective_roles(const RoleRegistry& registry,
                              const Fingerprint& user);

Decision check_access_rbac(const RoleRegistry& registry, const DeviceTree& tree,
                           const Fingerprint& user, const Fingerprint& device,
                           const std::optional<std::string>& service,
                           PermissionType permission);

}  // namespace beac

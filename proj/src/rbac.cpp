#include "beac/rbac.hpp"

#include <vector>

#include "beac/error.hpp"

namespace beac {

bool RoleRegistry::reaches(Uid from, Uid to) const {
  std::vector<Uid> stack{from};
  std::set<Uid> visited;
  while (!stack.empty()) {
    Uid cur = stack.back();
    stack.pop_back();
    if (cur == to) return true;
    if (!visited.insert(cur).second) continue;
    for (auto it = edges_.lower_bound({cur, 0});
         it != edges_.end() && it->first == cur; ++it) {
      stack.push_back(it->second);
    }
  }
  return false;
}

void RoleRegistry::require_live(Uid uid) const {
  if (live_.count(uid)) return;
  throw Error(ErrorCode::kStaleUid,
              "role uid " + std::to_string(uid) +
                  (nullified_.count(uid) ? " was nullified" : " was never issued"));
}

void apply_rbac(RoleRegistry& reg, const Payload& payload) {
  if (const auto* batch = std::get_if<RoleBatch>(&payload)) {
    if (batch->domain == reg.domain_) apply_rbac_batch(reg, batch->ops);
    return;
  }
  if (!is_rbac_kind(payload)) {
    throw Error(ErrorCode::kConsistency,
                std::string(kind_name(payload)) + " is not an RBAC record");
  }
  bool foreign = std::visit(
      [&](const auto& p) {
        if constexpr (requires { p.domain; }) return p.domain != reg.domain_;
        return false;
      },
      payload);
  if (foreign) return;

  if (const auto* p = std::get_if<NewRole>(&payload)) {
    if (reg.live_.count(p->uid)) {
      throw Error(ErrorCode::kDuplicateUid,
                  "role uid " + std::to_string(p->uid) + " is live");
    }
    if (p->uid < reg.next_uid_) {
      throw Error(ErrorCode::kStaleUid,
                  "role uid " + std::to_string(p->uid) +
                      " is below the issue counter " +
                      std::to_string(reg.next_uid_));
    }
    reg.live_.emplace(p->uid, p->name);
    reg.next_uid_ = p->uid + 1;
  } else if (const auto* p = std::get_if<DeleteRole>(&payload)) {
    reg.require_live(p->uid);
    reg.live_.erase(p->uid);
    reg.nullified_.insert(p->uid);
    reg.members_.erase(p->uid);
    std::erase_if(reg.permissions_,
                  [&](const RolePermission& rp) { return rp.role == p->uid; });
    std::erase_if(reg.edges_, [&](const std::pair<Uid, Uid>& e) {
      return e.first == p->uid || e.second == p->uid;
    });
  } else if (const auto* p = std::get_if<AssignRoleUser>(&payload)) {
    reg.require_live(p->uid);
    reg.members_[p->uid].insert(p->user);
  } else if (const auto* p = std::get_if<RemoveRoleUser>(&payload)) {
    reg.require_live(p->uid);
    if (auto it = reg.members_.find(p->uid); it != reg.members_.end()) {
      it->second.erase(p->user);
      if (it->second.empty()) reg.members_.erase(it);
    }
  } else if (const auto* p = std::get_if<AssignRolePermission>(&payload)) {
    reg.require_live(p->uid);
    reg.permissions_.insert(
        {p->uid, {p->device, p->service}, p->permission, p->effect});
  } else if (const auto* p = std::get_if<RevokeRolePermission>(&payload)) {
    reg.require_live(p->uid);
    for (auto effect : {Effect::kGrant, Effect::kDeny}) {
      reg.permissions_.erase(
          {p->uid, {p->device, p->service}, p->permission, effect});
    }
  } else if (const auto* p = std::get_if<AddRoleHierarchy>(&payload)) {
    reg.require_live(p->parent);
    reg.require_live(p->child);
    if (p->parent == p->child || reg.reaches(p->child, p->parent)) {
      throw Error(ErrorCode::kHierarchyCycle,
                  "edge " + std::to_string(p->parent) + "->" +
                      std::to_string(p->child) + " closes a cycle");
    }
    reg.edges_.emplace(p->parent, p->child);
  } else if (const auto* p = std::get_if<RemoveRoleHierarchy>(&payload)) {
    reg.require_live(p->parent);
    reg.require_live(p->child);
    reg.edges_.erase({p->parent, p->child});
  }
}

void apply_rbac_batch(RoleRegistry& registry, std::span<const RoleOp> ops) {
  RoleRegistry staged = registry;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    try {
      apply_rbac(staged, to_payload(ops[i]));
    } catch (const Error& e) {
      throw Error(ErrorCode::kBatchAbort,
                  "op " + std::to_string(i) + " failed: " + e.what(), i);
    }
  }
  registry = std::move(staged);
}

std::set<Uid> effective_roles(const RoleRegistry& registry,
                              const Fingerprint& user) {
  std::set<Uid> out;
  std::vector<Uid> stack;
  for (const auto& [role, users] : registry.members()) {
    if (users.count(user)) stack.push_back(role);
  }
  while (!stack.empty()) {
    Uid cur = stack.back();
    stack.pop_back();
    if (!out.insert(cur).second) continue;
    for (auto it = registry.hierarchy().lower_bound({cur, 0});
         it != registry.hierarchy().end() && it->first == cur; ++it) {
      stack.push_back(it->second);
    }
  }
  return out;
}

Decision check_access_rbac(const RoleRegistry& registry, const DeviceTree& tree,
                           const Fingerprint& user, const Fingerprint& device,
                           const std::optional<std::string>& service,
                           PermissionType permission) {
  const auto* node = tree.find(device);
  if (!node) {
    throw Error(ErrorCode::kUnknownDevice,
                "device " + device.label() + " is not registered");
  }
  if (user == node->owner && !user.is_special()) return Decision::kPermit;

  auto roles = effective_roles(registry, user);
  bool granted = false;
  for (const auto& rp : registry.permissions()) {
    if (rp.permission != permission || !roles.count(rp.role) ||
        rp.target.device != device) {
      continue;
    }
    // Device-level entries cover every service of the device.
    if (rp.target.service && rp.target.service != service) continue;
    if (rp.effect == Effect::kDeny) return Decision::kDeny;
    granted = true;
  }
  if (granted) return Decision::kPermit;
  return check_access_dac(tree, user, device, service, permission);
}

}  // namespace beac

#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "beac/record.hpp"
#include "beac/types.hpp"

namespace beac {

using AclEntry = std::pair<Fingerprint, PermissionType>;
using Acl = std::set<AclEntry>;

struct DeviceNode {
  Fingerprint device;
  Fingerprint owner;
  // Key of the parent in the known-id map: the domain owner for top-level
  // devices, otherwise the owning device.
  Fingerprint parent;
  std::map<std::string, Acl> services;
  Acl acl;
  std::set<Fingerprint> children;

  bool operator==(const DeviceNode&) const = default;
};

struct DomainRoot {
  Fingerprint domain;
  Fingerprint owner;
  AccessModel model = AccessModel::kDac;
  std::set<Fingerprint> children;

  bool operator==(const DomainRoot&) const = default;
};

// Domain-rooted tree of devices. The known-id map resolves the domain owner
// to the root and every registered device fingerprint to its node.
class DeviceTree {
 public:
  DeviceTree() = default;
  explicit DeviceTree(const DomainRegistration& genesis);

  bool has_root() const { return root_.has_value(); }
  const DomainRoot& root() const;

  bool is_known(const Fingerprint& id) const;
  const DeviceNode* find(const Fingerprint& device) const;
  const std::map<Fingerprint, DeviceNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  // Fingerprints released by revocation; informational only.
  const std::set<Fingerprint>& revoked() const { return revoked_; }

  // Structural primitives. Callers enforce authority; these enforce shape.
  void insert_leaf(const Fingerprint& device, const Fingerprint& owner,
                   const std::vector<std::string>& services);
  void remove_leaf(const Fingerprint& device);
  // Service ACL when a service is named, node ACL otherwise. Null if the
  // device or the named service does not exist.
  Acl* acl_for(const Fingerprint& device,
               const std::optional<std::string>& service);
  const Acl* acl_for(const Fingerprint& device,
                     const std::optional<std::string>& service) const;

  bool operator==(const DeviceTree&) const = default;

 private:
  std::optional<DomainRoot> root_;
  std::map<Fingerprint, DeviceNode> nodes_;
  std::set<Fingerprint> revoked_;
};

void handle_device_add(DeviceTree& tree, const Fingerprint& issuer,
                       const DeviceRegistration& reg);
void handle_device_del(DeviceTree& tree, const Fingerprint& issuer,
                       const DeviceRevocation& rev);
void handle_perm_add(DeviceTree& tree, const Fingerprint& issuer,
                     const PermissionGranted& grant);
void handle_perm_del(DeviceTree& tree, const Fingerprint& issuer,
                     const PermissionRevoked& revoke);

// Dispatches DAC record kinds to the handlers above; other kinds are
// ignored. Returns false when the record kind was not a DAC kind.
bool apply_dac(DeviceTree& tree, const SignedRecord& record);

// Replays a record stream: skips to the first DomainRegistration owned by
// activation_user, then applies every DAC record after it. Kinds outside
// the policy tables are reported through `warnings`.
DeviceTree build_device_tree(std::span<const SignedRecord> records,
                             const Fingerprint& activation_user,
                             std::vector<std::string>* warnings = nullptr);

// Owner always permitted; otherwise (user, p) or (everybody, p) must be in
// the service ACL when a service is named, the node ACL otherwise.
Decision check_access_dac(const DeviceTree& tree, const Fingerprint& user,
                          const Fingerprint& device,
                          const std::optional<std::string>& service,
                          PermissionType permission);

}  // namespace beac

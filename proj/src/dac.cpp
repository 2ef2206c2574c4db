#include "beac/dac.hpp"

#include "beac/error.hpp"

namespace beac {

DeviceTree::DeviceTree(const DomainRegistration& genesis)
    : root_(DomainRoot{genesis.domain, genesis.owner, genesis.model, {}}) {}

const DomainRoot& DeviceTree::root() const {
  if (!root_) throw Error(ErrorCode::kNoGenesis, "device tree has no root");
  return *root_;
}

bool DeviceTree::is_known(const Fingerprint& id) const {
  return (root_ && root_->owner == id) || nodes_.count(id) != 0;
}

const DeviceNode* DeviceTree::find(const Fingerprint& device) const {
  auto it = nodes_.find(device);
  return it == nodes_.end() ? nullptr : &it->second;
}

void DeviceTree::insert_leaf(const Fingerprint& device,
                             const Fingerprint& owner,
                             const std::vector<std::string>& services) {
  if (!root_) throw Error(ErrorCode::kNoGenesis, "insert before bootstrap");
  if (!is_known(owner)) {
    throw Error(ErrorCode::kConsistency, "owner " + owner.label() + " unknown");
  }
  if (nodes_.count(device) || device == root_->owner) {
    throw Error(ErrorCode::kImmutabilityViolation,
                "device " + device.label() + " is already registered");
  }
  DeviceNode node;
  node.device = device;
  node.owner = owner;
  node.parent = owner;
  for (const auto& name : services) {
    if (!node.services.emplace(name, Acl{}).second) {
      throw Error(ErrorCode::kConsistency,
                  "service name '" + name + "' declared twice");
    }
  }
  if (owner == root_->owner) {
    root_->children.insert(device);
  } else {
    nodes_.at(owner).children.insert(device);
  }
  nodes_.emplace(device, std::move(node));
  revoked_.erase(device);
}

void DeviceTree::remove_leaf(const Fingerprint& device) {
  auto it = nodes_.find(device);
  if (it == nodes_.end()) return;
  if (!it->second.children.empty()) {
    throw Error(ErrorCode::kConsistency,
                "device " + device.label() + " still owns " +
                    std::to_string(it->second.children.size()) +
                    " device(s); only leaves can be revoked");
  }
  if (it->second.parent == root_->owner) {
    root_->children.erase(device);
  } else {
    nodes_.at(it->second.parent).children.erase(device);
  }
  nodes_.erase(it);
  revoked_.insert(device);
}

Acl* DeviceTree::acl_for(const Fingerprint& device,
                         const std::optional<std::string>& service) {
  auto it = nodes_.find(device);
  if (it == nodes_.end()) return nullptr;
  if (!service) return &it->second.acl;
  auto svc = it->second.services.find(*service);
  return svc == it->second.services.end() ? nullptr : &svc->second;
}

const Acl* DeviceTree::acl_for(const Fingerprint& device,
                               const std::optional<std::string>& service) const {
  return const_cast<DeviceTree*>(this)->acl_for(device, service);
}

void handle_device_add(DeviceTree& tree, const Fingerprint& issuer,
                       const DeviceRegistration& reg) {
  if (tree.find(reg.device)) {
    throw Error(ErrorCode::kImmutabilityViolation,
                "device " + reg.device.label() + " is already registered");
  }
  if (!tree.is_known(reg.owner)) return;
  if (issuer != reg.owner && issuer != reg.device) {
    throw Error(ErrorCode::kUnauthorized,
                "registration of " + reg.device.label() + " signed by " +
                    issuer.label() + ", neither owner nor device");
  }
  if (reg.device.is_special()) {
    throw Error(ErrorCode::kConsistency, "reserved fingerprint as device");
  }
  tree.insert_leaf(reg.device, reg.owner, reg.services);
}

void handle_device_del(DeviceTree& tree, const Fingerprint& issuer,
                       const DeviceRevocation& rev) {
  const auto* node = tree.find(rev.device);
  if (!node) return;
  if (issuer != node->owner) {
    throw Error(ErrorCode::kUnauthorized,
                "only the owner may release " + rev.device.label());
  }
  tree.remove_leaf(rev.device);
}

namespace {

void require_chmod(const DeviceTree& tree, const Fingerprint& issuer,
                   const Fingerprint& device) {
  if (check_access_dac(tree, issuer, device, std::nullopt,
                       PermissionType::kChmod) != Decision::kPermit) {
    throw Error(ErrorCode::kUnauthorized,
                issuer.label() + " holds no CHMOD on " + device.label());
  }
}

}  // namespace

void handle_perm_add(DeviceTree& tree, const Fingerprint& issuer,
                     const PermissionGranted& grant) {
  if (!tree.find(grant.device)) return;
  require_chmod(tree, issuer, grant.device);
  if (auto* acl = tree.acl_for(grant.device, grant.service)) {
    acl->emplace(grant.user, grant.permission);
  }
}

void handle_perm_del(DeviceTree& tree, const Fingerprint& issuer,
                     const PermissionRevoked& revoke) {
  if (!tree.find(revoke.device)) return;
  require_chmod(tree, issuer, revoke.device);
  if (auto* acl = tree.acl_for(revoke.device, revoke.service)) {
    acl->erase({revoke.user, revoke.permission});
  }
}

bool apply_dac(DeviceTree& tree, const SignedRecord& record) {
  const auto& issuer = record.issuer;
  if (const auto* reg = std::get_if<DomainRegistration>(&record.payload)) {
    if (tree.has_root() && reg->domain == tree.root().domain) {
      throw Error(ErrorCode::kImmutabilityViolation,
                  "domain " + reg->domain.label() + " registered twice");
    }
    return true;
  }
  if (const auto* reg = std::get_if<DeviceRegistration>(&record.payload)) {
    handle_device_add(tree, issuer, *reg);
  } else if (const auto* rev = std::get_if<DeviceRevocation>(&record.payload)) {
    handle_device_del(tree, issuer, *rev);
  } else if (const auto* g = std::get_if<PermissionGranted>(&record.payload)) {
    handle_perm_add(tree, issuer, *g);
  } else if (const auto* r = std::get_if<PermissionRevoked>(&record.payload)) {
    handle_perm_del(tree, issuer, *r);
  } else {
    return false;
  }
  return true;
}

DeviceTree build_device_tree(std::span<const SignedRecord> records,
                             const Fingerprint& activation_user,
                             std::vector<std::string>* warnings) {
  auto it = records.begin();
  DeviceTree tree;
  for (; it != records.end(); ++it) {
    const auto* reg = std::get_if<DomainRegistration>(&it->payload);
    if (reg && reg->owner == activation_user) {
      tree = DeviceTree(*reg);
      ++it;
      break;
    }
  }
  if (!tree.has_root()) {
    throw Error(ErrorCode::kNoGenesis,
                "no domain registration owned by " + activation_user.label());
  }
  for (; it != records.end(); ++it) {
    if (apply_dac(tree, *it)) continue;
    if (std::holds_alternative<TokenCommit>(it->payload) && warnings) {
      warnings->push_back("ignored " + std::string(kind_name(it->payload)) +
                          " record " + to_hex(it->checksum).substr(0, 16));
    }
  }
  return tree;
}

Decision check_access_dac(const DeviceTree& tree, const Fingerprint& user,
                          const Fingerprint& device,
                          const std::optional<std::string>& service,
                          PermissionType permission) {
  const auto* node = tree.find(device);
  if (!node) {
    throw Error(ErrorCode::kUnknownDevice,
                "device " + device.label() + " is not registered");
  }
  if (user == node->owner && !user.is_special()) return Decision::kPermit;
  const auto* acl = tree.acl_for(device, service);
  if (!acl || user == kNobody) return Decision::kDeny;
  if (acl->count({user, permission}) || acl->count({kEverybody, permission})) {
    return Decision::kPermit;
  }
  return Decision::kDeny;
}

}  // namespace beac

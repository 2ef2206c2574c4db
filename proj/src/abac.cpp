#include "beac/abac.hpp"

#include "beac/error.hpp"

namespace beac {

std::set<Uid> AttributeRegistry::attributes_of(const Fingerprint& user) const {
  auto it = users_.find(user);
  return it == users_.end() ? std::set<Uid>{} : it->second;
}

std::set<Uid> AttributeRegistry::attributes_of(const DeviceTarget& target) const {
  std::set<Uid> out;
  if (auto it = devices_.find({target.device, std::nullopt}); it != devices_.end()) {
    out = it->second;
  }
  if (target.service) {
    if (auto it = devices_.find(target); it != devices_.end()) {
      out.insert(it->second.begin(), it->second.end());
    }
  }
  return out;
}

void AttributeRegistry::require_live(Uid uid) const {
  if (live_.count(uid)) return;
  throw Error(ErrorCode::kStaleUid,
              "attribute uid " + std::to_string(uid) +
                  (nullified_.count(uid) ? " was nullified" : " was never issued"));
}

void AttributeRegistry::purge(Uid uid) {
  for (auto it = users_.begin(); it != users_.end();) {
    it->second.erase(uid);
    it = it->second.empty() ? users_.erase(it) : std::next(it);
  }
  for (auto it = devices_.begin(); it != devices_.end();) {
    it->second.erase(uid);
    it = it->second.empty() ? devices_.erase(it) : std::next(it);
  }
  std::erase_if(tuples_, [uid](const AttributeTuple& t) {
    return t.user_attribute == uid || t.device_attribute == uid;
  });
}

namespace {

template <class Map, class Key>
void erase_from(Map& map, const Key& key, Uid uid) {
  auto it = map.find(key);
  if (it == map.end()) return;
  it->second.erase(uid);
  if (it->second.empty()) map.erase(it);
}

}  // namespace

void apply_abac(AttributeRegistry& reg, const Payload& payload) {
  if (!is_abac_kind(payload)) {
    throw Error(ErrorCode::kConsistency,
                std::string(kind_name(payload)) + " is not an ABAC record");
  }
  bool foreign = std::visit(
      [&](const auto& p) {
        if constexpr (requires { p.domain; }) return p.domain != reg.domain_;
        return false;
      },
      payload);
  if (foreign) return;

  if (const auto* p = std::get_if<NewAttribute>(&payload)) {
    if (reg.live_.count(p->uid)) {
      throw Error(ErrorCode::kDuplicateUid,
                  "attribute uid " + std::to_string(p->uid) + " is live");
    }
    if (p->uid < reg.next_uid_) {
      throw Error(ErrorCode::kStaleUid,
                  "attribute uid " + std::to_string(p->uid) +
                      " is below the issue counter " +
                      std::to_string(reg.next_uid_));
    }
    reg.live_.emplace(p->uid, p->name);
    reg.next_uid_ = p->uid + 1;
  } else if (const auto* p = std::get_if<DeleteAttribute>(&payload)) {
    reg.require_live(p->uid);
    reg.live_.erase(p->uid);
    reg.nullified_.insert(p->uid);
    reg.purge(p->uid);
  } else if (const auto* p = std::get_if<AssignAttributeDevice>(&payload)) {
    reg.require_live(p->uid);
    reg.devices_[{p->device, p->service}].insert(p->uid);
  } else if (const auto* p = std::get_if<RemoveAttributeDevice>(&payload)) {
    reg.require_live(p->uid);
    erase_from(reg.devices_, DeviceTarget{p->device, p->service}, p->uid);
  } else if (const auto* p = std::get_if<AssignAttributeUser>(&payload)) {
    reg.require_live(p->uid);
    reg.users_[p->user].insert(p->uid);
  } else if (const auto* p = std::get_if<RemoveAttributeUser>(&payload)) {
    reg.require_live(p->uid);
    erase_from(reg.users_, p->user, p->uid);
  } else if (const auto* p = std::get_if<AssignAttributePermission>(&payload)) {
    reg.require_live(p->user_attribute);
    reg.require_live(p->device_attribute);
    reg.tuples_.insert(
        {p->user_attribute, p->device_attribute, p->permission, p->effect});
  } else if (const auto* p = std::get_if<RevokeAttributePermission>(&payload)) {
    reg.require_live(p->user_attribute);
    reg.require_live(p->device_attribute);
    for (auto effect : {Effect::kGrant, Effect::kDeny}) {
      reg.tuples_.erase(
          {p->user_attribute, p->device_attribute, p->permission, effect});
    }
  }
}

Decision check_access_abac(const AttributeRegistry& registry,
                           const DeviceTree& tree, const Fingerprint& user,
                           const Fingerprint& device,
                           const std::optional<std::string>& service,
                           PermissionType permission) {
  const auto* node = tree.find(device);
  if (!node) {
    throw Error(ErrorCode::kUnknownDevice,
                "device " + device.label() + " is not registered");
  }
  if (user == node->owner && !user.is_special()) return Decision::kPermit;

  auto user_attrs = registry.attributes_of(user);
  auto device_attrs = registry.attributes_of(DeviceTarget{device, service});
  bool granted = false;
  for (const auto& t : registry.tuples()) {
    if (t.permission != permission || !user_attrs.count(t.user_attribute) ||
        !device_attrs.count(t.device_attribute)) {
      continue;
    }
    if (t.effect == Effect::kDeny) return Decision::kDeny;
    granted = true;
  }
  if (granted) return Decision::kPermit;
  return check_access_dac(tree, user, device, service, permission);
}

}  // namespace beac

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "beac/dac.hpp"
#include "beac/record.hpp"

namespace beac {

struct DeviceTarget {
  Fingerprint device;
  std::optional<std::string> service;

  auto operator<=>(const DeviceTarget&) const = default;
};

struct AttributeTuple {
  Uid user_attribute = 0;
  Uid device_attribute = 0;
  PermissionType permission = PermissionType::kList;
  Effect effect = Effect::kGrant;

  auto operator<=>(const AttributeTuple&) const = default;
};

// UID-keyed attribute metadata kept on the hub for one domain.
class AttributeRegistry {
 public:
  explicit AttributeRegistry(Fingerprint domain) : domain_(domain) {}

  const Fingerprint& domain() const { return domain_; }
  // Smallest UID a new attribute may take.
  Uid next_uid() const { return next_uid_; }

  bool is_live(Uid uid) const { return live_.count(uid) != 0; }
  bool is_nullified(Uid uid) const { return nullified_.count(uid) != 0; }
  const std::map<Uid, Bytes>& live() const { return live_; }
  const std::set<Uid>& nullified() const { return nullified_; }
  const std::map<Fingerprint, std::set<Uid>>& user_assignments() const {
    return users_;
  }
  const std::map<DeviceTarget, std::set<Uid>>& device_assignments() const {
    return devices_;
  }
  const std::set<AttributeTuple>& tuples() const { return tuples_; }

  std::set<Uid> attributes_of(const Fingerprint& user) const;
  // Attributes of the target; a device-level assignment also covers every
  // service on that device.
  std::set<Uid> attributes_of(const DeviceTarget& target) const;

  bool operator==(const AttributeRegistry&) const = default;

 private:
  friend void apply_abac(AttributeRegistry&, const Payload&);

  void require_live(Uid uid) const;
  void purge(Uid uid);

  Fingerprint domain_;
  Uid next_uid_ = 1;
  std::map<Uid, Bytes> live_;
  std::set<Uid> nullified_;
  std::map<Fingerprint, std::set<Uid>> users_;
  std::map<DeviceTarget, std::set<Uid>> devices_;
  std::set<AttributeTuple> tuples_;
};

// Applies one ABAC record. Throws kStaleUid for nullified or unknown UIDs,
// kDuplicateUid when a NewAttribute reuses a UID, kConsistency for records
// that are not ABAC kinds. Records for other domains are ignored.
void apply_abac(AttributeRegistry& registry, const Payload& payload);

// Owner: permit. Otherwise a matching DENY tuple wins over everything,
// then a GRANT tuple or the DAC decision permits.
Decision check_access_abac(const AttributeRegistry& registry,
                           const DeviceTree& tree, const Fingerprint& user,
                           const Fingerprint& device,
                           const std::optional<std::string>& service,
                           PermissionType permission);

}  // namespace beac

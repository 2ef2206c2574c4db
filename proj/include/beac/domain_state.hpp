#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beac/abac.hpp"
#include "beac/dac.hpp"
#include "beac/rbac.hpp"
#include "beac/record.hpp"

namespace beac {

// Policy state a hub holds for one domain: the device tree plus the
// registry of the domain's access-control model.
class DomainState {
 public:
  explicit DomainState(const DomainRegistration& genesis);

  const Fingerprint& domain() const { return tree_.root().domain; }
  const Fingerprint& owner() const { return tree_.root().owner; }
  AccessModel model() const { return tree_.root().model; }
  const DeviceTree& tree() const { return tree_; }
  const AttributeRegistry* attributes() const {
    return attributes_ ? &*attributes_ : nullptr;
  }
  const RoleRegistry* roles() const { return roles_ ? &*roles_ : nullptr; }

  // Applies a record with full validation: issuer authority, uniqueness,
  // leaf-only revocation, UID lifecycle, model match. Records that concern
  // other domains are no-ops. Throws beac::Error on a violation; the state
  // may be partially updated only for RoleBatch, which is atomic.
  void apply(const SignedRecord& record);

  Decision check_access(const Fingerprint& user, const Fingerprint& device,
                        const std::optional<std::string>& service,
                        PermissionType permission) const;

  bool operator==(const DomainState&) const = default;

 private:
  void require_domain_owner(const Fingerprint& issuer,
                            std::string_view kind) const;

  DeviceTree tree_;
  std::optional<AttributeRegistry> attributes_;
  std::optional<RoleRegistry> roles_;
};

// Genesis search for activation_user, then replay of everything after it.
DomainState replay_domain(std::span<const SignedRecord> records,
                          const Fingerprint& activation_user,
                          std::vector<std::string>* warnings = nullptr);

// All domains on a ledger, as the validators see them.
class WorldState {
 public:
  void apply(const SignedRecord& record);

  const std::map<Fingerprint, DomainState>& domains() const { return domains_; }
  const DomainState* domain(const Fingerprint& id) const;
  const DomainState* domain_of_device(const Fingerprint& device) const;
  const DomainState* domain_of_owner(const Fingerprint& owner) const;

  bool operator==(const WorldState&) const = default;

 private:
  DomainState* route(const Payload& payload);

  std::map<Fingerprint, DomainState> domains_;
};

WorldState replay_world(std::span<const SignedRecord> records);

// Canonical text rendering with stable ordering.
std::string render(const DeviceTree& tree);
std::string render(const DomainState& state);
std::string render(const WorldState& world);

}  // namespace beac

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "beac/codec.hpp"
#include "beac/crypto.hpp"
#include "beac/types.hpp"

namespace beac {

// Field list used by the canonical codec; order here is the wire order.
#define BEAC_FIELDS(Type, ...)                                  \
  auto tie() { return std::tie(__VA_ARGS__); }                  \
  auto tie() const { return std::tie(__VA_ARGS__); }            \
  bool operator==(const Type&) const = default;

// --- DAC -------------------------------------------------------------------

struct DomainRegistration {
  Fingerprint domain;
  Fingerprint owner;
  AccessModel model = AccessModel::kDac;
  BEAC_FIELDS(DomainRegistration, domain, owner, model)
};

struct DeviceRegistration {
  Fingerprint device;
  Fingerprint owner;
  std::vector<std::string> services;
  BEAC_FIELDS(DeviceRegistration, device, owner, services)
};

struct DeviceRevocation {
  Fingerprint device;
  BEAC_FIELDS(DeviceRevocation, device)
};

struct PermissionGranted {
  Fingerprint user;
  Fingerprint device;
  std::optional<std::string> service;
  PermissionType permission = PermissionType::kList;
  BEAC_FIELDS(PermissionGranted, user, device, service, permission)
};

struct PermissionRevoked {
  Fingerprint user;
  Fingerprint device;
  std::optional<std::string> service;
  PermissionType permission = PermissionType::kList;
  BEAC_FIELDS(PermissionRevoked, user, device, service, permission)
};

// --- ABAC ------------------------------------------------------------------

struct NewAttribute {
  Fingerprint domain;
  Bytes name;  // opaque, may be encrypted by the owner
  Uid uid = 0;
  BEAC_FIELDS(NewAttribute, domain, name, uid)
};

struct DeleteAttribute {
  Fingerprint domain;
  Uid uid = 0;
  BEAC_FIELDS(DeleteAttribute, domain, uid)
};

struct AssignAttributeDevice {
  Fingerprint domain;
  Uid uid = 0;
  Fingerprint device;
  std::optional<std::string> service;
  BEAC_FIELDS(AssignAttributeDevice, domain, uid, device, service)
};

struct RemoveAttributeDevice {
  Fingerprint domain;
  Uid uid = 0;
  Fingerprint device;
  std::optional<std::string> service;
  BEAC_FIELDS(RemoveAttributeDevice, domain, uid, device, service)
};

struct AssignAttributeUser {
  Fingerprint domain;
  Uid uid = 0;
  Fingerprint user;
  BEAC_FIELDS(AssignAttributeUser, domain, uid, user)
};

struct RemoveAttributeUser {
  Fingerprint domain;
  Uid uid = 0;
  Fingerprint user;
  BEAC_FIELDS(RemoveAttributeUser, domain, uid, user)
};

struct AssignAttributePermission {
  Fingerprint domain;
  Uid user_attribute = 0;
  Uid device_attribute = 0;
  PermissionType permission = PermissionType::kList;
  Effect effect = Effect::kGrant;
  BEAC_FIELDS(AssignAttributePermission, domain, user_attribute,
              device_attribute, permission, effect)
};

// Removes the matching tuple whatever its effect.
struct RevokeAttributePermission {
  Fingerprint domain;
  Uid user_attribute = 0;
  Uid device_attribute = 0;
  PermissionType permission = PermissionType::kList;
  BEAC_FIELDS(RevokeAttributePermission, domain, user_attribute,
              device_attribute, permission)
};

// --- RBAC ------------------------------------------------------------------

struct NewRole {
  Fingerprint domain;
  std::string name;
  Uid uid = 0;
  BEAC_FIELDS(NewRole, domain, name, uid)
};

struct DeleteRole {
  Fingerprint domain;
  Uid uid = 0;
  BEAC_FIELDS(DeleteRole, domain, uid)
};

struct AssignRoleUser {
  Fingerprint domain;
  Uid uid = 0;
  Fingerprint user;
  BEAC_FIELDS(AssignRoleUser, domain, uid, user)
};

struct RemoveRoleUser {
  Fingerprint domain;
  Uid uid = 0;
  Fingerprint user;
  BEAC_FIELDS(RemoveRoleUser, domain, uid, user)
};

struct AssignRolePermission {
  Fingerprint domain;
  Uid uid = 0;
  Fingerprint device;
  std::optional<std::string> service;
  PermissionType permission = PermissionType::kList;
  Effect effect = Effect::kGrant;
  BEAC_FIELDS(AssignRolePermission, domain, uid, device, service, permission,
              effect)
};

struct RevokeRolePermission {
  Fingerprint domain;
  Uid uid = 0;
  Fingerprint device;
  std::optional<std::string> service;
  PermissionType permission = PermissionType::kList;
  BEAC_FIELDS(RevokeRolePermission, domain, uid, device, service, permission)
};

struct AddRoleHierarchy {
  Fingerprint domain;
  Uid parent = 0;
  Uid child = 0;
  BEAC_FIELDS(AddRoleHierarchy, domain, parent, child)
};

struct RemoveRoleHierarchy {
  Fingerprint domain;
  Uid parent = 0;
  Uid child = 0;
  BEAC_FIELDS(RemoveRoleHierarchy, domain, parent, child)
};

using RoleOp = std::variant<NewRole, DeleteRole, AssignRoleUser, RemoveRoleUser,
                            AssignRolePermission, RevokeRolePermission,
                            AddRoleHierarchy, RemoveRoleHierarchy>;

// Applied all-or-nothing, so a sub-hierarchy can be detached and
// reattached without any reader seeing the intermediate state.
struct RoleBatch {
  Fingerprint domain;
  std::vector<RoleOp> ops;
  BEAC_FIELDS(RoleBatch, domain, ops)
};

// --- Tokens ----------------------------------------------------------------

// Only the digest of the token body goes on chain.
struct TokenCommit {
  Digest token_id{};
  BEAC_FIELDS(TokenCommit, token_id)
};

#undef BEAC_FIELDS

// Wire tag of each kind is its index here plus one. Append only.
using Payload = std::variant<
    DomainRegistration, DeviceRegistration, DeviceRevocation,
    PermissionGranted, PermissionRevoked, NewAttribute, DeleteAttribute,
    AssignAttributeDevice, RemoveAttributeDevice, AssignAttributeUser,
    RemoveAttributeUser, AssignAttributePermission, RevokeAttributePermission,
    NewRole, DeleteRole, AssignRoleUser, RemoveRoleUser, AssignRolePermission,
    RevokeRolePermission, AddRoleHierarchy, RemoveRoleHierarchy, RoleBatch,
    TokenCommit>;

std::string_view kind_name(const Payload& payload);
bool is_dac_kind(const Payload& payload);
bool is_abac_kind(const Payload& payload);
bool is_rbac_kind(const Payload& payload);

Payload to_payload(const RoleOp& op);
std::optional<RoleOp> as_role_op(const Payload& payload);

Bytes canonical_encode(const Payload& payload);
void encode_payload(ByteWriter& w, const Payload& payload);
Payload decode_payload(ByteReader& r);
Payload decode_payload(ByteView data);

struct SignedRecord {
  Payload payload;
  Fingerprint issuer;
  PublicKey issuer_key{};
  std::uint64_t timestamp_ms = 0;
  Digest checksum{};
  Signature signature{};

  bool operator==(const SignedRecord&) const = default;
};

// Bytes covered by the signature: encode(payload) | timestamp | checksum.
Bytes signing_message(const Payload& payload, std::uint64_t timestamp_ms,
                      const Digest& checksum);

SignedRecord sign_record(Payload payload, const Identity& issuer,
                         std::uint64_t timestamp_ms);

// Checks the fingerprint binds the embedded key, the checksum recomputes,
// and the signature verifies.
bool verify_record(const SignedRecord& record);
// Same, but against an externally supplied key.
bool verify_record(const SignedRecord& record, const PublicKey& key);

void encode_record(ByteWriter& w, const SignedRecord& record);
SignedRecord decode_record(ByteReader& r);

}  // namespace beac

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace beac {

enum class PermissionType : std::uint8_t {
  kList = 1,     // view device details and services
  kChmod = 2,    // grant or revoke access for others
  kExecute = 3,  // run a service or tunnel into one
};

enum class AccessModel : std::uint8_t { kDac = 1, kAbac = 2, kRbac = 3 };

enum class Effect : std::uint8_t { kGrant = 1, kDeny = 2 };

enum class Decision { kPermit, kDeny };

// Attribute and role identifiers. Issued monotonically per domain and never
// reused once nullified.
using Uid = std::uint64_t;

std::string_view to_string(PermissionType p);
std::string_view to_string(AccessModel m);
std::string_view to_string(Effect e);
std::string_view to_string(Decision d);

std::optional<PermissionType> parse_permission(std::string_view text);
std::optional<AccessModel> parse_access_model(std::string_view text);

}  // namespace beac

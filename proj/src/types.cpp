#include "beac/types.hpp"

namespace beac {

std::string_view to_string(PermissionType p) {
  switch (p) {
    case PermissionType::kList: return "LIST";
    case PermissionType::kChmod: return "CHMOD";
    case PermissionType::kExecute: return "EXECUTE";
  }
  return "?";
}

std::string_view to_string(AccessModel m) {
  switch (m) {
    case AccessModel::kDac: return "DAC";
    case AccessModel::kAbac: return "ABAC";
    case AccessModel::kRbac: return "RBAC";
  }
  return "?";
}

std::string_view to_string(Effect e) {
  return e == Effect::kDeny ? "DENY" : "GRANT";
}

std::string_view to_string(Decision d) {
  return d == Decision::kPermit ? "PERMIT" : "DENY";
}

std::optional<PermissionType> parse_permission(std::string_view text) {
  if (text == "LIST" || text == "list") return PermissionType::kList;
  if (text == "CHMOD" || text == "chmod") return PermissionType::kChmod;
  if (text == "EXECUTE" || text == "execute") return PermissionType::kExecute;
  return std::nullopt;
}

std::optional<AccessModel> parse_access_model(std::string_view text) {
  if (text == "DAC" || text == "dac") return AccessModel::kDac;
  if (text == "ABAC" || text == "abac") return AccessModel::kAbac;
  if (text == "RBAC" || text == "rbac") return AccessModel::kRbac;
  return std::nullopt;
}

}  // namespace beac

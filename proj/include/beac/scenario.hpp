#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "beac/netsim.hpp"
#include "beac/protocols.hpp"
#include "beac/types.hpp"
#include "beac/validator.hpp"

namespace beac {

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::uint32_t trials = 500;
  std::vector<PathKind> paths = {PathKind::kFull, PathKind::kShortcutInternet,
                                 PathKind::kShortcutLocal};
  LatencyModel latency;
  ClusterConfig cluster;
  double bucket_ms = 50;
  AccessModel model = AccessModel::kDac;
  Eligibility eligibility = Eligibility::kPermanentUser;
  PermissionType permission = PermissionType::kExecute;
  std::string home_subnet = "home";
  std::string remote_subnet = "remote";

  bool has_path(PathKind path) const;
};

// Format:
//   beac-scenario 1
//   key = value      one per line, '#' starts a comment
// Unknown keys and bad values throw kConfig as "<source>:<line>: ...".
ScenarioConfig parse_scenario(std::string_view text,
                              std::string_view source = "scenario");
ScenarioConfig load_scenario(const std::filesystem::path& path);
// Inverse of parse_scenario.
std::string format_scenario(const ScenarioConfig& config);
// Cross-field checks; throws kConfig.
void validate_scenario(const ScenarioConfig& config);

}  // namespace beac

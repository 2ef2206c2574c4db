#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "beac/domain_state.hpp"
#include "beac/ledger.hpp"
#include "beac/netsim.hpp"
#include "beac/token.hpp"
#include "beac/validator.hpp"

namespace beac {

// Everything a protocol run touches: committed chain and state, the
// validator cluster, network layout and the token stores of each hub.
class World {
 public:
  explicit World(ClusterConfig cluster = {}, std::uint64_t key_seed = 0);

  ValidatorCluster cluster;
  Ledger ledger;
  WorldState state;
  Topology topology;
  TokenClaims claims;
  bool validators_reachable = true;
  // TokenCommits of local grants made while validators were unreachable.
  std::vector<SignedRecord> deferred;
  std::uint64_t base_time_ms = 1'700'000'000'000;
  // Runs right before a shortcut's background validation. Tests use it to
  // race a policy change against a provisional grant.
  std::function<void(World&)> before_background_validation;

  // A hub's identity is also its domain id.
  void add_hub(const Identity& hub);
  const Identity& hub_identity(const Fingerprint& hub) const;
  TokenService& tokens(const Fingerprint& hub);

 private:
  std::uint64_t key_seed_;
  std::map<Fingerprint, Identity> hubs_;
  std::map<Fingerprint, std::unique_ptr<TokenService>> token_stores_;
};

// Validate, certify, append and apply. Throws kRejectedRecord (index and
// reason of the first rejected record) or kStallTimeout.
void commit_records(World& world, std::vector<SignedRecord> records);

enum class PathKind : std::uint8_t { kFull, kShortcutInternet, kShortcutLocal };
enum class Eligibility : std::uint8_t { kOwner, kPermanentUser, kGuest };
enum class Outcome : std::uint8_t {
  kGranted,
  kDenied,
  kRevokedAfterGrant,
  kTimeout,
};

std::string_view to_string(PathKind path);
std::string_view to_string(Eligibility eligibility);
std::string_view to_string(Outcome outcome);
std::optional<PathKind> parse_path(std::string_view text);
std::optional<Eligibility> parse_eligibility(std::string_view text);

struct AccessRequest {
  Fingerprint user;
  Fingerprint device;
  std::optional<std::string> service;
  PermissionType permission = PermissionType::kExecute;
  PathKind path = PathKind::kFull;
  Eligibility eligibility = Eligibility::kGuest;
  // Expiry of a guest token relative to the start of the run.
  std::uint64_t guest_lifetime_ms = 3'600'000;
};

struct TraceStep {
  std::string name;
  double start = 0;
  double end = 0;
  // Off-critical steps run in parallel and do not count towards the total.
  bool critical = true;

  double duration() const { return end - start; }
  bool operator==(const TraceStep&) const = default;
};

struct ProtocolTrace {
  PathKind path = PathKind::kFull;
  std::vector<TraceStep> steps;
  double total = 0;  // last critical end minus first critical start
  Outcome outcome = Outcome::kGranted;
  std::optional<Digest> token_id;
  bool ratification_deferred = false;
  std::string detail;
};

// Sequential: initiation, hub verification, consensus, token acquisition,
// service initiation. A hub DENY stops after two steps; a consensus stall
// ends in kTimeout.
ProtocolTrace run_full_path(const AccessRequest& request, World& world,
                            LatencySource& latency, EventLog* log = nullptr);

// Token issued provisionally while the p2p connection is being set up;
// validation runs in the background. Throws kEligibility for guests.
ProtocolTrace run_shortcut_internet(const AccessRequest& request, World& world,
                                    LatencySource& latency,
                                    EventLog* log = nullptr);

// Three local round trips. Works with validators unreachable, in which case
// ratification is deferred. Throws kEligibility or kTopology.
ProtocolTrace run_shortcut_local(const AccessRequest& request, World& world,
                                 LatencySource& latency,
                                 EventLog* log = nullptr);

ProtocolTrace run_access(const AccessRequest& request, World& world,
                         LatencySource& latency, EventLog* log = nullptr);

// Commits deferred TokenCommits once validators are reachable again.
// Rejected ones revoke their tokens. Returns the number ratified.
std::size_t ratify_deferred(World& world);

// A ready-made home domain: owner, hub, one camera with a "stream"
// service, a permanent user holding EXECUTE on it, and a guest without
// any grant. Hub and camera sit on `home_subnet`, users start on
// `remote_subnet`, validators on "cloud".
struct HomeSetup {
  AccessModel model = AccessModel::kDac;
  std::string home_subnet = "home";
  std::string remote_subnet = "remote";
};

struct HomeIds {
  Identity owner;
  Identity hub;
  Identity camera;
  Identity resident;
  Identity guest;
  std::string service = "stream";
};

HomeIds bootstrap_home(World& world, const HomeSetup& setup = {});

}  // namespace beac

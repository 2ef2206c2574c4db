#include "beac/protocols.hpp"

#include <algorithm>
#include <cctype>

#include "beac/error.hpp"

namespace beac {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
    return std::tolower(static_cast<unsigned char>(x)) ==
           std::tolower(static_cast<unsigned char>(y));
  });
}

// One message between two peers: local round trip inside a subnet,
// pub-sub over the internet otherwise.
double hop(const World& world, LatencySource& latency, const Fingerprint& a,
           const Fingerprint& b) {
  return latency.sample(world.topology.same_subnet(a, b) ? LatencyKind::kLoc
                                                         : LatencyKind::kInt);
}

class TraceBuilder {
 public:
  TraceBuilder(PathKind path, EventLog* log) : log_(log) { trace_.path = path; }

  void add(std::string name, double start, double end, bool critical = true) {
    if (log_) {
      log_->record(end, "step",
                   name + " " + format_ms(end - start) +
                       (critical ? "" : " parallel"));
    }
    trace_.steps.push_back({std::move(name), start, end, critical});
  }

  ProtocolTrace& trace() { return trace_; }

  ProtocolTrace finish(Outcome outcome) {
    trace_.outcome = outcome;
    double first = 0, last = 0;
    bool any = false;
    for (const auto& s : trace_.steps) {
      if (!s.critical) continue;
      first = any ? std::min(first, s.start) : s.start;
      last = any ? std::max(last, s.end) : s.end;
      any = true;
    }
    trace_.total = any ? last - first : 0;
    if (log_) {
      log_->record(last, "outcome",
                   std::string(to_string(outcome)) + " total " +
                       format_ms(trace_.total));
    }
    return std::move(trace_);
  }

 private:
  ProtocolTrace trace_;
  EventLog* log_;
};

const DomainState& domain_for(const World& world, const Fingerprint& device) {
  const auto* domain = world.state.domain_of_device(device);
  if (!domain) {
    throw Error(ErrorCode::kUnknownDevice,
                "device " + device.label() + " is not registered");
  }
  return *domain;
}

TokenRequest token_request(const AccessRequest& request, std::uint64_t now_ms,
                           bool provisional) {
  TokenRequest out;
  out.user = request.user;
  out.device = request.device;
  out.service = request.service;
  out.permission = request.permission;
  out.provisional = provisional;
  if (request.eligibility == Eligibility::kGuest) {
    out.kind = TokenKind::kExpiring;
    out.expiry_ms = now_ms + request.guest_lifetime_ms;
  } else {
    out.kind = TokenKind::kPermanent;
  }
  return out;
}

void require_shortcut_eligible(const AccessRequest& request) {
  if (request.eligibility == Eligibility::kGuest) {
    throw Error(ErrorCode::kEligibility,
                "shortcut access is for owners and permanent users; " +
                    request.user.label() + " must use the full path");
  }
}

std::uint64_t stamp(const World& world, double t) {
  return world.base_time_ms + static_cast<std::uint64_t>(t);
}

// Submits a provisional grant to the validators in the background. The
// verdict lands as a clock event; a rejection revokes the token.
void background_validate(World& world, TraceBuilder& builder, SimClock& clock,
                         LatencySource& latency, const SignedRecord& record,
                         const Digest& token_id, const Fingerprint& hub,
                         bool& rejected) {
  double start = clock.now();
  if (!world.validators_reachable || !world.cluster.can_commit()) {
    world.deferred.push_back(record);
    builder.trace().ratification_deferred = true;
    return;
  }
  double submit = latency.sample(LatencyKind::kInt);
  auto result = world.cluster.commit(latency);
  double verdict_at = start + submit + result.latency_ms;
  builder.add("background_validation", start, verdict_at, false);
  clock.schedule(verdict_at, [&world, &builder, &rejected, record, token_id,
                              hub, certificate = result.certificate] {
    if (world.before_background_validation) {
      world.before_background_validation(world);
    }
    SignedRecord copy = record;
    auto verdicts = validate_records(world.cluster, world.ledger, world.state,
                                     {&copy, 1}, &world.claims);
    auto& tokens = world.tokens(hub);
    if (!verdicts[0].accept) {
      tokens.revoke(token_id);
      rejected = true;
      builder.trace().detail = verdicts[0].reason;
      return;
    }
    world.ledger.append_block({copy}, certificate);
    world.state.apply(copy);
    tokens.ratify(token_id);
  });
}

}  // namespace

World::World(ClusterConfig cluster_config, std::uint64_t key_seed)
    : cluster(std::move(cluster_config)),
      ledger(cluster.ledger_config()),
      key_seed_(key_seed) {}

void World::add_hub(const Identity& hub) {
  hubs_.insert_or_assign(hub.fingerprint(), hub);
  if (!token_stores_.count(hub.fingerprint())) {
    auto seed = splitmix64(key_seed_ ^ splitmix64(token_stores_.size() + 1));
    token_stores_.emplace(
        hub.fingerprint(),
        std::make_unique<TokenService>(hub.fingerprint(), seed));
  }
}

const Identity& World::hub_identity(const Fingerprint& hub) const {
  auto it = hubs_.find(hub);
  if (it == hubs_.end()) {
    throw Error(ErrorCode::kConfig, "no hub " + hub.label());
  }
  return it->second;
}

TokenService& World::tokens(const Fingerprint& hub) {
  auto it = token_stores_.find(hub);
  if (it == token_stores_.end()) {
    throw Error(ErrorCode::kConfig, "no hub " + hub.label());
  }
  return *it->second;
}

void commit_records(World& world, std::vector<SignedRecord> records) {
  auto verdicts = validate_records(world.cluster, world.ledger, world.state,
                                   records, &world.claims);
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    if (!verdicts[i].accept) {
      throw Error(ErrorCode::kRejectedRecord,
                  "record " + std::to_string(i) + " (" +
                      std::string(kind_name(records[i].payload)) +
                      ") rejected: " + verdicts[i].reason,
                  i);
    }
  }
  auto certificate = world.cluster.certify();
  const auto& block = world.ledger.append_block(std::move(records), certificate);
  for (const auto& record : block.records) world.state.apply(record);
}

std::string_view to_string(PathKind path) {
  switch (path) {
    case PathKind::kFull: return "full";
    case PathKind::kShortcutInternet: return "internet";
    case PathKind::kShortcutLocal: return "local";
  }
  return "?";
}

std::string_view to_string(Eligibility eligibility) {
  switch (eligibility) {
    case Eligibility::kOwner: return "owner";
    case Eligibility::kPermanentUser: return "permanent";
    case Eligibility::kGuest: return "guest";
  }
  return "?";
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kGranted: return "GRANTED";
    case Outcome::kDenied: return "DENIED";
    case Outcome::kRevokedAfterGrant: return "REVOKED_AFTER_GRANT";
    case Outcome::kTimeout: return "TIMEOUT";
  }
  return "?";
}

std::optional<PathKind> parse_path(std::string_view text) {
  for (auto p : {PathKind::kFull, PathKind::kShortcutInternet,
                 PathKind::kShortcutLocal}) {
    if (iequals(text, to_string(p))) return p;
  }
  return std::nullopt;
}

std::optional<Eligibility> parse_eligibility(std::string_view text) {
  for (auto e : {Eligibility::kOwner, Eligibility::kPermanentUser,
                 Eligibility::kGuest}) {
    if (iequals(text, to_string(e))) return e;
  }
  return std::nullopt;
}

ProtocolTrace run_full_path(const AccessRequest& request, World& world,
                            LatencySource& latency, EventLog* log) {
  TraceBuilder builder(PathKind::kFull, log);
  SimClock clock;
  auto advance = [&](std::string name, double duration) {
    double start = clock.now();
    clock.run_until(start + duration);
    builder.add(std::move(name), start, clock.now());
  };

  const auto& domain = domain_for(world, request.device);
  auto hub = domain.domain();

  advance("initiation", hop(world, latency, request.user, hub));
  auto decision = domain.check_access(request.user, request.device,
                                      request.service, request.permission);
  advance("hub_verification", latency.sample(LatencyKind::kInt));
  if (decision == Decision::kDeny) {
    builder.trace().detail = "policy denies the request at the hub";
    return builder.finish(Outcome::kDenied);
  }

  auto& tokens = world.tokens(hub);
  auto now_ms = stamp(world, clock.now());
  auto [token, key] =
      tokens.issue(decision, token_request(request, now_ms, false), now_ms);
  builder.trace().token_id = token.id;
  world.claims[token.id] = token;
  auto record =
      sign_record(TokenCommit{token.id}, world.hub_identity(hub), now_ms);

  if (!world.validators_reachable || !world.cluster.can_commit()) {
    advance("consensus", world.cluster.config().stall_timeout_ms);
    tokens.revoke(token.id);
    builder.trace().detail = "validators could not reach quorum";
    return builder.finish(Outcome::kTimeout);
  }
  auto verdicts = validate_records(world.cluster, world.ledger, world.state,
                                   {&record, 1}, &world.claims);
  auto result = world.cluster.commit(latency);
  advance("consensus", result.latency_ms);
  if (!verdicts[0].accept) {
    tokens.revoke(token.id);
    builder.trace().detail = verdicts[0].reason;
    return builder.finish(Outcome::kDenied);
  }
  world.ledger.append_block({record}, result.certificate);
  world.state.apply(record);
  tokens.ratify(token.id);

  advance("token_acquisition", hop(world, latency, hub, request.user));

  double start = clock.now();
  double key_delivery = hop(world, latency, hub, request.device);
  auto connection = connect_p2p(world.topology, clock, latency, request.user,
                                request.device);
  double setup = connection.established_at - start;
  clock.run_until(start + key_delivery + setup);
  builder.add("service_initiation", start, clock.now());
  if (connection.relayed) builder.trace().detail = "relayed connection";

  try {
    tokens.redeem(token.id, key.key, stamp(world, clock.now()));
  } catch (const Error& e) {
    builder.trace().detail = e.what();
    return builder.finish(Outcome::kDenied);
  }
  return builder.finish(Outcome::kGranted);
}

ProtocolTrace run_shortcut_internet(const AccessRequest& request, World& world,
                                    LatencySource& latency, EventLog* log) {
  require_shortcut_eligible(request);
  TraceBuilder builder(PathKind::kShortcutInternet, log);
  SimClock clock;

  const auto& domain = domain_for(world, request.device);
  auto hub = domain.domain();

  // Request publication and p2p set-up start together.
  double request_at = hop(world, latency, request.user, hub);
  auto connection = connect_p2p(world.topology, clock, latency, request.user,
                                request.device);
  builder.add("request_publication", 0, request_at);
  clock.run_until(request_at);

  auto decision = domain.check_access(request.user, request.device,
                                      request.service, request.permission);
  if (decision == Decision::kDeny) {
    builder.add("p2p_connection", 0, connection.established_at, false);
    builder.add("refusal", request_at,
                request_at + hop(world, latency, hub, request.user));
    builder.trace().detail = "policy denies the request at the hub";
    return builder.finish(Outcome::kDenied);
  }
  builder.add("p2p_connection", 0, connection.established_at);

  auto& tokens = world.tokens(hub);
  auto now_ms = stamp(world, request_at);
  auto [token, key] =
      tokens.issue(decision, token_request(request, now_ms, true), now_ms);
  builder.trace().token_id = token.id;
  world.claims[token.id] = token;
  auto record =
      sign_record(TokenCommit{token.id}, world.hub_identity(hub), now_ms);

  double token_at = request_at + hop(world, latency, hub, request.user);
  builder.add("token_delivery", request_at, token_at);
  double key_at = request_at + hop(world, latency, hub, request.device);
  builder.add("session_key_delivery", request_at, key_at, false);

  bool redeemed = false;
  bool rejected = false;
  double redeem_at = std::max(token_at, connection.established_at);
  clock.schedule(redeem_at, [&, token_id = token.id, session = key.key] {
    try {
      tokens.redeem(token_id, session, stamp(world, redeem_at));
      redeemed = true;
    } catch (const Error& e) {
      builder.trace().detail = e.what();
    }
  });
  background_validate(world, builder, clock, latency, record, token.id, hub,
                      rejected);
  clock.run();

  if (rejected) return builder.finish(Outcome::kRevokedAfterGrant);
  return builder.finish(redeemed ? Outcome::kGranted : Outcome::kDenied);
}

ProtocolTrace run_shortcut_local(const AccessRequest& request, World& world,
                                 LatencySource& latency, EventLog* log) {
  require_shortcut_eligible(request);
  const auto& domain = domain_for(world, request.device);
  auto hub = domain.domain();
  const auto& topo = world.topology;
  if (!topo.same_subnet(request.user, request.device) ||
      !topo.same_subnet(request.user, hub)) {
    throw Error(ErrorCode::kTopology,
                "local shortcut needs user, hub and device on one subnet");
  }

  TraceBuilder builder(PathKind::kShortcutLocal, log);
  SimClock clock;
  double request_at = hop(world, latency, request.user, hub);
  builder.add("token_request", 0, request_at);
  clock.run_until(request_at);

  auto decision = domain.check_access(request.user, request.device,
                                      request.service, request.permission);
  if (decision == Decision::kDeny) {
    builder.add("refusal", request_at,
                request_at + hop(world, latency, hub, request.user));
    builder.trace().detail = "policy denies the request at the hub";
    return builder.finish(Outcome::kDenied);
  }

  auto& tokens = world.tokens(hub);
  auto now_ms = stamp(world, request_at);
  auto [token, key] =
      tokens.issue(decision, token_request(request, now_ms, true), now_ms);
  builder.trace().token_id = token.id;
  world.claims[token.id] = token;
  auto record =
      sign_record(TokenCommit{token.id}, world.hub_identity(hub), now_ms);

  double token_at = request_at + hop(world, latency, hub, request.user);
  builder.add("token_delivery", request_at, token_at);
  builder.add("session_key_delivery", request_at,
              request_at + hop(world, latency, hub, request.device), false);
  clock.run_until(token_at);
  auto connection = connect_p2p(topo, clock, latency, request.user,
                                request.device);
  builder.add("service_access", token_at, connection.established_at);

  bool redeemed = false;
  bool rejected = false;
  clock.schedule(connection.established_at,
                 [&, token_id = token.id, session = key.key] {
                   try {
                     tokens.redeem(token_id, session,
                                   stamp(world, connection.established_at));
                     redeemed = true;
                   } catch (const Error& e) {
                     builder.trace().detail = e.what();
                   }
                 });
  background_validate(world, builder, clock, latency, record, token.id, hub,
                      rejected);
  clock.run();

  if (rejected) return builder.finish(Outcome::kRevokedAfterGrant);
  return builder.finish(redeemed ? Outcome::kGranted : Outcome::kDenied);
}

ProtocolTrace run_access(const AccessRequest& request, World& world,
                         LatencySource& latency, EventLog* log) {
  switch (request.path) {
    case PathKind::kFull: return run_full_path(request, world, latency, log);
    case PathKind::kShortcutInternet:
      return run_shortcut_internet(request, world, latency, log);
    case PathKind::kShortcutLocal:
      return run_shortcut_local(request, world, latency, log);
  }
  throw Error(ErrorCode::kConfig, "unknown path");
}

std::size_t ratify_deferred(World& world) {
  if (world.deferred.empty() || !world.validators_reachable ||
      !world.cluster.can_commit()) {
    return 0;
  }
  auto pending = std::move(world.deferred);
  world.deferred.clear();
  auto verdicts = validate_records(world.cluster, world.ledger, world.state,
                                   pending, &world.claims);
  std::vector<SignedRecord> accepted;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const auto& id = std::get<TokenCommit>(pending[i].payload).token_id;
    auto& tokens = world.tokens(pending[i].issuer);
    if (verdicts[i].accept) {
      accepted.push_back(pending[i]);
      tokens.ratify(id);
    } else {
      tokens.revoke(id);
    }
  }
  if (accepted.empty()) return 0;
  auto count = accepted.size();
  const auto& block =
      world.ledger.append_block(std::move(accepted), world.cluster.certify());
  for (const auto& record : block.records) world.state.apply(record);
  return count;
}

HomeIds bootstrap_home(World& world, const HomeSetup& setup) {
  HomeIds ids{Identity::from_seed("home-owner"), Identity::from_seed("home-hub"),
              Identity::from_seed("home-camera"),
              Identity::from_seed("home-resident"),
              Identity::from_seed("home-guest")};
  auto domain = ids.hub.fingerprint();
  auto owner = ids.owner.fingerprint();
  auto camera = ids.camera.fingerprint();
  auto resident = ids.resident.fingerprint();
  world.add_hub(ids.hub);

  auto& topo = world.topology;
  topo.add_peer({owner, "owner", setup.remote_subnet, PeerRole::kUser});
  topo.add_peer({domain, "hub", setup.home_subnet, PeerRole::kHub});
  topo.add_peer({camera, "camera", setup.home_subnet, PeerRole::kDevice});
  topo.add_peer({resident, "resident", setup.remote_subnet, PeerRole::kUser});
  topo.add_peer({ids.guest.fingerprint(), "guest", setup.remote_subnet,
                 PeerRole::kUser});
  for (std::size_t i = 0; i < world.cluster.validators().size(); ++i) {
    topo.add_peer({world.cluster.validators()[i].fingerprint(),
                   "validator-" + std::to_string(i), "cloud",
                   PeerRole::kValidator});
  }
  topo.set_firewalled(setup.home_subnet, true);
  topo.attach_device(camera, domain);
  topo.subscribe("hub/" + domain.hex(), domain);

  std::uint64_t t = world.base_time_ms - 60'000;
  std::vector<SignedRecord> records;
  auto add = [&](Payload p) { records.push_back(sign_record(p, ids.owner, t++)); };
  add(DomainRegistration{domain, owner, setup.model});
  add(DeviceRegistration{camera, owner, {ids.service}});
  switch (setup.model) {
    case AccessModel::kDac:
      add(PermissionGranted{resident, camera, ids.service,
                            PermissionType::kExecute});
      break;
    case AccessModel::kAbac:
      add(NewAttribute{domain, Bytes{'r', 'e', 's', 'i', 'd', 'e', 'n', 't'}, 1});
      add(NewAttribute{domain, Bytes{'c', 'a', 'm', 'e', 'r', 'a'}, 2});
      add(AssignAttributeUser{domain, 1, resident});
      add(AssignAttributeDevice{domain, 2, camera, ids.service});
      add(AssignAttributePermission{domain, 1, 2, PermissionType::kExecute,
                                    Effect::kGrant});
      break;
    case AccessModel::kRbac:
      add(NewRole{domain, "resident", 1});
      add(AssignRoleUser{domain, 1, resident});
      add(AssignRolePermission{domain, 1, camera, ids.service,
                               PermissionType::kExecute, Effect::kGrant});
      break;
  }
  commit_records(world, std::move(records));
  return ids;
}

}  // namespace beac

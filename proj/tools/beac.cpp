#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <regex>

#include "beac/bench.hpp"
#include "beac/domain_state.hpp"
#include "beac/ledger.hpp"
#include "beac/protocols.hpp"
#include "beac/scenario.hpp"
#include "beac/token.hpp"

using namespace beac;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("BEAC_SEED");
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  auto value = std::strtoull(raw, &end, 10);
  if (*end != '\0') throw Error(ErrorCode::kConfig, "BEAC_SEED must be an integer");
  return value;
}

// A 64-digit hex fingerprint, "nobody"/"everybody", or an identity seed label.
Fingerprint party(const std::string& text) {
  static const std::regex hex("[0-9a-fA-F]{64}");
  if (std::regex_match(text, hex) || text == "nobody" || text == "everybody") {
    return Fingerprint::from_hex(text);
  }
  return Identity::from_seed(text).fingerprint();
}

Digest digest_arg(const std::string& text) {
  auto raw = from_hex(text);
  if (raw.size() != kDigestSize) throw Error(ErrorCode::kParse, "token id must be 32 bytes of hex");
  Digest d{};
  std::copy(raw.begin(), raw.end(), d.begin());
  return d;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kConfig, "cannot write " + path);
  out << text;
}

Ledger load_verified(const std::string& path) {
  auto ledger = load(path);
  auto report = verify_chain(ledger);
  if (!report.ok) {
    std::string why;
    for (const auto& p : report.problems) why += "\n  " + p;
    throw Error(ErrorCode::kIntegrity, path + " fails verification:" + why);
  }
  return ledger;
}

// --- token store ------------------------------------------------------------

std::optional<TokenStatus> parse_status(std::string_view text) {
  for (auto s : {TokenStatus::kPending, TokenStatus::kRatified,
                 TokenStatus::kRevoked, TokenStatus::kConsumed}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

json token_json(const AccessToken& t, const SessionKey& key) {
  return {{"id", to_hex(t.id)},
          {"user", t.user.hex()},
          {"device", t.device.hex()},
          {"service", t.service ? json(*t.service) : json(nullptr)},
          {"permission", std::string(to_string(t.permission))},
          {"kind", std::string(to_string(t.kind))},
          {"expiry_ms", t.expiry_ms},
          {"hub", t.hub.hex()},
          {"issued_ms", t.issued_ms},
          {"serial", t.serial},
          {"status", std::string(to_string(t.status))},
          {"provisional", t.provisional},
          {"key", to_hex(key.key)}};
}

std::pair<AccessToken, SessionKey> token_from_json(const json& j) {
  AccessToken t;
  t.id = digest_arg(j.at("id").get<std::string>());
  t.user = Fingerprint::from_hex(j.at("user").get<std::string>());
  t.device = Fingerprint::from_hex(j.at("device").get<std::string>());
  if (!j.at("service").is_null()) t.service = j.at("service").get<std::string>();
  auto perm = parse_permission(j.at("permission").get<std::string>());
  auto kind = parse_token_kind(j.at("kind").get<std::string>());
  auto status = parse_status(j.at("status").get<std::string>());
  if (!perm || !kind || !status) throw Error(ErrorCode::kParse, "bad enum in token store");
  t.permission = *perm;
  t.kind = *kind;
  t.status = *status;
  t.expiry_ms = j.at("expiry_ms").get<std::uint64_t>();
  t.hub = Fingerprint::from_hex(j.at("hub").get<std::string>());
  t.issued_ms = j.at("issued_ms").get<std::uint64_t>();
  t.serial = j.at("serial").get<std::uint64_t>();
  t.provisional = j.at("provisional").get<bool>();
  return {t, SessionKey{from_hex(j.at("key").get<std::string>()), t.id}};
}

class TokenStore {
 public:
  TokenStore(std::string path, const Fingerprint& hub, std::optional<std::uint64_t> seed)
      : path_(std::move(path)) {
    json doc = json::object();
    if (std::ifstream in(path_); in) {
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, path_ + ": " + e.what());
      }
    }
    std::size_t stored = doc.contains("tokens") ? doc["tokens"].size() : 0;
    std::optional<std::uint64_t> key_seed;
    if (seed) key_seed = splitmix64(*seed + stored);
    service_ = std::make_unique<TokenService>(hub, key_seed);
    if (doc.contains("hub") && Fingerprint::from_hex(doc["hub"].get<std::string>()) != hub) {
      throw Error(ErrorCode::kConsistency, path_ + " belongs to another hub");
    }
    try {
      for (const auto& t : doc.value("tokens", json::array())) {
        auto [token, key] = token_from_json(t);
        service_->restore(token, key);
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, path_ + ": " + e.what());
    }
  }

  TokenService& service() { return *service_; }

  void save() const {
    json tokens = json::array();
    for (const auto& [id, entry] : service_->snapshot()) {
      tokens.push_back(token_json(entry.first, entry.second));
    }
    json doc = {{"hub", service_->hub().hex()}, {"tokens", tokens}};
    write_text(path_, doc.dump(2) + "\n");
  }

 private:
  std::string path_;
  std::unique_ptr<TokenService> service_;
};

void print_token(const AccessToken& t) {
  std::cout << "token " << to_hex(t.id) << "\n"
            << "  user " << t.user.hex() << "\n"
            << "  device " << t.device.hex();
  if (t.service) std::cout << " service " << *t.service;
  std::cout << "\n  permission " << to_string(t.permission) << " kind "
            << to_string(t.kind);
  if (t.kind == TokenKind::kExpiring) std::cout << " expiry_ms " << t.expiry_ms;
  std::cout << "\n  status " << to_string(t.status)
            << (t.provisional ? " provisional" : "") << "\n";
}

std::uint64_t now_or_clock(std::optional<std::uint64_t> now_ms) {
  if (now_ms) return *now_ms;
  using namespace std::chrono;
  return static_cast<std::uint64_t>(
      duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count());
}

// --- commands ---------------------------------------------------------------

struct RunArgs {
  std::string scenario;
  std::string trace;
  std::optional<std::uint64_t> seed;
};

bool sets_seed(const std::string& text) {
  static const std::regex line(R"((^|\n)[ \t]*seed[ \t]*=)");
  return std::regex_search(text, line);
}

int cmd_run(const RunArgs& a) {
  std::ifstream in(a.scenario, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read " + a.scenario);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto config = parse_scenario(text, a.scenario);
  if (a.seed) {
    config.seed = *a.seed;
  } else if (!sets_seed(text)) {
    if (auto env = env_seed()) config.seed = *env;
  }
  auto run = run_scenario(config);
  if (!a.trace.empty()) write_text(a.trace, trace_jsonl(run.records));
  std::cout << format_report(run.report);
  return kOk;
}

int cmd_chain_verify(const std::string& path) {
  auto ledger = load(path);
  auto report = verify_chain(ledger);
  if (!report.ok) {
    std::cout << "FAIL " << path << "\n";
    for (const auto& p : report.problems) std::cout << "  " << p << "\n";
    return kDomainError;
  }
  std::cout << "OK " << path << " blocks " << ledger.height() << " records "
            << ledger.record_count() << " head " << to_hex(ledger.head_digest())
            << "\n";
  return kOk;
}

int cmd_chain_dump(const std::string& path) {
  std::cout << dump(load(path));
  return kOk;
}

int cmd_chain_replay(const std::string& path, const std::string& activation) {
  auto ledger = load_verified(path);
  auto records = ledger.records();
  if (activation.empty()) {
    std::cout << render(replay_world(records));
    return kOk;
  }
  std::vector<std::string> warnings;
  auto state = replay_domain(records, party(activation), &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << render(state);
  return kOk;
}

int cmd_chain_demo(const std::string& path, const std::string& model_name) {
  auto model = parse_access_model(model_name);
  if (!model) throw Error(ErrorCode::kConfig, "model is dac, abac or rbac");
  World world(ClusterConfig{}, env_seed().value_or(1));
  auto ids = bootstrap_home(world, {*model});
  persist(world.ledger, path);
  std::cout << "wrote " << path << " blocks " << world.ledger.height() << "\n"
            << "  owner home-owner " << ids.owner.fingerprint().hex() << "\n"
            << "  hub home-hub " << ids.hub.fingerprint().hex() << "\n"
            << "  device home-camera " << ids.camera.fingerprint().hex()
            << " service " << ids.service << "\n"
            << "  user home-resident " << ids.resident.fingerprint().hex() << "\n"
            << "  user home-guest " << ids.guest.fingerprint().hex() << "\n";
  return kOk;
}

struct IssueArgs {
  std::string store;
  std::string chain;
  std::string hub;
  std::string user;
  std::string device;
  std::string service;
  std::string permission = "execute";
  std::string kind = "single_use";
  std::uint64_t lifetime_ms = 0;
  std::optional<std::uint64_t> now_ms;
  bool provisional = false;
  bool ratify = false;
};

int cmd_token_issue(const IssueArgs& a) {
  auto permission = parse_permission(a.permission);
  auto kind = parse_token_kind(a.kind);
  if (!permission) throw Error(ErrorCode::kConfig, "permission is list, chmod or execute");
  if (!kind) throw Error(ErrorCode::kConfig, "kind is single_use, expiring or permanent");

  auto world = replay_world(load_verified(a.chain).records());
  TokenRequest req;
  req.user = party(a.user);
  req.device = party(a.device);
  if (!a.service.empty()) req.service = a.service;
  req.permission = *permission;
  req.kind = *kind;
  req.provisional = a.provisional;
  auto now = now_or_clock(a.now_ms);
  if (*kind == TokenKind::kExpiring) req.expiry_ms = now + a.lifetime_ms;

  const auto* domain = world.domain_of_device(req.device);
  if (!domain) throw Error(ErrorCode::kUnknownDevice, "device " + req.device.label() + " is not on the chain");
  auto decision = domain->check_access(req.user, req.device, req.service, req.permission);

  TokenStore store(a.store, party(a.hub), env_seed());
  auto [token, key] = store.service().issue(decision, req, now);
  if (a.ratify) store.service().ratify(token.id);
  store.save();
  print_token(*store.service().find(token.id));
  std::cout << "  session_key " << to_hex(key.key) << "\n";
  return kOk;
}

int cmd_token_status(const std::string& store_path, const std::string& hub,
                     const std::string& id, const std::string& action) {
  TokenStore store(store_path, party(hub), std::nullopt);
  auto digest = digest_arg(id);
  if (action == "ratify") store.service().ratify(digest);
  if (action == "revoke" && !store.service().revoke(digest)) {
    if (!store.service().find(digest)) {
      throw Error(ErrorCode::kUnknownToken, "no token " + id);
    }
  }
  auto token = store.service().find(digest);
  if (!token) throw Error(ErrorCode::kUnknownToken, "no token " + id);
  store.save();
  print_token(*token);
  return kOk;
}

int cmd_token_redeem(const std::string& store_path, const std::string& hub,
                     const std::string& id, const std::string& key,
                     std::optional<std::uint64_t> now_ms) {
  TokenStore store(store_path, party(hub), std::nullopt);
  auto token = store.service().redeem(digest_arg(id), from_hex(key), now_or_clock(now_ms));
  store.save();
  std::cout << "redeemed\n";
  print_token(token);
  return kOk;
}

struct TotpArgs {
  std::string secret;
  std::optional<std::uint64_t> now_ms;
  std::uint32_t step = 30;
  std::uint32_t digits = 6;
};

int cmd_token_totp(const TotpArgs& a) {
  if (a.step == 0 || a.digits == 0 || a.digits > 9) {
    throw Error(ErrorCode::kConfig, "TOTP needs step >= 1 s and 1..9 digits");
  }
  auto now = now_or_clock(a.now_ms);
  std::cout << totp(from_hex(a.secret), now, a.step, a.digits) << " step "
            << totp_step(now, a.step) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"beac: ledger-embedded access control toolkit"};
  app.require_subcommand(1);
  std::function<int()> action;

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a latency scenario and print the percentile report");
  run_cmd->add_option("scenario", run.scenario, "Scenario file")->required();
  run_cmd->add_option("--trace", run.trace, "Write the per-trial trace (JSON lines)");
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->callback([&] { action = [&] { return cmd_run(run); }; });

  auto* chain = app.add_subcommand("chain", "Inspect ledger files");
  chain->require_subcommand(1);
  std::string chain_path, activation, demo_model = "dac";
  auto* verify = chain->add_subcommand("verify", "Check signatures, certificates and links");
  verify->add_option("path", chain_path)->required();
  verify->callback([&] { action = [&] { return cmd_chain_verify(chain_path); }; });
  auto* dump_cmd = chain->add_subcommand("dump", "Print every block and record");
  dump_cmd->add_option("path", chain_path)->required();
  dump_cmd->callback([&] { action = [&] { return cmd_chain_dump(chain_path); }; });
  auto* replay = chain->add_subcommand("replay", "Verify, then print the reconstructed policy state");
  replay->add_option("path", chain_path)->required();
  replay->add_option("--activation", activation,
                     "Replay only the domain activated by this user");
  replay->callback([&] { action = [&] { return cmd_chain_replay(chain_path, activation); }; });
  auto* demo = chain->add_subcommand("demo", "Write a sample home ledger");
  demo->add_option("path", chain_path)->required();
  demo->add_option("--model", demo_model, "dac, abac or rbac");
  demo->callback([&] { action = [&] { return cmd_chain_demo(chain_path, demo_model); }; });

  auto* state = app.add_subcommand("state", "Reconstructed policy state");
  state->require_subcommand(1);
  auto* state_dump = state->add_subcommand("dump", "Same as chain replay");
  state_dump->add_option("path", chain_path)->required();
  state_dump->add_option("--activation", activation);
  state_dump->callback([&] { action = [&] { return cmd_chain_replay(chain_path, activation); }; });

  auto* token = app.add_subcommand("token", "Access tokens and guest passphrases");
  token->require_subcommand(1);
  IssueArgs issue;
  auto* issue_cmd = token->add_subcommand("issue", "Decide against a ledger and issue a token");
  issue_cmd->add_option("--store", issue.store, "Token store (JSON)")->required();
  issue_cmd->add_option("--chain", issue.chain, "Ledger file")->required();
  issue_cmd->add_option("--hub", issue.hub, "Issuing hub")->required();
  issue_cmd->add_option("--user", issue.user)->required();
  issue_cmd->add_option("--device", issue.device)->required();
  issue_cmd->add_option("--service", issue.service);
  issue_cmd->add_option("--permission", issue.permission);
  issue_cmd->add_option("--kind", issue.kind, "single_use, expiring or permanent");
  issue_cmd->add_option("--lifetime-ms", issue.lifetime_ms, "Lifetime of an expiring token");
  issue_cmd->add_option("--now-ms", issue.now_ms);
  issue_cmd->add_flag("--provisional", issue.provisional);
  issue_cmd->add_flag("--ratify", issue.ratify, "Mark ratified immediately");
  issue_cmd->callback([&] { action = [&] { return cmd_token_issue(issue); }; });

  std::string store_path, hub, id, key;
  std::optional<std::uint64_t> now_ms;
  for (const char* name : {"ratify", "revoke"}) {
    auto* cmd = token->add_subcommand(name, std::string(name) == "ratify"
                                                ? "Mark a pending token ratified"
                                                : "Revoke a token");
    cmd->add_option("--store", store_path)->required();
    cmd->add_option("--hub", hub)->required();
    cmd->add_option("id", id)->required();
    std::string verb = name;
    cmd->callback([&, verb] {
      action = [&, verb] { return cmd_token_status(store_path, hub, id, verb); };
    });
  }
  auto* redeem = token->add_subcommand("redeem", "Redeem a token with its session key");
  redeem->add_option("--store", store_path)->required();
  redeem->add_option("--hub", hub)->required();
  redeem->add_option("id", id)->required();
  redeem->add_option("key", key)->required();
  redeem->add_option("--now-ms", now_ms);
  redeem->callback([&] {
    action = [&] { return cmd_token_redeem(store_path, hub, id, key, now_ms); };
  });

  TotpArgs totp_args;
  auto* totp_cmd = token->add_subcommand("totp", "Print the guest passphrase for a time");
  totp_cmd->add_option("--secret", totp_args.secret, "Shared secret (hex)")->required();
  totp_cmd->add_option("--now-ms", totp_args.now_ms);
  totp_cmd->add_option("--step", totp_args.step);
  totp_cmd->add_option("--digits", totp_args.digits);
  totp_cmd->callback([&] { action = [&] { return cmd_token_totp(totp_args); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainError;
  }
}

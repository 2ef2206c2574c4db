#include "beac/validator.hpp"

namespace beac {
namespace {

Verdict reject(ErrorCode code, std::string reason) {
  return Verdict{false, code, std::move(reason)};
}

Verdict check_token_commit(const WorldState& state, const SignedRecord& record,
                           const TokenCommit& commit,
                           const TokenClaims* claims) {
  if (!claims) return reject(ErrorCode::kUnknownToken, "no token claims");
  auto it = claims->find(commit.token_id);
  if (it == claims->end()) {
    return reject(ErrorCode::kUnknownToken, "token body not presented");
  }
  const auto& token = it->second;
  if (token_digest(token) != commit.token_id) {
    return reject(ErrorCode::kIntegrity, "token body does not hash to its id");
  }
  const auto* domain = state.domain_of_device(token.device);
  if (!domain) {
    return reject(ErrorCode::kUnknownDevice,
                  "device " + token.device.label() + " is not registered");
  }
  if (record.issuer != domain->domain() || token.hub != record.issuer) {
    return reject(ErrorCode::kUnauthorized,
                  "token committed by " + record.issuer.label() +
                      ", not the device's hub");
  }
  if (domain->check_access(token.user, token.device, token.service,
                           token.permission) != Decision::kPermit) {
    return reject(ErrorCode::kPolicyDenied,
                  "committed policy denies " +
                      std::string(to_string(token.permission)) + " to " +
                      token.user.label());
  }
  return {};
}

}  // namespace

std::string_view to_string(ConsensusMode mode) {
  return mode == ConsensusMode::kOptimal ? "optimal" : "worst";
}

ValidatorCluster::ValidatorCluster(ClusterConfig config)
    : config_(std::move(config)) {
  if (config_.f == 0) {
    throw Error(ErrorCode::kConfig, "validator cluster needs f >= 1");
  }
  for (std::uint32_t i = 0; i < n(); ++i) {
    validators_.push_back(
        Identity::from_seed("validator-" + std::to_string(i)));
  }
  set_faulty(config_.faulty);
}

void ValidatorCluster::set_faulty(std::set<std::uint32_t> faulty) {
  for (auto index : faulty) {
    if (index >= n()) {
      throw Error(ErrorCode::kConfig,
                  "faulty validator index " + std::to_string(index) +
                      " out of range for n = " + std::to_string(n()));
    }
  }
  config_.faulty = std::move(faulty);
}

std::vector<Fingerprint> ValidatorCluster::fingerprints() const {
  std::vector<Fingerprint> out;
  for (const auto& v : validators_) out.push_back(v.fingerprint());
  return out;
}

std::vector<Fingerprint> ValidatorCluster::honest() const {
  std::vector<Fingerprint> out;
  for (std::uint32_t i = 0; i < n(); ++i) {
    if (!config_.faulty.count(i)) out.push_back(validators_[i].fingerprint());
  }
  return out;
}

std::uint32_t ValidatorCluster::consensus_intervals() const {
  return config_.mode == ConsensusMode::kOptimal ? 5 : config_.rounds + 4;
}

LedgerConfig ValidatorCluster::ledger_config() const {
  return LedgerConfig{quorum(), fingerprints()};
}

std::vector<Fingerprint> ValidatorCluster::certify() const {
  auto voters = honest();
  if (voters.size() < quorum()) {
    throw Error(ErrorCode::kStallTimeout,
                std::to_string(voters.size()) + " honest validators, quorum " +
                    std::to_string(quorum()) + "; gave up after " +
                    format_ms(config_.stall_timeout_ms) + " ms");
  }
  return voters;
}

CommitResult ValidatorCluster::commit(LatencySource& latency) const {
  CommitResult result;
  result.certificate = certify();
  for (std::uint32_t i = 0; i < consensus_intervals(); ++i) {
    result.latency_ms += latency.sample(LatencyKind::kInt);
  }
  return result;
}

std::vector<Verdict> validate_records(const ValidatorCluster& cluster,
                                      const Ledger& ledger,
                                      const WorldState& state,
                                      std::span<const SignedRecord> records,
                                      const TokenClaims* claims) {
  std::vector<Verdict> out;
  out.reserve(records.size());
  WorldState scratch = state;
  std::set<Digest> batch;
  for (const auto& record : records) {
    if (!verify_record(record)) {
      out.push_back(reject(ErrorCode::kRejectedRecord,
                           "signature or checksum does not verify"));
      continue;
    }
    if (ledger.contains(record.checksum) ||
        !batch.insert(record.checksum).second) {
      out.push_back(reject(ErrorCode::kDuplicateRecord,
                           "checksum already submitted"));
      continue;
    }
    if (const auto* reg = std::get_if<DomainRegistration>(&record.payload);
        reg && reg->owner == kNobody &&
        !cluster.config().consortium.count(record.issuer)) {
      out.push_back(reject(ErrorCode::kUnauthorized,
                           "unowned domains are registered by consortium "
                           "members only"));
      continue;
    }
    if (const auto* commit = std::get_if<TokenCommit>(&record.payload)) {
      out.push_back(check_token_commit(scratch, record, *commit, claims));
      continue;
    }
    try {
      WorldState next = scratch;
      next.apply(record);
      scratch = std::move(next);
      out.push_back({});
    } catch (const Error& e) {
      out.push_back(reject(e.code(), e.what()));
    }
  }
  return out;
}

}  // namespace beac

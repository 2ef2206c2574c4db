#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "beac/domain_state.hpp"
#include "beac/error.hpp"
#include "beac/ledger.hpp"
#include "beac/netsim.hpp"
#include "beac/token.hpp"

namespace beac {

enum class ConsensusMode : std::uint8_t { kOptimal, kWorst };
std::string_view to_string(ConsensusMode mode);

struct ClusterConfig {
  std::uint32_t f = 1;  // n = 3f + 1
  // Indices of validators that withhold their vote.
  std::set<std::uint32_t> faulty;
  ConsensusMode mode = ConsensusMode::kOptimal;
  std::uint32_t rounds = 4;  // R of the worst-case bound
  double stall_timeout_ms = 10000;
  // Members allowed to register domains without a device owner.
  std::set<Fingerprint> consortium;
};

struct CommitResult {
  std::vector<Fingerprint> certificate;
  double latency_ms = 0;
};

class ValidatorCluster {
 public:
  explicit ValidatorCluster(ClusterConfig config = {});

  const ClusterConfig& config() const { return config_; }
  std::uint32_t n() const { return 3 * config_.f + 1; }
  std::uint32_t f() const { return config_.f; }
  std::uint32_t quorum() const { return 2 * config_.f + 1; }
  const std::vector<Identity>& validators() const { return validators_; }
  std::vector<Fingerprint> fingerprints() const;
  std::vector<Fingerprint> honest() const;
  bool can_commit() const { return honest().size() >= quorum(); }

  void set_faulty(std::set<std::uint32_t> faulty);
  // Interval count of one commit: 5 optimal, R + 4 worst case.
  std::uint32_t consensus_intervals() const;

  LedgerConfig ledger_config() const;

  // Certificate of the honest voters. Throws kStallTimeout when they cannot
  // reach the quorum.
  std::vector<Fingerprint> certify() const;

  // Honest validators vote; latency is the sum of consensus_intervals()
  // T_int draws. Throws kStallTimeout when honest votes cannot reach the
  // quorum.
  CommitResult commit(LatencySource& latency) const;

 private:
  ClusterConfig config_;
  std::vector<Identity> validators_;
};

struct Verdict {
  bool accept = true;
  std::optional<ErrorCode> code;
  std::string reason;
};

// Off-chain token bodies indexed by id, so a TokenCommit can be checked
// against the policy that justified it.
using TokenClaims = std::map<Digest, AccessToken>;

// One verdict per record, evaluated in order against a scratch copy of the
// committed state so later records see earlier accepted ones.
std::vector<Verdict> validate_records(const ValidatorCluster& cluster,
                                      const Ledger& ledger,
                                      const WorldState& state,
                                      std::span<const SignedRecord> records,
                                      const TokenClaims* claims = nullptr);

}  // namespace beac

#include "beac/error.hpp"

namespace beac {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kSigningCapability: return "signing-capability";
    case ErrorCode::kRejectedRecord: return "rejected-record";
    case ErrorCode::kDuplicateRecord: return "duplicate-record";
    case ErrorCode::kQuorum: return "quorum";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIntegrity: return "integrity";
    case ErrorCode::kNoGenesis: return "no-genesis";
    case ErrorCode::kImmutabilityViolation: return "immutability-violation";
    case ErrorCode::kConsistency: return "consistency";
    case ErrorCode::kUnauthorized: return "unauthorized";
    case ErrorCode::kUnknownDevice: return "unknown-device";
    case ErrorCode::kUnknownDomain: return "unknown-domain";
    case ErrorCode::kModelMismatch: return "model-mismatch";
    case ErrorCode::kStaleUid: return "stale-uid";
    case ErrorCode::kDuplicateUid: return "duplicate-uid";
    case ErrorCode::kHierarchyCycle: return "hierarchy-cycle";
    case ErrorCode::kBatchAbort: return "batch-abort";
    case ErrorCode::kPolicyDenied: return "policy-denied";
    case ErrorCode::kExpired: return "expired";
    case ErrorCode::kReplay: return "replay";
    case ErrorCode::kPairing: return "pairing";
    case ErrorCode::kRevoked: return "revoked";
    case ErrorCode::kNotRatified: return "not-ratified";
    case ErrorCode::kUnknownToken: return "unknown-token";
    case ErrorCode::kExhausted: return "exhausted";
    case ErrorCode::kPassphraseMismatch: return "passphrase-mismatch";
    case ErrorCode::kStallTimeout: return "stall-timeout";
    case ErrorCode::kEligibility: return "eligibility";
    case ErrorCode::kTopology: return "topology";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      index_(index) {}

}  // namespace beac

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace beac {

enum class ErrorCode {
  kSigningCapability,
  kRejectedRecord,
  kDuplicateRecord,
  kQuorum,
  kParse,
  kIntegrity,
  kNoGenesis,
  kImmutabilityViolation,
  kConsistency,
  kUnauthorized,
  kUnknownDevice,
  kUnknownDomain,
  kModelMismatch,
  kStaleUid,
  kDuplicateUid,
  kHierarchyCycle,
  kBatchAbort,
  kPolicyDenied,
  kExpired,
  kReplay,
  kPairing,
  kRevoked,
  kNotRatified,
  kUnknownToken,
  kExhausted,
  kPassphraseMismatch,
  kStallTimeout,
  kEligibility,
  kTopology,
  kConfig,
};

std::string_view to_string(ErrorCode code) noexcept;

// All domain failures surface as this type; the code is the stable part,
// the message is diagnostic text only.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  // Position of the offending element (record in a block, op in a batch).
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace beac

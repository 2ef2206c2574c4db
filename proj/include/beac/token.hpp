#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "beac/crypto.hpp"
#include "beac/record.hpp"
#include "beac/types.hpp"

namespace beac {

enum class TokenKind : std::uint8_t { kSingleUse = 1, kExpiring = 2, kPermanent = 3 };
enum class TokenStatus : std::uint8_t {
  kPending = 1,
  kRatified = 2,
  kRevoked = 3,
  kConsumed = 4,
};

std::string_view to_string(TokenKind kind);
std::string_view to_string(TokenStatus status);
std::optional<TokenKind> parse_token_kind(std::string_view text);

struct AccessToken {
  Digest id{};
  Fingerprint user;
  Fingerprint device;
  std::optional<std::string> service;
  PermissionType permission = PermissionType::kExecute;
  TokenKind kind = TokenKind::kSingleUse;
  std::uint64_t expiry_ms = 0;  // meaningful for kExpiring only
  Fingerprint hub;
  std::uint64_t issued_ms = 0;
  std::uint64_t serial = 0;
  TokenStatus status = TokenStatus::kPending;
  // Shortcut grants may be redeemed before validators ratify them.
  bool provisional = false;

  bool operator==(const AccessToken&) const = default;
};

// Digest over the immutable body (everything except status).
Digest token_digest(const AccessToken& token);
Bytes encode_token_body(const AccessToken& token);

struct SessionKey {
  Bytes key;
  Digest token_id{};

  bool operator==(const SessionKey&) const = default;
};

struct TokenRequest {
  Fingerprint user;
  Fingerprint device;
  std::optional<std::string> service;
  PermissionType permission = PermissionType::kExecute;
  TokenKind kind = TokenKind::kSingleUse;
  std::uint64_t expiry_ms = 0;
  bool provisional = false;
};

// Token store of one hub. Status transitions are serialized by an internal
// mutex, so concurrent redeem calls on one token are linearizable.
class TokenService {
 public:
  // With a seed, session keys come from a deterministic stream.
  explicit TokenService(Fingerprint hub,
                        std::optional<std::uint64_t> key_seed = std::nullopt);

  TokenService(const TokenService&) = delete;
  TokenService& operator=(const TokenService&) = delete;

  const Fingerprint& hub() const { return hub_; }

  // Throws kPolicyDenied unless the decision is kPermit. The token starts
  // kPending.
  std::pair<AccessToken, SessionKey> issue(Decision decision,
                                           const TokenRequest& request,
                                           std::uint64_t now_ms);

  // kPending -> kRatified. Ratifying a consumed provisional token is a no-op.
  void ratify(const Digest& id);
  // kPending or kRatified -> kRevoked. Returns false if already terminal.
  bool revoke(const Digest& id);

  // Refusals: kUnknownToken, kPairing, kRevoked, kReplay, kNotRatified,
  // kExpired. A single-use token moves to kConsumed on success.
  AccessToken redeem(const Digest& id, ByteView session_key,
                     std::uint64_t now_ms);

  std::optional<AccessToken> find(const Digest& id) const;
  std::size_t size() const;

  // Loads a token previously exported (e.g. by the CLI token store).
  void restore(const AccessToken& token, const SessionKey& key);
  std::map<Digest, std::pair<AccessToken, SessionKey>> snapshot() const;

 private:
  Bytes next_key();

  Fingerprint hub_;
  std::optional<std::uint64_t> key_seed_;
  std::uint64_t key_counter_ = 0;
  std::uint64_t serial_ = 0;
  mutable std::mutex mu_;
  std::map<Digest, std::pair<AccessToken, SessionKey>> tokens_;
};

// --- One-time guest access ------------------------------------------------

struct TotpConfig {
  Bytes secret;
  std::uint32_t step_seconds = 30;
  std::uint32_t digits = 6;
  std::uint32_t tolerance = 1;  // steps either side of the current one
  std::uint32_t visits = 1;
};

std::uint64_t totp_step(std::uint64_t now_ms, std::uint32_t step_seconds);
// HOTP value for one counter, zero padded to `digits`.
std::string hotp(ByteView secret, std::uint64_t counter, std::uint32_t digits);
std::string totp(ByteView secret, std::uint64_t now_ms,
                 std::uint32_t step_seconds, std::uint32_t digits);

struct GuestAccess {
  AccessToken token;
  Bytes sealed_key;  // session key sealed under the passphrase
  Bytes salt;
};

// A hub-side one-time grant for a guest. Each successful redemption spends
// one visit and yields a single-use token.
class TotpGrant {
 public:
  TotpGrant(TotpConfig config, TokenRequest target);

  const TotpConfig& config() const { return config_; }
  std::uint32_t remaining_visits() const { return remaining_; }
  std::optional<std::uint64_t> issued_step() const { return issued_step_; }

  // Throws kExhausted when no visits remain.
  std::string issue(std::uint64_t now_ms);

  // Throws kExhausted, kExpired (passphrase belongs to a step outside the
  // window) or kPassphraseMismatch.
  GuestAccess redeem(std::string_view passphrase, std::uint64_t now_ms,
                     TokenService& tokens);

 private:
  TotpConfig config_;
  TokenRequest target_;
  std::uint32_t remaining_;
  std::optional<std::uint64_t> issued_step_;
};

std::optional<Bytes> open_guest_key(const GuestAccess& access,
                                    std::string_view passphrase);

}  // namespace beac

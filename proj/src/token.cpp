#include "beac/token.hpp"

#include <openssl/crypto.h>

#include <algorithm>
#include <cctype>

#include "beac/codec.hpp"
#include "beac/error.hpp"

namespace beac {
namespace {

constexpr std::size_t kSessionKeySize = 32;

std::string short_id(const Digest& id) { return to_hex(id).substr(0, 16); }

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::kSingleUse: return "SINGLE_USE";
    case TokenKind::kExpiring: return "EXPIRING";
    case TokenKind::kPermanent: return "PERMANENT";
  }
  return "?";
}

std::string_view to_string(TokenStatus status) {
  switch (status) {
    case TokenStatus::kPending: return "PENDING";
    case TokenStatus::kRatified: return "RATIFIED";
    case TokenStatus::kRevoked: return "REVOKED";
    case TokenStatus::kConsumed: return "CONSUMED";
  }
  return "?";
}

std::optional<TokenKind> parse_token_kind(std::string_view text) {
  for (auto kind :
       {TokenKind::kSingleUse, TokenKind::kExpiring, TokenKind::kPermanent}) {
    auto name = to_string(kind);
    if (std::equal(text.begin(), text.end(), name.begin(), name.end(),
                   [](char a, char b) { return std::toupper(a) == b; })) {
      return kind;
    }
  }
  return std::nullopt;
}

Bytes encode_token_body(const AccessToken& token) {
  ByteWriter w;
  w.raw(token.user.bytes);
  w.raw(token.device.bytes);
  w.u8(token.service ? 1 : 0);
  if (token.service) w.string(*token.service);
  w.u8(static_cast<std::uint8_t>(token.permission));
  w.u8(static_cast<std::uint8_t>(token.kind));
  w.u64(token.expiry_ms);
  w.raw(token.hub.bytes);
  w.u64(token.issued_ms);
  w.u64(token.serial);
  w.u8(token.provisional ? 1 : 0);
  return std::move(w).take();
}

Digest token_digest(const AccessToken& token) {
  return sha256(encode_token_body(token));
}

TokenService::TokenService(Fingerprint hub,
                           std::optional<std::uint64_t> key_seed)
    : hub_(hub), key_seed_(key_seed) {}

Bytes TokenService::next_key() {
  if (!key_seed_) return random_bytes(kSessionKeySize);
  ByteWriter w;
  w.string("beac-session-key");
  w.u64(*key_seed_);
  w.u64(key_counter_++);
  auto digest = sha256(w.data());
  return Bytes(digest.begin(), digest.end());
}

std::pair<AccessToken, SessionKey> TokenService::issue(
    Decision decision, const TokenRequest& request, std::uint64_t now_ms) {
  if (decision != Decision::kPermit) {
    throw Error(ErrorCode::kPolicyDenied,
                "policy denies " + std::string(to_string(request.permission)) +
                    " on " + request.device.label() + " for " +
                    request.user.label());
  }
  std::lock_guard lock(mu_);
  AccessToken token;
  token.user = request.user;
  token.device = request.device;
  token.service = request.service;
  token.permission = request.permission;
  token.kind = request.kind;
  token.expiry_ms = request.kind == TokenKind::kExpiring ? request.expiry_ms : 0;
  token.hub = hub_;
  token.issued_ms = now_ms;
  token.serial = serial_++;
  token.provisional = request.provisional;
  token.id = token_digest(token);

  SessionKey key{next_key(), token.id};
  tokens_.emplace(token.id, std::make_pair(token, key));
  return {token, key};
}

void TokenService::ratify(const Digest& id) {
  std::lock_guard lock(mu_);
  auto it = tokens_.find(id);
  if (it == tokens_.end()) {
    throw Error(ErrorCode::kUnknownToken, "no token " + short_id(id));
  }
  auto& token = it->second.first;
  switch (token.status) {
    case TokenStatus::kPending: token.status = TokenStatus::kRatified; break;
    case TokenStatus::kRatified:
    case TokenStatus::kConsumed: break;
    case TokenStatus::kRevoked:
      throw Error(ErrorCode::kRevoked,
                  "token " + short_id(id) + " was revoked before ratification");
  }
}

bool TokenService::revoke(const Digest& id) {
  std::lock_guard lock(mu_);
  auto it = tokens_.find(id);
  if (it == tokens_.end()) {
    throw Error(ErrorCode::kUnknownToken, "no token " + short_id(id));
  }
  auto& token = it->second.first;
  if (token.status == TokenStatus::kPending ||
      token.status == TokenStatus::kRatified) {
    token.status = TokenStatus::kRevoked;
    return true;
  }
  return false;
}

AccessToken TokenService::redeem(const Digest& id, ByteView session_key,
                                 std::uint64_t now_ms) {
  std::lock_guard lock(mu_);
  auto it = tokens_.find(id);
  if (it == tokens_.end()) {
    throw Error(ErrorCode::kUnknownToken, "no token " + short_id(id));
  }
  auto& [token, key] = it->second;
  if (session_key.size() != key.key.size() ||
      CRYPTO_memcmp(session_key.data(), key.key.data(), key.key.size()) != 0) {
    throw Error(ErrorCode::kPairing,
                "session key does not match token " + short_id(id));
  }
  switch (token.status) {
    case TokenStatus::kRevoked:
      throw Error(ErrorCode::kRevoked, "token " + short_id(id) + " is revoked");
    case TokenStatus::kConsumed:
      throw Error(ErrorCode::kReplay,
                  "single-use token " + short_id(id) + " already redeemed");
    case TokenStatus::kPending:
      if (!token.provisional) {
        throw Error(ErrorCode::kNotRatified,
                    "token " + short_id(id) + " awaits ratification");
      }
      break;
    case TokenStatus::kRatified: break;
  }
  if (token.kind == TokenKind::kExpiring && now_ms > token.expiry_ms) {
    throw Error(ErrorCode::kExpired,
                "token " + short_id(id) + " expired at " +
                    std::to_string(token.expiry_ms));
  }
  if (token.kind == TokenKind::kSingleUse) token.status = TokenStatus::kConsumed;
  return token;
}

std::optional<AccessToken> TokenService::find(const Digest& id) const {
  std::lock_guard lock(mu_);
  auto it = tokens_.find(id);
  if (it == tokens_.end()) return std::nullopt;
  return it->second.first;
}

std::size_t TokenService::size() const {
  std::lock_guard lock(mu_);
  return tokens_.size();
}

void TokenService::restore(const AccessToken& token, const SessionKey& key) {
  if (token_digest(token) != token.id || key.token_id != token.id) {
    throw Error(ErrorCode::kIntegrity,
                "stored token " + short_id(token.id) + " does not match its body");
  }
  std::lock_guard lock(mu_);
  tokens_.insert_or_assign(token.id, std::make_pair(token, key));
  serial_ = std::max(serial_, token.serial + 1);
}

std::map<Digest, std::pair<AccessToken, SessionKey>> TokenService::snapshot()
    const {
  std::lock_guard lock(mu_);
  return tokens_;
}

std::uint64_t totp_step(std::uint64_t now_ms, std::uint32_t step_seconds) {
  return now_ms / 1000 / step_seconds;
}

std::string hotp(ByteView secret, std::uint64_t counter, std::uint32_t digits) {
  ByteWriter w;
  w.u64(counter);
  auto mac = hmac_sha1(secret, w.data());
  auto offset = mac.back() & 0x0f;
  std::uint32_t code = (static_cast<std::uint32_t>(mac[offset] & 0x7f) << 24) |
                       (static_cast<std::uint32_t>(mac[offset + 1]) << 16) |
                       (static_cast<std::uint32_t>(mac[offset + 2]) << 8) |
                       static_cast<std::uint32_t>(mac[offset + 3]);
  std::uint64_t modulus = 1;
  for (std::uint32_t i = 0; i < digits; ++i) modulus *= 10;
  auto text = std::to_string(code % modulus);
  return std::string(digits > text.size() ? digits - text.size() : 0, '0') +
         text;
}

std::string totp(ByteView secret, std::uint64_t now_ms,
                 std::uint32_t step_seconds, std::uint32_t digits) {
  return hotp(secret, totp_step(now_ms, step_seconds), digits);
}

TotpGrant::TotpGrant(TotpConfig config, TokenRequest target)
    : config_(std::move(config)),
      target_(std::move(target)),
      remaining_(config_.visits) {
  if (config_.step_seconds == 0 || config_.digits == 0 || config_.digits > 9) {
    throw Error(ErrorCode::kConfig, "TOTP needs step >= 1 s and 1..9 digits");
  }
  target_.kind = TokenKind::kSingleUse;
}

std::string TotpGrant::issue(std::uint64_t now_ms) {
  if (remaining_ == 0) {
    throw Error(ErrorCode::kExhausted, "no visits left on this grant");
  }
  issued_step_ = totp_step(now_ms, config_.step_seconds);
  return hotp(config_.secret, *issued_step_, config_.digits);
}

GuestAccess TotpGrant::redeem(std::string_view passphrase,
                              std::uint64_t now_ms, TokenService& tokens) {
  if (remaining_ == 0) {
    throw Error(ErrorCode::kExhausted, "no visits left on this grant");
  }
  auto now_step = totp_step(now_ms, config_.step_seconds);
  // Only the passphrase of the issued step is accepted.
  bool matched = false;
  if (issued_step_ && passphrase.size() == config_.digits) {
    auto expected = hotp(config_.secret, *issued_step_, config_.digits);
    matched = CRYPTO_memcmp(expected.data(), passphrase.data(), expected.size()) == 0;
  }
  if (!matched) {
    throw Error(ErrorCode::kPassphraseMismatch, "passphrase does not match");
  }
  auto gap = now_step > *issued_step_ ? now_step - *issued_step_ : *issued_step_ - now_step;
  if (gap > config_.tolerance) {
    throw Error(ErrorCode::kExpired,
                "passphrase from step " + std::to_string(*issued_step_) +
                    " is outside the window around step " + std::to_string(now_step));
  }
  --remaining_;
  auto [token, key] = tokens.issue(Decision::kPermit, target_, now_ms);
  GuestAccess out;
  out.token = token;
  out.salt = Bytes(token.id.begin(), token.id.end());
  out.sealed_key = seal_with_passphrase(passphrase, out.salt, key.key);
  return out;
}

std::optional<Bytes> open_guest_key(const GuestAccess& access,
                                    std::string_view passphrase) {
  return open_with_passphrase(passphrase, access.salt, access.sealed_key);
}

}  // namespace beac

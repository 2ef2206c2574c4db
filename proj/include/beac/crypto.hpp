#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace beac {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kDigestSize = 32;
using Digest = std::array<std::uint8_t, kDigestSize>;
using PublicKey = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;

Digest sha256(ByteView data);
Digest sha256(std::string_view text);

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);  // throws Error(kParse)

inline ByteView as_bytes(std::string_view text) {
  return {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()};
}

// Network-wide identity of a peer: digest of its public key.
struct Fingerprint {
  Digest bytes{};

  auto operator<=>(const Fingerprint&) const = default;

  std::string hex() const { return to_hex(bytes); }
  // "nobody" / "everybody" for the reserved values, short hex otherwise.
  std::string label() const;
  bool is_special() const;

  static Fingerprint of(const PublicKey& key);
  static Fingerprint from_hex(std::string_view hex);
};

// Reserved principals. All-zero and all-one digests have no known preimage,
// so no real key can map onto them.
inline constexpr Fingerprint kNobody{};
inline const Fingerprint kEverybody = [] {
  Fingerprint f;
  f.bytes.fill(0xff);
  return f;
}();

// Ed25519 key pair. Signatures are deterministic, which keeps persisted
// ledgers byte-stable for a fixed set of seeds.
class Identity {
 public:
  static Identity from_seed(std::string_view label);
  static Identity generate();
  static Identity public_only(const PublicKey& key);

  const PublicKey& public_key() const { return public_key_; }
  const Fingerprint& fingerprint() const { return fingerprint_; }
  bool can_sign() const { return private_key_.has_value(); }

  // Throws Error(kSigningCapability) for public-only identities.
  Signature sign(ByteView message) const;

 private:
  Identity(PublicKey pub, std::optional<std::array<std::uint8_t, 32>> priv);

  PublicKey public_key_{};
  Fingerprint fingerprint_;
  std::optional<std::array<std::uint8_t, 32>> private_key_;
};

bool verify_signature(const PublicKey& key, ByteView message,
                      const Signature& signature);

Bytes hmac_sha1(ByteView key, ByteView message);
Bytes random_bytes(std::size_t count);

// Passphrase sealing for one-time guest tokens: PBKDF2-HMAC-SHA256 key
// derivation followed by AES-256-GCM. Output layout: nonce(12) | tag(16) | ct.
Bytes seal_with_passphrase(std::string_view passphrase, ByteView salt,
                           ByteView plaintext);
// Returns nullopt when the passphrase is wrong or the blob was altered.
std::optional<Bytes> open_with_passphrase(std::string_view passphrase,
                                          ByteView salt, ByteView sealed);

}  // namespace beac

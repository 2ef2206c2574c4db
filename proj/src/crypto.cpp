#include "beac/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include <memory>

#include "beac/error.hpp"

namespace beac {
namespace {

struct PkeyDeleter {
  void operator()(EVP_PKEY* key) const { EVP_PKEY_free(key); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};
struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

constexpr std::size_t kNonceSize = 12;
constexpr std::size_t kTagSize = 16;
constexpr int kKdfIterations = 2048;

[[noreturn]] void openssl_failure(const char* what) {
  throw std::runtime_error(std::string("openssl: ") + what);
}

std::array<std::uint8_t, 32> derive_key(std::string_view passphrase,
                                        ByteView salt) {
  std::array<std::uint8_t, 32> key{};
  if (PKCS5_PBKDF2_HMAC(passphrase.data(), static_cast<int>(passphrase.size()),
                        salt.data(), static_cast<int>(salt.size()),
                        kKdfIterations, EVP_sha256(),
                        static_cast<int>(key.size()), key.data()) != 1) {
    openssl_failure("PBKDF2");
  }
  return key;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Digest sha256(ByteView data) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    openssl_failure("SHA-256");
  }
  return out;
}

Digest sha256(std::string_view text) { return sha256(as_bytes(text)); }

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw Error(ErrorCode::kParse, "odd-length hex string");
  }
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::kParse,
                  "invalid hex digit at position " + std::to_string(2 * i));
    }
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

std::string Fingerprint::label() const {
  if (*this == kNobody) return "nobody";
  if (*this == kEverybody) return "everybody";
  return hex().substr(0, 12);
}

bool Fingerprint::is_special() const {
  return *this == kNobody || *this == kEverybody;
}

Fingerprint Fingerprint::of(const PublicKey& key) {
  return Fingerprint{sha256(key)};
}

Fingerprint Fingerprint::from_hex(std::string_view hex) {
  if (hex == "nobody") return kNobody;
  if (hex == "everybody") return kEverybody;
  auto raw = beac::from_hex(hex);
  if (raw.size() != kDigestSize) {
    throw Error(ErrorCode::kParse, "fingerprint must be 32 bytes of hex");
  }
  Fingerprint f;
  std::copy(raw.begin(), raw.end(), f.bytes.begin());
  return f;
}

Identity::Identity(PublicKey pub,
                   std::optional<std::array<std::uint8_t, 32>> priv)
    : public_key_(pub),
      fingerprint_(Fingerprint::of(pub)),
      private_key_(priv) {}

Identity Identity::from_seed(std::string_view label) {
  Digest seed = sha256(std::string("beac-identity/") + std::string(label));
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                           seed.data(), seed.size()));
  if (!key) openssl_failure("Ed25519 key from seed");
  PublicKey pub{};
  std::size_t len = pub.size();
  if (EVP_PKEY_get_raw_public_key(key.get(), pub.data(), &len) != 1) {
    openssl_failure("Ed25519 public key");
  }
  return Identity(pub, seed);
}

Identity Identity::generate() {
  auto raw = random_bytes(32);
  std::array<std::uint8_t, 32> seed{};
  std::copy(raw.begin(), raw.end(), seed.begin());
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                           seed.data(), seed.size()));
  if (!key) openssl_failure("Ed25519 key generation");
  PublicKey pub{};
  std::size_t len = pub.size();
  if (EVP_PKEY_get_raw_public_key(key.get(), pub.data(), &len) != 1) {
    openssl_failure("Ed25519 public key");
  }
  return Identity(pub, seed);
}

Identity Identity::public_only(const PublicKey& key) {
  return Identity(key, std::nullopt);
}

Signature Identity::sign(ByteView message) const {
  if (!private_key_) {
    throw Error(ErrorCode::kSigningCapability,
                "identity " + fingerprint_.label() + " has no private key");
  }
  PkeyPtr key(EVP_PKEY_new_raw_private_key(
      EVP_PKEY_ED25519, nullptr, private_key_->data(), private_key_->size()));
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!key || !ctx) openssl_failure("sign setup");
  if (EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) {
    openssl_failure("EVP_DigestSignInit");
  }
  Signature sig{};
  std::size_t len = sig.size();
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(),
                     message.size()) != 1) {
    openssl_failure("EVP_DigestSign");
  }
  return sig;
}

bool verify_signature(const PublicKey& key, ByteView message,
                      const Signature& signature) {
  PkeyPtr pkey(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr,
                                           key.data(), key.size()));
  if (!pkey) return false;
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx) openssl_failure("verify setup");
  if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) !=
      1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(),
                          message.data(), message.size()) == 1;
}

Bytes hmac_sha1(ByteView key, ByteView message) {
  Bytes out(EVP_MAX_MD_SIZE);
  unsigned int len = 0;
  if (HMAC(EVP_sha1(), key.data(), static_cast<int>(key.size()),
           message.data(), message.size(), out.data(), &len) == nullptr) {
    openssl_failure("HMAC-SHA1");
  }
  out.resize(len);
  return out;
}

Bytes random_bytes(std::size_t count) {
  Bytes out(count);
  if (count > 0 && RAND_bytes(out.data(), static_cast<int>(count)) != 1) {
    openssl_failure("RAND_bytes");
  }
  return out;
}

Bytes seal_with_passphrase(std::string_view passphrase, ByteView salt,
                           ByteView plaintext) {
  auto key = derive_key(passphrase, salt);
  Bytes out(kNonceSize + kTagSize + plaintext.size());
  auto nonce = random_bytes(kNonceSize);
  std::copy(nonce.begin(), nonce.end(), out.begin());

  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  int len = 0;
  if (!ctx ||
      EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(),
                         nonce.data()) != 1 ||
      EVP_EncryptUpdate(ctx.get(), out.data() + kNonceSize + kTagSize, &len,
                        plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1 ||
      EVP_EncryptFinal_ex(ctx.get(), nullptr, &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagSize,
                          out.data() + kNonceSize) != 1) {
    openssl_failure("AES-256-GCM seal");
  }
  return out;
}

std::optional<Bytes> open_with_passphrase(std::string_view passphrase,
                                          ByteView salt, ByteView sealed) {
  if (sealed.size() < kNonceSize + kTagSize) return std::nullopt;
  auto key = derive_key(passphrase, salt);
  Bytes plain(sealed.size() - kNonceSize - kTagSize);
  Bytes tag(sealed.begin() + kNonceSize,
            sealed.begin() + kNonceSize + kTagSize);

  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  int len = 0;
  if (!ctx ||
      EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(),
                         sealed.data()) != 1 ||
      EVP_DecryptUpdate(ctx.get(), plain.data(), &len,
                        sealed.data() + kNonceSize + kTagSize,
                        static_cast<int>(plain.size())) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagSize,
                          tag.data()) != 1) {
    openssl_failure("AES-256-GCM open");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), nullptr, &len) != 1) {
    return std::nullopt;
  }
  return plain;
}

}  // namespace beac

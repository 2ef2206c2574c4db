#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beac/record.hpp"

namespace beac {

struct Block {
  std::uint64_t height = 0;
  Digest parent{};  // all zero at height 0
  std::vector<SignedRecord> records;
  std::vector<Fingerprint> certificate;  // validators that voted

  bool operator==(const Block&) const = default;
};

Bytes encode_block(const Block& block);
Block decode_block(ByteReader& r);
Digest block_digest(const Block& block);

struct LedgerConfig {
  std::uint32_t quorum = 1;
  // When non-empty, certificate voters must belong to this set.
  std::vector<Fingerprint> validators;

  bool operator==(const LedgerConfig&) const = default;
};

struct RecordLocation {
  std::uint64_t height = 0;
  std::size_t offset = 0;
};

// Append-only chain of blocks. Single writer; existing blocks are never
// touched once a later block exists.
class Ledger {
 public:
  explicit Ledger(LedgerConfig config = {});

  // Verifies every record and the certificate, then chains the block to the
  // current head. Throws kRejectedRecord (index of the offender),
  // kDuplicateRecord or kQuorum; the ledger is unchanged on error.
  const Block& append_block(std::vector<SignedRecord> records,
                            std::vector<Fingerprint> certificate);

  const LedgerConfig& config() const { return config_; }
  std::span<const Block> blocks() const { return blocks_; }
  std::size_t height() const { return blocks_.size(); }
  bool empty() const { return blocks_.empty(); }
  Digest head_digest() const;

  bool contains(const Digest& checksum) const {
    return index_.count(checksum) != 0;
  }
  std::optional<RecordLocation> locate(const Digest& checksum) const;

  // Every record in chain order.
  std::vector<SignedRecord> records() const;
  std::size_t record_count() const { return record_count_; }

  bool operator==(const Ledger& other) const {
    return config_ == other.config_ && blocks_ == other.blocks_;
  }

 private:
  friend Ledger deserialize(ByteView data);

  // Used by the loader: no validation, so damaged files can still be
  // inspected and reported by verify_chain.
  void push_unchecked(Block block);

  LedgerConfig config_;
  std::vector<Block> blocks_;
  std::map<Digest, RecordLocation> index_;
  std::size_t record_count_ = 0;
};

struct ChainReport {
  bool ok = true;
  std::vector<std::string> problems;

  explicit operator bool() const { return ok; }
};

// Full verification: parent links, heights, every record signature and
// checksum, record uniqueness, certificate quorum and membership.
ChainReport verify_chain(const Ledger& ledger);

// File layout:
//   magic "BEACLDG1" | u16 version | u32 quorum | u32 n | n x fingerprint
//   | u64 block count | per block: u32 length, block bytes
//   | footer: sha256(header bytes | head block digest)
Bytes serialize(const Ledger& ledger);
Ledger deserialize(ByteView data);  // kParse with byte offset, kIntegrity
void persist(const Ledger& ledger, const std::filesystem::path& path);
Ledger load(const std::filesystem::path& path);

// Human-readable listing of every block and record.
std::string dump(const Ledger& ledger);
std::string describe(const Payload& payload);

}  // namespace beac

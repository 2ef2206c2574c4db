#include "beac/ledger.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "beac/error.hpp"

namespace beac {
namespace {

constexpr char kMagic[8] = {'B', 'E', 'A', 'C', 'L', 'D', 'G', '1'};
constexpr std::uint16_t kFormatVersion = 1;

std::string certificate_problem(const LedgerConfig& config,
                                const std::vector<Fingerprint>& cert) {
  std::set<Fingerprint> unique(cert.begin(), cert.end());
  if (unique.size() != cert.size()) return "certificate lists a voter twice";
  if (cert.size() < config.quorum) {
    return "certificate has " + std::to_string(cert.size()) +
           " voters, quorum is " + std::to_string(config.quorum);
  }
  if (!config.validators.empty()) {
    std::set<Fingerprint> members(config.validators.begin(),
                                  config.validators.end());
    for (const auto& voter : cert) {
      if (!members.count(voter)) {
        return "certificate voter " + voter.label() + " is not a validator";
      }
    }
  }
  return {};
}

Bytes encode_header(const LedgerConfig& config, std::uint64_t block_count) {
  ByteWriter w;
  w.raw(as_bytes(std::string_view(kMagic, sizeof(kMagic))));
  w.u16(kFormatVersion);
  w.u32(config.quorum);
  w.u32(static_cast<std::uint32_t>(config.validators.size()));
  for (const auto& v : config.validators) w.raw(v.bytes);
  w.u64(block_count);
  return std::move(w).take();
}

Digest footer_digest(ByteView header, const Digest& head) {
  Bytes material(header.begin(), header.end());
  material.insert(material.end(), head.begin(), head.end());
  return sha256(material);
}

std::string opt_service(const std::optional<std::string>& service) {
  return service ? "/" + *service : "";
}

}  // namespace

Bytes encode_block(const Block& block) {
  ByteWriter w;
  w.u64(block.height);
  w.raw(block.parent);
  w.u32(static_cast<std::uint32_t>(block.records.size()));
  for (const auto& record : block.records) encode_record(w, record);
  w.u32(static_cast<std::uint32_t>(block.certificate.size()));
  for (const auto& voter : block.certificate) w.raw(voter.bytes);
  return std::move(w).take();
}

Block decode_block(ByteReader& r) {
  Block block;
  block.height = r.u64();
  block.parent = r.array<kDigestSize>();
  auto count = r.u32();
  if (count > r.remaining()) r.fail("record count exceeds remaining data");
  block.records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    block.records.push_back(decode_record(r));
  }
  auto voters = r.u32();
  if (voters > r.remaining() / kDigestSize) {
    r.fail("certificate size exceeds remaining data");
  }
  for (std::uint32_t i = 0; i < voters; ++i) {
    block.certificate.push_back(Fingerprint{r.array<kDigestSize>()});
  }
  return block;
}

Digest block_digest(const Block& block) { return sha256(encode_block(block)); }

Ledger::Ledger(LedgerConfig config) : config_(std::move(config)) {}

Digest Ledger::head_digest() const {
  return blocks_.empty() ? Digest{} : block_digest(blocks_.back());
}

const Block& Ledger::append_block(std::vector<SignedRecord> records,
                                  std::vector<Fingerprint> certificate) {
  std::set<Digest> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& record = records[i];
    if (!verify_record(record)) {
      throw Error(ErrorCode::kRejectedRecord,
                  "record " + std::to_string(i) + " (" +
                      std::string(kind_name(record.payload)) + ", checksum " +
                      to_hex(record.checksum).substr(0, 16) +
                      ") fails verification",
                  i);
    }
    if (contains(record.checksum) || !seen.insert(record.checksum).second) {
      throw Error(ErrorCode::kDuplicateRecord,
                  "record " + std::to_string(i) + " checksum " +
                      to_hex(record.checksum).substr(0, 16) +
                      " already submitted",
                  i);
    }
  }
  if (auto problem = certificate_problem(config_, certificate);
      !problem.empty()) {
    throw Error(ErrorCode::kQuorum, problem);
  }

  Block block;
  block.height = blocks_.size();
  block.parent = head_digest();
  block.records = std::move(records);
  block.certificate = std::move(certificate);
  push_unchecked(std::move(block));
  return blocks_.back();
}

void Ledger::push_unchecked(Block block) {
  auto height = blocks_.size();
  for (std::size_t i = 0; i < block.records.size(); ++i) {
    index_.emplace(block.records[i].checksum, RecordLocation{height, i});
  }
  record_count_ += block.records.size();
  blocks_.push_back(std::move(block));
}

std::optional<RecordLocation> Ledger::locate(const Digest& checksum) const {
  auto it = index_.find(checksum);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<SignedRecord> Ledger::records() const {
  std::vector<SignedRecord> out;
  out.reserve(record_count_);
  for (const auto& block : blocks_) {
    out.insert(out.end(), block.records.begin(), block.records.end());
  }
  return out;
}

ChainReport verify_chain(const Ledger& ledger) {
  ChainReport report;
  auto problem = [&](std::string text) {
    report.ok = false;
    report.problems.push_back(std::move(text));
  };

  Digest expected_parent{};
  std::set<Digest> seen;
  auto blocks = ledger.blocks();
  for (std::size_t h = 0; h < blocks.size(); ++h) {
    const auto& block = blocks[h];
    auto where = "block " + std::to_string(h);
    if (block.height != h) {
      problem(where + ": height field is " + std::to_string(block.height));
    }
    if (block.parent != expected_parent) {
      problem(where + ": parent digest does not match previous block");
    }
    for (std::size_t i = 0; i < block.records.size(); ++i) {
      const auto& record = block.records[i];
      if (!verify_record(record)) {
        problem(where + " record " + std::to_string(i) + ": " +
                std::string(kind_name(record.payload)) +
                " fails signature or checksum verification");
      }
      if (!seen.insert(record.checksum).second) {
        problem(where + " record " + std::to_string(i) +
                ": duplicate checksum");
      }
    }
    if (auto p = certificate_problem(ledger.config(), block.certificate);
        !p.empty()) {
      problem(where + ": " + p);
    }
    expected_parent = block_digest(block);
  }
  return report;
}

Bytes serialize(const Ledger& ledger) {
  auto header = encode_header(ledger.config(), ledger.height());
  ByteWriter w;
  w.raw(header);
  for (const auto& block : ledger.blocks()) w.bytes(encode_block(block));
  w.raw(footer_digest(header, ledger.head_digest()));
  return std::move(w).take();
}

Ledger deserialize(ByteView data) {
  ByteReader r(data);
  auto magic = r.raw(sizeof(kMagic));
  if (!std::equal(magic.begin(), magic.end(), kMagic)) {
    throw Error(ErrorCode::kParse, "bad magic at byte 0");
  }
  auto version = r.u16();
  if (version != kFormatVersion) {
    throw Error(ErrorCode::kParse, "unsupported format version " +
                                       std::to_string(version) + " at byte 8");
  }
  LedgerConfig config;
  config.quorum = r.u32();
  auto validators = r.u32();
  if (validators > r.remaining() / kDigestSize) {
    r.fail("validator count exceeds remaining data");
  }
  for (std::uint32_t i = 0; i < validators; ++i) {
    config.validators.push_back(Fingerprint{r.array<kDigestSize>()});
  }
  auto block_count = r.u64();
  auto header = data.first(r.offset());

  Ledger ledger(config);
  for (std::uint64_t i = 0; i < block_count; ++i) {
    auto len = r.u32();
    auto base = r.offset();
    ByteReader block_reader(r.raw(len), base);
    auto block = decode_block(block_reader);
    if (!block_reader.done()) block_reader.fail("trailing bytes in block");
    ledger.push_unchecked(std::move(block));
  }
  auto footer_offset = r.offset();
  auto footer = r.array<kDigestSize>();
  if (!r.done()) r.fail("trailing data after footer");
  if (footer != footer_digest(header, ledger.head_digest())) {
    throw Error(ErrorCode::kIntegrity,
                "footer digest mismatch at byte " + std::to_string(footer_offset));
  }
  return ledger;
}

void persist(const Ledger& ledger, const std::filesystem::path& path) {
  auto bytes = serialize(ledger);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kConfig, "cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kConfig, "write failed for " + path.string());
}

Ledger load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)),
              std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

std::string describe(const Payload& payload) {
  std::ostringstream os;
  os << kind_name(payload);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DomainRegistration>) {
          os << " domain=" << p.domain.label() << " owner=" << p.owner.label()
             << " model=" << to_string(p.model);
        } else if constexpr (std::is_same_v<T, DeviceRegistration>) {
          os << " device=" << p.device.label() << " owner=" << p.owner.label()
             << " services=[";
          for (std::size_t i = 0; i < p.services.size(); ++i) {
            os << (i ? "," : "") << p.services[i];
          }
          os << "]";
        } else if constexpr (std::is_same_v<T, DeviceRevocation>) {
          os << " device=" << p.device.label();
        } else if constexpr (std::is_same_v<T, PermissionGranted> ||
                             std::is_same_v<T, PermissionRevoked>) {
          os << " user=" << p.user.label() << " target=" << p.device.label()
             << opt_service(p.service) << " permission="
             << to_string(p.permission);
        } else if constexpr (std::is_same_v<T, NewAttribute>) {
          os << " uid=" << p.uid << " name=" << to_hex(p.name);
        } else if constexpr (std::is_same_v<T, NewRole>) {
          os << " uid=" << p.uid << " name=" << p.name;
        } else if constexpr (std::is_same_v<T, DeleteAttribute> ||
                             std::is_same_v<T, DeleteRole>) {
          os << " uid=" << p.uid;
        } else if constexpr (std::is_same_v<T, AssignAttributeDevice> ||
                             std::is_same_v<T, RemoveAttributeDevice>) {
          os << " uid=" << p.uid << " target=" << p.device.label()
             << opt_service(p.service);
        } else if constexpr (std::is_same_v<T, AssignAttributeUser> ||
                             std::is_same_v<T, RemoveAttributeUser> ||
                             std::is_same_v<T, AssignRoleUser> ||
                             std::is_same_v<T, RemoveRoleUser>) {
          os << " uid=" << p.uid << " user=" << p.user.label();
        } else if constexpr (std::is_same_v<T, AssignAttributePermission>) {
          os << " user_uid=" << p.user_attribute
             << " device_uid=" << p.device_attribute
             << " permission=" << to_string(p.permission)
             << " effect=" << to_string(p.effect);
        } else if constexpr (std::is_same_v<T, RevokeAttributePermission>) {
          os << " user_uid=" << p.user_attribute
             << " device_uid=" << p.device_attribute
             << " permission=" << to_string(p.permission);
        } else if constexpr (std::is_same_v<T, AssignRolePermission>) {
          os << " uid=" << p.uid << " target=" << p.device.label()
             << opt_service(p.service) << " permission="
             << to_string(p.permission) << " effect=" << to_string(p.effect);
        } else if constexpr (std::is_same_v<T, RevokeRolePermission>) {
          os << " uid=" << p.uid << " target=" << p.device.label()
             << opt_service(p.service)
             << " permission=" << to_string(p.permission);
        } else if constexpr (std::is_same_v<T, AddRoleHierarchy> ||
                             std::is_same_v<T, RemoveRoleHierarchy>) {
          os << " parent=" << p.parent << " child=" << p.child;
        } else if constexpr (std::is_same_v<T, RoleBatch>) {
          os << " ops=" << p.ops.size() << " {";
          for (std::size_t i = 0; i < p.ops.size(); ++i) {
            os << (i ? "; " : "") << describe(to_payload(p.ops[i]));
          }
          os << "}";
        } else if constexpr (std::is_same_v<T, TokenCommit>) {
          os << " token=" << to_hex(p.token_id).substr(0, 16);
        }
      },
      payload);
  return os.str();
}

std::string dump(const Ledger& ledger) {
  std::ostringstream os;
  os << "ledger blocks=" << ledger.height()
     << " records=" << ledger.record_count()
     << " quorum=" << ledger.config().quorum
     << " validators=" << ledger.config().validators.size() << "\n";
  for (const auto& block : ledger.blocks()) {
    os << "block " << block.height << " parent=" << to_hex(block.parent).substr(0, 16)
       << " digest=" << to_hex(block_digest(block)).substr(0, 16)
       << " voters=" << block.certificate.size() << "\n";
    for (const auto& record : block.records) {
      os << "  [" << record.timestamp_ms << "] issuer=" << record.issuer.label()
         << " checksum=" << to_hex(record.checksum).substr(0, 16) << " "
         << describe(record.payload) << "\n";
    }
  }
  return os.str();
}

}  // namespace beac

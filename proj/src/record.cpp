#include "beac/record.hpp"

#include <type_traits>
#include <utility>

#include "beac/error.hpp"

namespace beac {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class T>
struct is_optional : std::false_type {};
template <class T>
struct is_optional<std::optional<T>> : std::true_type {};

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

template <class T>
bool enum_in_range(std::uint8_t raw) {
  if constexpr (std::is_same_v<T, PermissionType>) return raw >= 1 && raw <= 3;
  if constexpr (std::is_same_v<T, AccessModel>) return raw >= 1 && raw <= 3;
  if constexpr (std::is_same_v<T, Effect>) return raw >= 1 && raw <= 2;
  return false;
}

void write_field(ByteWriter& w, const RoleOp& op);
void read_field(ByteReader& r, RoleOp& op);

template <class T>
void write_field(ByteWriter& w, const T& v) {
  if constexpr (std::is_same_v<T, Fingerprint>) {
    w.raw(v.bytes);
  } else if constexpr (std::is_same_v<T, Digest>) {
    w.raw(v);
  } else if constexpr (std::is_enum_v<T>) {
    w.u8(static_cast<std::uint8_t>(v));
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    w.u64(v);
  } else if constexpr (std::is_same_v<T, std::string>) {
    w.string(v);
  } else if constexpr (std::is_same_v<T, Bytes>) {
    w.bytes(v);
  } else if constexpr (is_optional<T>::value) {
    w.u8(v.has_value() ? 1 : 0);
    if (v) write_field(w, *v);
  } else if constexpr (is_vector<T>::value) {
    w.u32(static_cast<std::uint32_t>(v.size()));
    for (const auto& item : v) write_field(w, item);
  } else {
    static_assert(sizeof(T) == 0, "no canonical encoding for field type");
  }
}

template <class T>
void read_field(ByteReader& r, T& v) {
  if constexpr (std::is_same_v<T, Fingerprint>) {
    v.bytes = r.array<kDigestSize>();
  } else if constexpr (std::is_same_v<T, Digest>) {
    v = r.array<kDigestSize>();
  } else if constexpr (std::is_enum_v<T>) {
    auto raw = r.u8();
    if (!enum_in_range<T>(raw)) {
      r.fail("invalid enumerator " + std::to_string(raw));
    }
    v = static_cast<T>(raw);
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    v = r.u64();
  } else if constexpr (std::is_same_v<T, std::string>) {
    v = r.string();
  } else if constexpr (std::is_same_v<T, Bytes>) {
    v = r.bytes();
  } else if constexpr (is_optional<T>::value) {
    auto flag = r.u8();
    if (flag > 1) r.fail("invalid optional flag");
    if (flag == 1) {
      typename T::value_type inner{};
      read_field(r, inner);
      v = std::move(inner);
    } else {
      v.reset();
    }
  } else if constexpr (is_vector<T>::value) {
    auto count = r.u32();
    // Every element costs at least one byte; bound before reserving.
    if (count > r.remaining()) r.fail("element count exceeds remaining data");
    v.clear();
    v.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      typename T::value_type item{};
      read_field(r, item);
      v.push_back(std::move(item));
    }
  } else {
    static_assert(sizeof(T) == 0, "no canonical decoding for field type");
  }
}

template <class Struct>
void write_struct(ByteWriter& w, const Struct& s) {
  std::apply([&](const auto&... f) { (write_field(w, f), ...); }, s.tie());
}

template <class Struct>
void read_struct(ByteReader& r, Struct& s) {
  std::apply([&](auto&... f) { (read_field(r, f), ...); }, s.tie());
}

template <class Variant, std::size_t... I>
Variant decode_alternative(ByteReader& r, std::size_t index,
                           std::index_sequence<I...>) {
  Variant out;
  bool found = ((index == I ? (out.template emplace<I>(),
                               read_struct(r, std::get<I>(out)), true)
                            : false) ||
                ...);
  if (!found) r.fail("unknown record tag " + std::to_string(index + 1));
  return out;
}

template <class Variant>
Variant decode_tagged(ByteReader& r) {
  auto tag = r.u8();
  if (tag == 0) r.fail("record tag 0 is reserved");
  return decode_alternative<Variant>(
      r, tag - 1u, std::make_index_sequence<std::variant_size_v<Variant>>{});
}

template <class T, class Variant, std::size_t... I>
constexpr std::size_t index_in(std::index_sequence<I...>) {
  std::size_t result = 0;
  ((std::is_same_v<T, std::variant_alternative_t<I, Variant>> ? result = I
                                                               : result),
   ...);
  return result;
}

// Role ops carry the same tag they would have as top-level payloads.
template <class T>
constexpr std::uint8_t payload_tag() {
  return static_cast<std::uint8_t>(
      index_in<T, Payload>(
          std::make_index_sequence<std::variant_size_v<Payload>>{}) +
      1);
}

void write_field(ByteWriter& w, const RoleOp& op) {
  std::visit(
      [&](const auto& v) {
        w.u8(payload_tag<std::decay_t<decltype(v)>>());
        write_struct(w, v);
      },
      op);
}

void read_field(ByteReader& r, RoleOp& op) {
  auto start = r.offset();
  auto payload = decode_tagged<Payload>(r);
  auto as_op = as_role_op(payload);
  if (!as_op) {
    throw Error(ErrorCode::kParse, "non-RBAC record nested in role batch at byte " +
                                       std::to_string(start));
  }
  op = std::move(*as_op);
}

}  // namespace

std::string_view kind_name(const Payload& payload) {
  return std::visit(
      overloaded{
          [](const DomainRegistration&) { return "DomainRegistration"; },
          [](const DeviceRegistration&) { return "DeviceRegistration"; },
          [](const DeviceRevocation&) { return "DeviceRevocation"; },
          [](const PermissionGranted&) { return "PermissionGranted"; },
          [](const PermissionRevoked&) { return "PermissionRevoked"; },
          [](const NewAttribute&) { return "NewAttribute"; },
          [](const DeleteAttribute&) { return "DeleteAttribute"; },
          [](const AssignAttributeDevice&) { return "AssignAttributeDevice"; },
          [](const RemoveAttributeDevice&) { return "RemoveAttributeDevice"; },
          [](const AssignAttributeUser&) { return "AssignAttributeUser"; },
          [](const RemoveAttributeUser&) { return "RemoveAttributeUser"; },
          [](const AssignAttributePermission&) {
            return "AssignAttributePermission";
          },
          [](const RevokeAttributePermission&) {
            return "RevokeAttributePermission";
          },
          [](const NewRole&) { return "NewRole"; },
          [](const DeleteRole&) { return "DeleteRole"; },
          [](const AssignRoleUser&) { return "AssignRoleUser"; },
          [](const RemoveRoleUser&) { return "RemoveRoleUser"; },
          [](const AssignRolePermission&) { return "AssignRolePermission"; },
          [](const RevokeRolePermission&) { return "RevokeRolePermission"; },
          [](const AddRoleHierarchy&) { return "AddRoleHierarchy"; },
          [](const RemoveRoleHierarchy&) { return "RemoveRoleHierarchy"; },
          [](const RoleBatch&) { return "RoleBatch"; },
          [](const TokenCommit&) { return "TokenCommit"; },
      },
      payload);
}

bool is_dac_kind(const Payload& payload) { return payload.index() <= 4; }

bool is_abac_kind(const Payload& payload) {
  return payload.index() >= 5 && payload.index() <= 12;
}

bool is_rbac_kind(const Payload& payload) {
  return payload.index() >= 13 && payload.index() <= 21;
}

Payload to_payload(const RoleOp& op) {
  return std::visit([](const auto& v) -> Payload { return v; }, op);
}

std::optional<RoleOp> as_role_op(const Payload& payload) {
  return std::visit(
      [](const auto& v) -> std::optional<RoleOp> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_constructible_v<RoleOp, T> &&
                      !std::is_same_v<T, RoleBatch>) {
          return RoleOp{v};
        } else {
          return std::nullopt;
        }
      },
      payload);
}

void encode_payload(ByteWriter& w, const Payload& payload) {
  w.u8(static_cast<std::uint8_t>(payload.index() + 1));
  std::visit([&](const auto& v) { write_struct(w, v); }, payload);
}

Bytes canonical_encode(const Payload& payload) {
  ByteWriter w;
  encode_payload(w, payload);
  return std::move(w).take();
}

Payload decode_payload(ByteReader& r) { return decode_tagged<Payload>(r); }

Payload decode_payload(ByteView data) {
  ByteReader r(data);
  auto payload = decode_payload(r);
  if (!r.done()) r.fail("trailing bytes after payload");
  return payload;
}

Bytes signing_message(const Payload& payload, std::uint64_t timestamp_ms,
                      const Digest& checksum) {
  ByteWriter w;
  encode_payload(w, payload);
  w.u64(timestamp_ms);
  w.raw(checksum);
  return std::move(w).take();
}

SignedRecord sign_record(Payload payload, const Identity& issuer,
                         std::uint64_t timestamp_ms) {
  SignedRecord record;
  record.checksum = sha256(canonical_encode(payload));
  record.issuer = issuer.fingerprint();
  record.issuer_key = issuer.public_key();
  record.timestamp_ms = timestamp_ms;
  record.signature =
      issuer.sign(signing_message(payload, timestamp_ms, record.checksum));
  record.payload = std::move(payload);
  return record;
}

bool verify_record(const SignedRecord& record, const PublicKey& key) {
  if (Fingerprint::of(key) != record.issuer) return false;
  if (sha256(canonical_encode(record.payload)) != record.checksum) return false;
  return verify_signature(
      key, signing_message(record.payload, record.timestamp_ms, record.checksum),
      record.signature);
}

bool verify_record(const SignedRecord& record) {
  return verify_record(record, record.issuer_key);
}

void encode_record(ByteWriter& w, const SignedRecord& record) {
  w.bytes(canonical_encode(record.payload));
  w.raw(record.issuer.bytes);
  w.raw(record.issuer_key);
  w.u64(record.timestamp_ms);
  w.raw(record.checksum);
  w.raw(record.signature);
}

SignedRecord decode_record(ByteReader& r) {
  SignedRecord record;
  auto len = r.u32();
  auto base = r.offset();
  ByteReader payload_reader(r.raw(len), base);
  record.payload = decode_payload(payload_reader);
  if (!payload_reader.done()) payload_reader.fail("trailing bytes in payload");
  record.issuer.bytes = r.array<kDigestSize>();
  record.issuer_key = r.array<32>();
  record.timestamp_ms = r.u64();
  record.checksum = r.array<kDigestSize>();
  record.signature = r.array<64>();
  return record;
}

}  // namespace beac

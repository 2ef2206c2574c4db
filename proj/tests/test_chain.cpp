#include <doctest.h>

#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace fixture;

namespace {

void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

void put_text(Bytes& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

std::uint32_t get_u32(const Bytes& in, std::size_t at) {
  return (std::uint32_t{in[at]} << 24) | (std::uint32_t{in[at + 1]} << 16) |
         (std::uint32_t{in[at + 2]} << 8) | std::uint32_t{in[at + 3]};
}

// Byte ranges of each framed block inside a serialized ledger, located by
// walking the header layout directly.
std::vector<std::pair<std::size_t, std::size_t>> block_spans(const Bytes& file) {
  std::size_t at = 8 + 2 + 4;
  auto n = get_u32(file, at);
  at += 4 + 32 * std::size_t{n};
  std::uint64_t count = 0;
  for (int i = 0; i < 8; ++i) count = (count << 8) | file[at + i];
  at += 8;
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::uint64_t i = 0; i < count; ++i) {
    auto len = get_u32(file, at);
    spans.emplace_back(at + 4, len);
    at += 4 + len;
  }
  return spans;
}

}  // namespace

TEST_SUITE("codec") {
  TEST_CASE("device registration matches a hand-assembled encoding") {
    auto cam = CAM();
    auto owner = A();
    Bytes expected{2};  // second payload kind
    expected.insert(expected.end(), cam.bytes.begin(), cam.bytes.end());
    expected.insert(expected.end(), owner.bytes.begin(), owner.bytes.end());
    put_u32(expected, 2);
    put_text(expected, "stream");
    put_text(expected, "snapshot");
    CHECK(canonical_encode(cam_registration()) == expected);
  }

  TEST_CASE("device registration matches the frozen golden") {
    auto golden = read_text(data_dir() / "device_registration.hex");
    REQUIRE(!golden.empty());
    golden.pop_back();
    CHECK(to_hex(canonical_encode(cam_registration())) == golden);
  }

  TEST_CASE("encoding is deterministic and separates single-field changes") {
    auto reg = cam_registration();
    CHECK(canonical_encode(reg) == canonical_encode(reg));
    auto other = reg;
    other.services[1] = "snapshoT";
    CHECK(canonical_encode(reg) != canonical_encode(other));
    auto grant = PermissionGranted{B(), CAM(), std::nullopt,
                                   PermissionType::kList};
    auto grant2 = grant;
    grant2.service = "";
    CHECK(canonical_encode(grant) != canonical_encode(grant2));
  }

  TEST_CASE("decode rejects out-of-range enums and trailing bytes") {
    auto bytes = canonical_encode(
        DomainRegistration{HOME(), A(), AccessModel::kRbac});
    auto bad = bytes;
    bad.back() = 9;
    CHECK_THROWS_AS(decode_payload(bad), Error);
    auto longer = bytes;
    longer.push_back(0);
    CHECK_THROWS_AS(decode_payload(longer), Error);
    Bytes unknown_tag{200};
    CHECK_THROWS_AS(decode_payload(unknown_tag), Error);
    try {
      decode_payload(ByteView(bytes).first(10));
      FAIL("truncated payload decoded");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kParse);
    }
  }

  TEST_CASE("generated payloads round-trip through the codec") {
    for (auto mix : {gen::Mix::kDac, gen::Mix::kAbac, gen::Mix::kRbac}) {
      auto log = gen::generate_log(mix, 7, 200);
      for (const auto& r : log.records) {
        auto bytes = canonical_encode(r.payload);
        CHECK(decode_payload(bytes) == r.payload);
        ByteWriter w;
        encode_record(w, r);
        ByteReader reader(w.data());
        CHECK(decode_record(reader) == r);
        CHECK(reader.done());
      }
    }
  }
}

TEST_SUITE("records") {
  TEST_CASE("sign then verify") {
    auto r = signed_by(alice(), cam_registration());
    CHECK(verify_record(r));
    CHECK(verify_record(r, alice().public_key()));
  }

  TEST_CASE("tampered payload fails verification") {
    auto r = signed_by(alice(), cam_registration());
    std::get<DeviceRegistration>(r.payload).services[0][0] ^= 1;
    CHECK_FALSE(verify_record(r));
    auto t = signed_by(alice(), cam_registration());
    t.timestamp_ms += 1;
    CHECK_FALSE(verify_record(t));
  }

  TEST_CASE("verifying against another key fails") {
    auto r = signed_by(alice(), cam_registration());
    CHECK_FALSE(verify_record(r, bob().public_key()));
    auto swapped = r;
    swapped.issuer_key = bob().public_key();
    swapped.issuer = B();
    CHECK_FALSE(verify_record(swapped));
  }

  TEST_CASE("public-only identities cannot sign") {
    auto pub = Identity::public_only(alice().public_key());
    CHECK(pub.fingerprint() == A());
    try {
      sign_record(cam_registration(), pub, 1);
      FAIL("signed without a private key");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSigningCapability);
    }
  }

  TEST_CASE("checksum ignores the timestamp") {
    auto a = signed_by(alice(), cam_registration(), 1);
    auto b = signed_by(alice(), cam_registration(), 2);
    CHECK(a.checksum == b.checksum);
    CHECK(a.signature != b.signature);
  }
}

TEST_SUITE("ledger") {
  TEST_CASE("genesis block has height 0 and a zero parent") {
    Ledger ledger(cluster().ledger_config());
    const auto& block = ledger.append_block({dac_records()[0]}, cluster().certify());
    CHECK(block.height == 0);
    CHECK(block.parent == Digest{});
    CHECK(ledger.height() == 1);
  }

  TEST_CASE("certificate one short of quorum is refused") {
    Ledger ledger(cluster().ledger_config());
    auto cert = cluster().certify();
    cert.resize(cluster().quorum() - 1);
    try {
      ledger.append_block({dac_records()[0]}, cert);
      FAIL("appended without quorum");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kQuorum);
    }
    CHECK(ledger.empty());
  }

  TEST_CASE("foreign voters and repeated voters are refused") {
    Ledger ledger(cluster().ledger_config());
    auto cert = cluster().certify();
    cert[0] = A();
    CHECK_THROWS_AS(ledger.append_block({dac_records()[0]}, cert), Error);
    cert = cluster().certify();
    cert[1] = cert[0];
    CHECK_THROWS_AS(ledger.append_block({dac_records()[0]}, cert), Error);
  }

  TEST_CASE("bad records and duplicates leave the ledger unchanged") {
    auto ledger = dac_ledger();
    auto records = dac_records();
    try {
      ledger.append_block({records[1]}, cluster().certify());
      FAIL("duplicate accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDuplicateRecord);
    }
    auto forged = signed_by(alice(), PermissionGranted{C(), CAM(), std::nullopt,
                                                       PermissionType::kList});
    forged.signature[3] ^= 0x40;
    auto good = signed_by(alice(), DeviceRevocation{LOCK()});
    try {
      ledger.append_block({good, forged}, cluster().certify());
      FAIL("forged record accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kRejectedRecord);
      CHECK(e.index() == std::size_t{1});
    }
    CHECK(ledger.height() == 3);
    CHECK_FALSE(ledger.contains(good.checksum));
  }

  TEST_CASE("record lookup by checksum") {
    auto ledger = dac_ledger();
    auto records = dac_records();
    auto loc = ledger.locate(records[2].checksum);
    REQUIRE(loc);
    CHECK(loc->height == 2);
    CHECK(loc->offset == 0);
    CHECK(ledger.record_count() == 3);
    CHECK(ledger.records() == records);
  }

  TEST_CASE("empty ledger verifies") { CHECK(verify_chain(Ledger{}).ok); }

  TEST_CASE("a single tampered signature fails verification") {
    auto bytes = serialize(dac_ledger());
    auto spans = block_spans(bytes);
    // Last byte before the certificate count of the first block lies in the
    // record signature.
    auto [start, len] = spans[0];
    auto cert_bytes = 4 + 32 * std::size_t{cluster().quorum()};
    bytes[start + len - cert_bytes - 1] ^= 0x01;
    auto ledger = deserialize(bytes);
    auto report = verify_chain(ledger);
    CHECK_FALSE(report.ok);
    CHECK(report.problems.size() >= 1);
  }

  TEST_CASE("corrupting the middle block on disk breaks the chain") {
    auto ledger = dac_ledger();
    CHECK(verify_chain(ledger).ok);
    auto path = scratch("middle.beac");
    persist(ledger, path);
    auto bytes = read_bytes(path);
    auto spans = block_spans(bytes);
    REQUIRE(spans.size() == 3);

    // Independent oracle: each block's parent field is sha256 of the
    // previous block's framed bytes.
    auto digest_of = [&](std::size_t i) {
      return sha256(ByteView(bytes).subspan(spans[i].first, spans[i].second));
    };
    auto parent_field = [&](std::size_t i) {
      Digest d{};
      std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(spans[i].first + 8),
                  32, d.begin());
      return d;
    };
    CHECK(parent_field(1) == digest_of(0));
    CHECK(parent_field(2) == digest_of(1));

    // Flip one timestamp byte of the middle block's only record.
    auto [start, len] = spans[1];
    auto payload_len = get_u32(bytes, start + 8 + 32 + 4);
    auto ts_at = start + 8 + 32 + 4 + 4 + payload_len + 32 + 32 + 7;
    REQUIRE(ts_at < start + len);
    bytes[ts_at] ^= 0x01;
    write_bytes(path, bytes);

    CHECK(parent_field(2) != digest_of(1));
    auto reloaded = load(path);
    auto report = verify_chain(reloaded);
    CHECK_FALSE(report.ok);
    CHECK(report.problems.size() == 2);  // signature of block 1, link of block 2
  }

  TEST_CASE("persist and load round-trip") {
    auto ledger = dac_ledger();
    auto path = scratch("roundtrip.beac");
    persist(ledger, path);
    CHECK(load(path) == ledger);
  }

  TEST_CASE("truncated and empty files are parse errors") {
    auto bytes = serialize(dac_ledger());
    for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{30},
                            bytes.size() / 2, bytes.size() - 1}) {
      try {
        deserialize(ByteView(bytes).first(cut));
        FAIL("truncated ledger loaded at " << cut);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kParse);
      }
    }
  }

  TEST_CASE("footer mismatch is an integrity error") {
    auto bytes = serialize(dac_ledger());
    bytes.back() ^= 0xff;
    try {
      deserialize(bytes);
      FAIL("bad footer accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kIntegrity);
    }
  }

  TEST_CASE("golden fixture loads to the known three-block ledger") {
    auto ledger = load(data_dir() / "dac_fixture.beac");
    CHECK(ledger.height() == 3);
    CHECK(verify_chain(ledger).ok);
    CHECK(ledger == dac_ledger());
    CHECK(ledger.records() == dac_records());
    CHECK(dump(ledger) == read_text(data_dir() / "dac_fixture.chain"));
  }

  TEST_CASE("random chains verify and survive serialization") {
    gen::Rng rng(99);
    for (auto mix : {gen::Mix::kDac, gen::Mix::kMixed}) {
      auto log = gen::generate_log(mix, rng.below(1000), 120);
      auto ledger = gen::chain_of(log.records, rng);
      CHECK(verify_chain(ledger).ok);
      CHECK(deserialize(serialize(ledger)) == ledger);
      CHECK(ledger.records() == log.records);
    }
  }
}

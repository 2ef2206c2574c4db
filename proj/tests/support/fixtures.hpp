#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "beac/domain_state.hpp"
#include "beac/ledger.hpp"
#include "beac/validator.hpp"

namespace fixture {

using namespace beac;

inline const Identity& alice() {
  static const Identity id = Identity::from_seed("alice");
  return id;
}
inline const Identity& bob() {
  static const Identity id = Identity::from_seed("bob");
  return id;
}
inline const Identity& carol() {
  static const Identity id = Identity::from_seed("carol");
  return id;
}
inline const Identity& home() {
  static const Identity id = Identity::from_seed("home");
  return id;
}
inline const Identity& cam() {
  static const Identity id = Identity::from_seed("cam");
  return id;
}
inline const Identity& lock() {
  static const Identity id = Identity::from_seed("lock");
  return id;
}

inline Fingerprint A() { return alice().fingerprint(); }
inline Fingerprint B() { return bob().fingerprint(); }
inline Fingerprint C() { return carol().fingerprint(); }
inline Fingerprint HOME() { return home().fingerprint(); }
inline Fingerprint CAM() { return cam().fingerprint(); }
inline Fingerprint LOCK() { return lock().fingerprint(); }

inline SignedRecord signed_by(const Identity& who, Payload p,
                              std::uint64_t ts = 1000) {
  return sign_record(std::move(p), who, ts);
}

// Issuer set, no signature: enough for state machines that only look at
// the issuer fingerprint.
inline SignedRecord unsigned_from(const Fingerprint& issuer, Payload p) {
  SignedRecord r;
  r.payload = std::move(p);
  r.issuer = issuer;
  return r;
}

inline DeviceRegistration cam_registration() {
  return DeviceRegistration{CAM(), A(), {"stream", "snapshot"}};
}

// The three-record home log: domain, camera, EXECUTE for bob.
inline std::vector<SignedRecord> dac_records() {
  return {
      signed_by(alice(), DomainRegistration{HOME(), A(), AccessModel::kDac},
                1'000),
      signed_by(alice(), DeviceRegistration{CAM(), A(), {}}, 2'000),
      signed_by(alice(),
                PermissionGranted{B(), CAM(), std::nullopt,
                                  PermissionType::kExecute},
                3'000),
  };
}

inline const ValidatorCluster& cluster() {
  static const ValidatorCluster c{ClusterConfig{}};
  return c;
}

// One record per block, certified by the three honest validators of f = 1.
inline Ledger dac_ledger() {
  Ledger ledger(cluster().ledger_config());
  for (auto& r : dac_records()) {
    ledger.append_block({r}, cluster().certify());
  }
  return ledger;
}

inline std::filesystem::path data_dir() { return BEAC_TEST_DATA; }

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Bytes read_bytes(const std::filesystem::path& p) {
  auto text = read_text(p);
  return {text.begin(), text.end()};
}

inline void write_bytes(const std::filesystem::path& p, ByteView data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
}

// Scratch directory unique to the running test binary.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("beac-tests-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace fixture

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "beac/bench.hpp"
#include "beac/dac.hpp"
#include "beac/protocols.hpp"
#include "beac/token.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/tables.hpp"

using namespace fixture;

namespace {

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ |= !ok;
  }
  void note(const std::string& text) { notes_ += (notes_.empty() ? "" : ", ") + text; }

  bool failed() const { return failed_; }
  std::size_t checks() const { return checks_; }
  const std::vector<std::string>& failures() const { return failures_; }
  const std::string& notes() const { return notes_; }

 private:
  bool failed_ = false;
  std::size_t checks_ = 0;
  std::vector<std::string> failures_;
  std::string notes_;
};

std::optional<ErrorCode> code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

Bytes text_bytes(std::string_view s) { return {s.begin(), s.end()}; }

LatencyModel skewed_model() {
  LatencyModel m;
  m.t_int = Distribution::lognormal(150, 165);
  m.t_loc = Distribution::deterministic(1);
  m.t_p2p = Distribution::lognormal(890, 7780);
  return m;
}

// --- 1 ----------------------------------------------------------------------

void replay_equivalence(Check& c) {
  auto start = std::chrono::steady_clock::now();
  constexpr std::uint64_t kSequences = 1000;
  std::size_t records = 0;
  for (auto mix : {gen::Mix::kDac, gen::Mix::kAbac, gen::Mix::kRbac, gen::Mix::kMixed}) {
    for (std::uint64_t seed = 1; seed <= kSequences; ++seed) {
      auto log = gen::generate_log(mix, seed * 7919 + static_cast<std::uint64_t>(mix), 24);
      records += log.records.size();
      auto world = replay_world(log.records);
      c.expect(world == log.incremental,
               std::string(gen::to_string(mix)) + " seed " + std::to_string(seed) +
                   ": world replay differs");
      for (const auto& user : log.activation_users) {
        auto replayed = replay_domain(log.records, user);
        const auto* live = log.incremental.domain(replayed.domain());
        c.expect(live && replayed == *live,
                 std::string(gen::to_string(mix)) + " seed " + std::to_string(seed) +
                     ": domain replay differs");
      }
    }
  }
  auto elapsed = seconds_since(start);
  c.expect(elapsed < 60, "took " + fixed(elapsed) + " s");
  c.note(std::to_string(4 * kSequences) + " sequences, " + std::to_string(records) +
         " records, " + fixed(elapsed) + " s");
}

// --- 2 ----------------------------------------------------------------------

void reconstruction_fixtures(Check& c) {
  auto records = dac_records();
  auto tree = build_device_tree(records, A());
  c.expect(tree.root().domain == HOME() && tree.root().owner == A(), "root");
  c.expect(tree.root().children == std::set<Fingerprint>{CAM()}, "root children");
  c.expect(tree.size() == 1, "tree size");
  const auto* node = tree.find(CAM());
  c.expect(node && node->parent == A(), "camera parent");
  c.expect(node && node->acl == Acl{{B(), PermissionType::kExecute}}, "camera acl");
  c.expect(render(replay_domain(records, A())) == read_text(data_dir() / "dac_fixture.dump"),
           "golden state dump");

  // Attribute fixture: two attributes, one deleted, a user assignment and a
  // GRANT tuple.
  auto d = HOME();
  std::vector<SignedRecord> abac{
      signed_by(alice(), DomainRegistration{d, A(), AccessModel::kAbac}, 1),
      signed_by(alice(), cam_registration(), 2),
      signed_by(alice(), NewAttribute{d, text_bytes("staff"), 1}, 3),
      signed_by(alice(), NewAttribute{d, text_bytes("temp"), 2}, 4),
      signed_by(alice(), AssignAttributeUser{d, 1, B()}, 5),
      signed_by(alice(), AssignAttributeUser{d, 2, B()}, 6),
      signed_by(alice(), DeleteAttribute{d, 2}, 7),
      signed_by(alice(), AssignAttributePermission{d, 1, 1, PermissionType::kExecute,
                                                   Effect::kGrant},
                8),
  };
  auto state = replay_domain(abac, A());
  const auto* attrs = state.attributes();
  c.expect(attrs && attrs->live().size() == 1 && attrs->live().count(1), "live attributes");
  c.expect(attrs && attrs->nullified() == std::set<Uid>{2}, "nullified attributes");
  c.expect(attrs && attrs->user_assignments() ==
                        std::map<Fingerprint, std::set<Uid>>{{B(), {1}}},
           "user assignments");
  c.expect(attrs && attrs->tuples().size() == 1, "tuples");
  c.expect(attrs && attrs->next_uid() == 3, "next uid");

  // Role fixture: admin over guest gives one edge; the reverse edge is a cycle.
  RoleRegistry roles(d);
  apply_rbac(roles, NewRole{d, "admin", 1});
  apply_rbac(roles, NewRole{d, "guest", 2});
  apply_rbac(roles, AddRoleHierarchy{d, 1, 2});
  c.expect(roles.hierarchy() == std::set<std::pair<Uid, Uid>>{{1, 2}}, "role edge");
  c.expect(code_of([&] { apply_rbac(roles, AddRoleHierarchy{d, 2, 1}); }) ==
               ErrorCode::kHierarchyCycle,
           "role cycle");
  c.note("DAC, ABAC and RBAC fixtures");
}

// --- 3 ----------------------------------------------------------------------

void uid_stress(Check& c, gen::Rng& rng, std::size_t ops) {
  auto d = HOME();
  AttributeRegistry attrs(d);
  RoleRegistry roles(d);
  std::set<Uid> attr_issued;
  std::set<Uid> role_issued;
  std::vector<Fingerprint> users{A(), B(), C()};
  auto any_uid = [&](Uid next) { return static_cast<Uid>(1 + rng.below(next + 2)); };

  for (std::size_t i = 0; i < ops; ++i) {
    bool attribute = rng.chance(0.5);
    Uid next = attribute ? attrs.next_uid() : roles.next_uid();
    Uid uid = rng.chance(0.5) ? next + static_cast<Uid>(rng.below(2)) : any_uid(next);
    auto kind = rng.below(5);
    auto user = rng.pick(users);
    try {
      if (attribute) {
        switch (kind) {
          case 0: {
            apply_abac(attrs, NewAttribute{d, text_bytes("a"), uid});
            c.expect(attr_issued.insert(uid).second,
                     "attribute UID " + std::to_string(uid) + " issued twice");
            break;
          }
          case 1: apply_abac(attrs, DeleteAttribute{d, uid}); break;
          case 2: apply_abac(attrs, AssignAttributeUser{d, uid, user}); break;
          case 3:
            apply_abac(attrs, AssignAttributePermission{d, uid, any_uid(next),
                                                        gen::any_permission(rng),
                                                        gen::any_effect(rng)});
            break;
          default: apply_abac(attrs, AssignAttributeDevice{d, uid, CAM(), std::nullopt});
        }
      } else {
        switch (kind) {
          case 0: {
            apply_rbac(roles, NewRole{d, "r", uid});
            c.expect(role_issued.insert(uid).second,
                     "role UID " + std::to_string(uid) + " issued twice");
            break;
          }
          case 1: apply_rbac(roles, DeleteRole{d, uid}); break;
          case 2: apply_rbac(roles, AssignRoleUser{d, uid, user}); break;
          case 3: apply_rbac(roles, AddRoleHierarchy{d, uid, any_uid(next)}); break;
          default:
            apply_rbac(roles, AssignRolePermission{d, uid, CAM(), std::nullopt,
                                                   gen::any_permission(rng),
                                                   gen::any_effect(rng)});
        }
      }
    } catch (const Error&) {
    }
    if (i % 997 == 0 || i + 1 == ops) {
      for (auto u : attrs.nullified()) c.expect(!attrs.is_live(u), "attribute live and nullified");
      for (auto u : roles.nullified()) c.expect(!roles.is_live(u), "role live and nullified");
    }
  }
  c.note(std::to_string(attr_issued.size() + role_issued.size()) + " UIDs issued, " +
         std::to_string(attrs.nullified().size() + roles.nullified().size()) + " nullified");
}

void batch_atomicity(Check& c, gen::Rng& rng) {
  auto d = HOME();
  std::size_t batches = 0;
  for (int round = 0; round < 200; ++round) {
    RoleRegistry base(d);
    for (Uid u = 1; u <= 4; ++u) apply_rbac(base, NewRole{d, "r", u});
    std::size_t length = 1 + rng.below(6);
    std::vector<RoleOp> good;
    RoleRegistry probe = base;
    while (good.size() < length) {
      RoleOp op;
      switch (rng.below(4)) {
        case 0: op = AssignRoleUser{d, static_cast<Uid>(1 + rng.below(4)), B()}; break;
        case 1:
          op = AddRoleHierarchy{d, static_cast<Uid>(1 + rng.below(4)),
                                static_cast<Uid>(1 + rng.below(4))};
          break;
        case 2:
          op = AssignRolePermission{d, static_cast<Uid>(1 + rng.below(4)), CAM(),
                                    std::nullopt, gen::any_permission(rng),
                                    gen::any_effect(rng)};
          break;
        default: op = NewRole{d, "n", probe.next_uid()};
      }
      auto trial = probe;
      if (!code_of([&] { apply_rbac_batch(trial, std::vector<RoleOp>{op}); })) {
        probe = trial;
        good.push_back(op);
      }
    }
    for (std::size_t pos = 0; pos <= good.size(); ++pos) {
      auto ops = good;
      ops.insert(ops.begin() + static_cast<std::ptrdiff_t>(pos), DeleteRole{d, 99});
      auto reg = base;
      std::optional<std::size_t> index;
      std::optional<ErrorCode> code;
      try {
        apply_rbac_batch(reg, ops);
      } catch (const Error& e) {
        code = e.code();
        index = e.index();
      }
      c.expect(code == ErrorCode::kBatchAbort && index == pos,
               "batch failure at " + std::to_string(pos) + " not reported");
      c.expect(reg == base, "batch failure at " + std::to_string(pos) + " left changes");
      ++batches;
    }
    auto reg = base;
    apply_rbac_batch(reg, good);
    c.expect(reg == probe, "clean batch differs from op-by-op application");
  }
  c.note(std::to_string(batches) + " aborted batches");
}

void immutability(Check& c) {
  std::vector<SignedRecord> dup{
      signed_by(alice(), DomainRegistration{HOME(), A(), AccessModel::kDac}, 1),
      signed_by(alice(), DeviceRegistration{CAM(), A(), {}}, 2),
      signed_by(alice(), DeviceRegistration{CAM(), A(), {"stream"}}, 3),
  };
  c.expect(code_of([&] { build_device_tree(dup, A()); }) ==
               ErrorCode::kImmutabilityViolation,
           "duplicate registration accepted");
  gen::Rng rng(2024);
  uid_stress(c, rng, 100'000);
  batch_atomicity(c, rng);
}

// --- 4 ----------------------------------------------------------------------

void denial_precedence(Check& c) {
  std::size_t rows = 0;
  for (auto model : {AccessModel::kAbac, AccessModel::kRbac}) {
    for (const auto& row : tables::kRows) {
      auto got = tables::decide(tables::build(model, row), row);
      c.expect(got == row.expected,
               std::string(to_string(model)) + " " + tables::describe(row));
      ++rows;
    }
  }
  c.note(std::to_string(rows) + " rows over ABAC and RBAC");
}

// --- 5 ----------------------------------------------------------------------

void consensus_thresholds(Check& c) {
  std::size_t configs = 0;
  for (std::uint32_t f = 1; f <= 3; ++f) {
    std::uint32_t n = 3 * f + 1;
    for (std::uint32_t k = 0; k <= f + 1; ++k) {
      std::set<std::uint32_t> faulty;
      gen::Rng rng(f * 31 + k);
      while (faulty.size() < k) faulty.insert(static_cast<std::uint32_t>(rng.below(n)));
      ClusterConfig config;
      config.f = f;
      config.faulty = faulty;
      ValidatorCluster cluster(config);
      auto label = "f=" + std::to_string(f) + " faulty=" + std::to_string(k);
      c.expect(cluster.n() == n && cluster.quorum() == 2 * f + 1, label + " sizes");
      bool live = k <= f;
      c.expect(cluster.can_commit() == live, label + " liveness");
      LiveSampler lat(LatencyModel{}, 1);
      auto code = code_of([&] {
        auto cert = cluster.certify();
        Ledger ledger(cluster.ledger_config());
        ledger.append_block({dac_records()[0]}, cert);
        cluster.commit(lat);
      });
      c.expect(live ? !code : code == ErrorCode::kStallTimeout, label + " commit");
      ++configs;
    }
  }
  c.note(std::to_string(configs) + " configurations, f in 1..3");
}

// --- 6 ----------------------------------------------------------------------

void closed_forms(Check& c) {
  World world(ClusterConfig{}, 1);
  auto ids = bootstrap_home(world);
  AccessRequest req;
  req.user = ids.resident.fingerprint();
  req.device = ids.camera.fingerprint();
  req.service = ids.service;
  req.eligibility = Eligibility::kPermanentUser;
  LiveSampler lat(LatencyModel{}, 1);

  req.path = PathKind::kFull;
  auto full = run_access(req, world, lat);
  req.path = PathKind::kShortcutInternet;
  auto internet = run_access(req, world, lat);
  world.topology.move_peer(req.user, "home");
  req.path = PathKind::kShortcutLocal;
  auto local = run_access(req, world, lat);

  c.expect(full.total == 2091.0, "full " + fixed(full.total, 3));
  c.expect(internet.total == 890.0, "internet " + fixed(internet.total, 3));
  c.expect(local.total == 3.0, "local " + fixed(local.total, 3));
  for (const auto* t : {&full, &internet, &local}) {
    c.expect(t->outcome == Outcome::kGranted, "outcome");
  }
  c.note("full " + fixed(full.total, 0) + " ms, internet " + fixed(internet.total, 0) +
         " ms, local " + fixed(local.total, 0) + " ms");
}

// --- 7 ----------------------------------------------------------------------

void distributional_comparison(Check& c) {
  auto start = std::chrono::steady_clock::now();
  ScenarioConfig config;
  config.trials = 500;
  config.seed = 42;
  config.latency = skewed_model();
  auto run = run_scenario(config);

  std::map<std::uint32_t, std::map<PathKind, double>> by_trial;
  for (const auto& r : run.records) by_trial[r.trial][r.trace.path] = r.trace.total;
  std::size_t dominated = 0;
  for (auto& [trial, totals] : by_trial) {
    dominated += totals[PathKind::kShortcutLocal] <= totals[PathKind::kShortcutInternet] &&
                 totals[PathKind::kShortcutInternet] <= totals[PathKind::kFull];
  }
  c.expect(by_trial.size() == 500, "trial count");
  c.expect(dominated == by_trial.size(), "dominance " + std::to_string(dominated) + "/500");
  c.expect(run.report.dominance_violations == 0, "report dominance");

  const auto* internet = run.report.find(PathKind::kFull, PathKind::kShortcutInternet);
  c.expect(internet && internet->p50 >= 0.30 && internet->p50 <= 0.65,
           "internet p50 savings " + (internet ? fixed(internet->p50 * 100) : "?") + "%");
  for (const auto& s : run.report.savings) {
    c.expect(s.p50 > 0 && s.p99 > 0, std::string(to_string(s.faster)) + " vs " +
                                          std::string(to_string(s.slower)) + " not positive");
  }
  auto elapsed = seconds_since(start);
  c.expect(elapsed < 30, "took " + fixed(elapsed) + " s");

  std::ostringstream os;
  os << "dominance " << dominated << "/500";
  for (const auto& s : run.report.savings) {
    os << ", " << to_string(s.faster) << " vs " << to_string(s.slower) << " p50 "
       << fixed(s.p50 * 100, 1) << "% p99 " << fixed(s.p99 * 100, 1) << "%";
  }
  os << ", " << fixed(elapsed) << " s";
  c.note(os.str());
}

// --- 8 ----------------------------------------------------------------------

void percentile_fidelity(Check& c) {
  struct Target {
    const char* name;
    double median;
    double p99;
  };
  std::uint64_t seed = 8;
  for (auto t : {Target{"T_int", 150, 165}, Target{"T_p2p", 890, 7780}}) {
    auto dist = Distribution::lognormal(t.median, t.p99);
    std::mt19937_64 rng(seed++);
    std::vector<double> v(100'000);
    for (auto& x : v) x = dist.sample(rng);
    std::sort(v.begin(), v.end());
    auto m = percentile(v, 50);
    auto p = percentile(v, 99);
    auto em = m / t.median - 1;
    auto ep = p / t.p99 - 1;
    c.expect(std::abs(em) <= 0.05, std::string(t.name) + " median " + fixed(m));
    c.expect(std::abs(ep) <= 0.05, std::string(t.name) + " p99 " + fixed(p));
    c.note(std::string(t.name) + " median " + fixed(em * 100) + "% p99 " + fixed(ep * 100) +
           "%");
  }
}

// --- 9 ----------------------------------------------------------------------

TokenRequest camera_request() {
  TokenRequest req;
  req.user = B();
  req.device = CAM();
  req.kind = TokenKind::kSingleUse;
  return req;
}

void token_linearity(Check& c) {
  constexpr std::size_t kTokens = 10'000;
  constexpr int kThreads = 4;
  TokenService svc(HOME(), 9);
  std::vector<std::pair<AccessToken, SessionKey>> issued;
  issued.reserve(kTokens);
  for (std::size_t i = 0; i < kTokens; ++i) {
    auto pair = svc.issue(Decision::kPermit, camera_request(), 1);
    svc.ratify(pair.first.id);
    issued.push_back(pair);
  }
  std::vector<std::atomic<int>> wins(kTokens);
  std::atomic<int> other_errors{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < kThreads; ++t) {
    pool.emplace_back([&, t] {
      std::vector<std::size_t> order(kTokens);
      for (std::size_t i = 0; i < kTokens; ++i) order[i] = i;
      std::mt19937_64 rng(static_cast<std::uint64_t>(t) + 100);
      std::shuffle(order.begin(), order.end(), rng);
      for (auto i : order) {
        try {
          svc.redeem(issued[i].first.id, issued[i].second.key, 2);
          ++wins[i];
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kReplay) ++other_errors;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  std::size_t exactly_one = 0;
  for (auto& w : wins) exactly_one += w.load() == 1;
  c.expect(exactly_one == kTokens, std::to_string(exactly_one) + " tokens won exactly once");
  c.expect(other_errors.load() == 0, "unexpected refusals");

  gen::Rng rng(99);
  Bytes secret = text_bytes("12345678901234567890");
  std::size_t inside_ok = 0;
  std::size_t outside_refused = 0;
  constexpr int kTotp = 10'000;
  for (int i = 0; i < kTotp; ++i) {
    TotpConfig config{secret};
    config.tolerance = static_cast<std::uint32_t>(rng.below(3));
    TotpGrant grant(config, camera_request());
    TokenService guests(HOME(), 1);
    std::uint64_t at = 1'000'000'000 + rng.below(1'000'000'000);
    auto pass = grant.issue(at);
    auto delta = static_cast<std::int64_t>(rng.below(300'001)) - 150'000;
    auto then = static_cast<std::uint64_t>(static_cast<std::int64_t>(at) + delta);
    auto gap = static_cast<std::int64_t>(then / 30'000) - static_cast<std::int64_t>(at / 30'000);
    bool inside = std::abs(gap) <= static_cast<std::int64_t>(config.tolerance);
    bool ok = !code_of([&] { grant.redeem(pass, then, guests); });
    c.expect(ok == inside, "TOTP step gap " + std::to_string(gap));
    inside_ok += ok && inside;
    outside_refused += !ok && !inside;
  }
  c.note(std::to_string(kTokens) + " tokens x " + std::to_string(kThreads) + " threads, " +
         std::to_string(inside_ok + outside_refused) + "/" + std::to_string(kTotp) +
         " TOTP cases");
}

// --- 10 ---------------------------------------------------------------------

void determinism(Check& c) {
  ScenarioConfig config;
  config.trials = 200;
  config.seed = 1234;
  config.latency = skewed_model();
  config.latency.relay_probability = 0.2;
  auto digest = [&] {
    auto run = run_scenario(config);
    auto trace = sha256(trace_jsonl(run.records));
    auto report = sha256(format_report(run.report));
    return std::make_pair(to_hex(trace), to_hex(report));
  };
  auto a = digest();
  auto b = digest();
  c.expect(a.first == b.first, "trace hashes differ");
  c.expect(a.second == b.second, "report hashes differ");
  config.seed = 1235;
  c.expect(digest().first != a.first, "seed has no effect");
  c.note("trace " + a.first.substr(0, 16) + ", report " + a.second.substr(0, 16));
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    void (*run)(Check&);
  };
  const Criterion criteria[] = {
      {1, "replay equivalence", replay_equivalence},
      {2, "reconstruction fixtures", reconstruction_fixtures},
      {3, "immutability and lifecycle", immutability},
      {4, "denial precedence", denial_precedence},
      {5, "consensus thresholds", consensus_thresholds},
      {6, "closed-form latencies", closed_forms},
      {7, "distributional comparison", distributional_comparison},
      {8, "percentile fidelity", percentile_fidelity},
      {9, "token linearity", token_linearity},
      {10, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& criterion : criteria) {
    Check c;
    try {
      criterion.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << (c.failed() ? "FAIL" : "PASS") << " " << criterion.id << " "
              << criterion.title << " (" << c.checks() << " checks";
    if (!c.notes().empty()) std::cout << "; " << c.notes();
    std::cout << ")\n";
    for (const auto& f : c.failures()) std::cout << "    " << f << "\n";
    std::cout.flush();
    failed += c.failed();
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << (10 - failed) << "/10\n";
  return failed ? 1 : 0;
}

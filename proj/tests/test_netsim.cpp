#include <doctest.h>

#include <algorithm>

#include "beac/bench.hpp"
#include "beac/netsim.hpp"
#include "support/fixtures.hpp"

using namespace fixture;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kConfig;
}

std::vector<double> draw(const Distribution& d, std::size_t n,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = d.sample(rng);
  std::sort(out.begin(), out.end());
  return out;
}

struct Net {
  Topology topo;
  Fingerprint user = A();
  Fingerprint hub = HOME();
  Fingerprint cam_fp = CAM();
  Fingerprint peer_b = B();
  Fingerprint peer_c = C();

  Net() {
    topo.add_peer({user, "user", "remote", PeerRole::kUser});
    topo.add_peer({hub, "hub", "home", PeerRole::kHub});
    topo.add_peer({cam_fp, "cam", "home", PeerRole::kDevice});
    topo.add_peer({peer_b, "b", "office", PeerRole::kUser});
    topo.add_peer({peer_c, "c", "cafe", PeerRole::kUser});
  }
};

}  // namespace

TEST_SUITE("distributions") {
  TEST_CASE("deterministic returns its value every call") {
    LiveSampler s(LatencyModel{}, 9);
    for (int i = 0; i < 100; ++i) CHECK(s.sample(LatencyKind::kInt) == 150.0);
    CHECK(s.sample(LatencyKind::kLoc) == 1.0);
    CHECK(s.sample(LatencyKind::kP2p) == 890.0);
  }

  TEST_CASE("lognormal parameters match the closed-form solve") {
    auto p2p = Distribution::lognormal(890, 7780);
    CHECK(p2p.mu() == doctest::Approx(6.7912214627261855).epsilon(1e-12));
    CHECK(p2p.sigma() == doctest::Approx(0.931971601770935).epsilon(1e-12));
    auto tint = Distribution::lognormal(150, 165);
    CHECK(tint.mu() == doctest::Approx(5.0106352940962555).epsilon(1e-12));
    CHECK(tint.sigma() == doctest::Approx(0.04096987422554823).epsilon(1e-12));
  }

  TEST_CASE("empirical median of the P2P model is within 5 percent") {
    auto v = draw(Distribution::lognormal(890, 7780), 100'000, 1);
    auto median = percentile(v, 50);
    CHECK(std::abs(median / 890.0 - 1) <= 0.05);
    auto p99 = percentile(v, 99);
    CHECK(std::abs(p99 / 7780.0 - 1) <= 0.05);
  }

  TEST_CASE("empirical P99 of the internet model is within 5 percent") {
    auto v = draw(Distribution::lognormal(150, 165), 100'000, 2);
    CHECK(std::abs(percentile(v, 99) / 165.0 - 1) <= 0.05);
    CHECK(std::abs(percentile(v, 50) / 150.0 - 1) <= 0.05);
  }

  TEST_CASE("invalid parameters are configuration errors") {
    CHECK(code_of([] { Distribution::deterministic(-1); }) == ErrorCode::kConfig);
    CHECK(code_of([] { Distribution::lognormal(0, 5); }) == ErrorCode::kConfig);
    CHECK(code_of([] { Distribution::lognormal(10, 5); }) == ErrorCode::kConfig);
  }
}

TEST_SUITE("samplers") {
  TEST_CASE("trial samples rewind to the same values") {
    LatencyModel m;
    m.t_int = Distribution::lognormal(150, 165);
    m.t_p2p = Distribution::lognormal(890, 7780);
    TrialSamples s(m, 77);
    std::vector<double> first{s.sample(LatencyKind::kInt), s.sample(LatencyKind::kP2p),
                              s.sample(LatencyKind::kInt), s.uniform()};
    s.rewind();
    // Interleaving differs, per-kind positions do not.
    auto p2p = s.sample(LatencyKind::kP2p);
    auto i0 = s.sample(LatencyKind::kInt);
    auto u = s.uniform();
    auto i1 = s.sample(LatencyKind::kInt);
    CHECK(std::vector<double>{i0, p2p, i1, u} == first);
    CHECK(s.drawn(LatencyKind::kInt) == std::vector<double>{i0, i1});
  }

  TEST_CASE("samplers are reproducible from the seed") {
    LatencyModel m;
    m.t_int = Distribution::lognormal(150, 165);
    LiveSampler a(m, 5), b(m, 5), c(m, 6);
    for (int i = 0; i < 50; ++i) {
      auto x = a.sample(LatencyKind::kInt);
      CHECK(x == b.sample(LatencyKind::kInt));
      (void)c.sample(LatencyKind::kInt);
    }
    CHECK(a.sample(LatencyKind::kInt) != c.sample(LatencyKind::kInt));
  }

  TEST_CASE("splitmix64 reference values") {
    // First outputs of the reference generator seeded with 0 are
    // splitmix64(0x9e3779b97f4a7c15 * k) for k = 1, 2.
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
    CHECK(splitmix64(0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
  }
}

TEST_SUITE("clock") {
  TEST_CASE("events run in time order, ties in schedule order") {
    SimClock clock;
    std::vector<int> order;
    clock.schedule(5, [&] { order.push_back(2); });
    clock.schedule(1, [&] { order.push_back(1); });
    clock.schedule(5, [&] { order.push_back(3); });
    clock.run();
    CHECK(order == std::vector<int>{1, 2, 3});
    CHECK(clock.now() == 5);
  }

  TEST_CASE("scheduling in the past is refused") {
    SimClock clock;
    clock.schedule(10, [] {});
    clock.run();
    CHECK(code_of([&] { clock.schedule(9, [] {}); }) == ErrorCode::kConsistency);
  }

  TEST_CASE("run_until stops at the horizon") {
    SimClock clock;
    int fired = 0;
    clock.schedule(1, [&] { ++fired; });
    clock.schedule(3, [&] { ++fired; });
    clock.run_until(2);
    CHECK(fired == 1);
    CHECK(clock.now() == 2);
    CHECK(clock.pending() == 1);
  }

  TEST_CASE("event log lines") {
    EventLog log;
    log.record(1.5, "deliver", "x");
    CHECK(log.text() == "1.500 deliver x\n");
    CHECK(format_ms(2091) == "2091.000");
  }
}

TEST_SUITE("pub-sub") {
  TEST_CASE("one cross-subnet subscriber gets one delivery at T_int") {
    Net net;
    net.topo.subscribe("t", net.hub);
    SimClock clock;
    LiveSampler lat(LatencyModel{}, 1);
    int delivered = 0;
    auto out = publish(net.topo, clock, lat, net.user, "t", "hello", nullptr,
                       [&](const Delivery&) { ++delivered; });
    REQUIRE(out.size() == 1);
    CHECK(out[0].at == 150.0);
    clock.run();
    CHECK(delivered == 1);
  }

  TEST_CASE("three subscribers get three independent samples") {
    Net net;
    for (auto fp : {net.hub, net.peer_b, net.peer_c}) net.topo.subscribe("t", fp);
    LatencyModel m;
    m.t_int = Distribution::lognormal(150, 165);
    TrialSamples lat(m, 3);
    SimClock clock;
    auto out = publish(net.topo, clock, lat, net.user, "t", "x");
    CHECK(out.size() == 3);
    CHECK(lat.drawn(LatencyKind::kInt).size() == 3);
    std::set<double> times;
    for (const auto& d : out) times.insert(d.at);
    CHECK(times.size() == 3);
  }

  TEST_CASE("same-subnet subscriber is reached at T_loc") {
    Net net;
    net.topo.subscribe("t", net.cam_fp);
    SimClock clock;
    LiveSampler lat(LatencyModel{}, 1);
    EventLog log;
    auto out = publish(net.topo, clock, lat, net.hub, "t", "x", &log);
    CHECK(out[0].at == 1.0);
    clock.run();
    CHECK(log.lines() == std::vector<std::string>{"1.000 deliver t -> cam x"});
  }

  TEST_CASE("unknown topic is a logged no-op") {
    Net net;
    SimClock clock;
    LiveSampler lat(LatencyModel{}, 1);
    EventLog log;
    CHECK(publish(net.topo, clock, lat, net.user, "none", "x", &log).empty());
    CHECK(log.lines().size() == 1);
    CHECK(clock.pending() == 0);
  }
}

TEST_SUITE("p2p") {
  TEST_CASE("same subnet costs T_loc") {
    Net net;
    SimClock clock;
    LiveSampler lat(LatencyModel{}, 1);
    auto c = connect_p2p(net.topo, clock, lat, net.hub, net.cam_fp);
    CHECK(c.established_at == 1.0);
    CHECK_FALSE(c.relayed);
  }

  TEST_CASE("cross subnet deterministic costs 890 ms") {
    Net net;
    SimClock clock;
    LiveSampler lat(LatencyModel{}, 1);
    auto c = connect_p2p(net.topo, clock, lat, net.user, net.cam_fp);
    CHECK(c.established_at == 890.0);
  }

  TEST_CASE("relay probability 1 always relays") {
    Net net;
    SimClock clock;
    LatencyModel m;
    m.relay_probability = 1.0;
    LiveSampler lat(m, 1);
    for (int i = 0; i < 20; ++i) {
      CHECK(connect_p2p(net.topo, clock, lat, net.user, net.cam_fp).relayed);
    }
  }

  TEST_CASE("self connection and unknown peers are errors") {
    Net net;
    SimClock clock;
    LiveSampler lat(LatencyModel{}, 1);
    CHECK(code_of([&] { connect_p2p(net.topo, clock, lat, net.user, net.user); }) ==
          ErrorCode::kConsistency);
    CHECK(code_of([&] { connect_p2p(net.topo, clock, lat, net.user, LOCK()); }) ==
          ErrorCode::kConfig);
  }
}

TEST_SUITE("topology") {
  TEST_CASE("peers move between subnets and devices attach to one hub") {
    Net net;
    CHECK_FALSE(net.topo.same_subnet(net.user, net.hub));
    net.topo.move_peer(net.user, "home");
    CHECK(net.topo.same_subnet(net.user, net.hub));
    net.topo.attach_device(net.cam_fp, net.hub);
    CHECK(net.topo.hub_of(net.cam_fp) == net.hub);
    CHECK(net.topo.find("cam")->id == net.cam_fp);
    CHECK(net.topo.find(LOCK()) == nullptr);
    net.topo.set_firewalled("home", true);
    CHECK(net.topo.firewalled("home"));
    CHECK_FALSE(net.topo.firewalled("remote"));
  }
}

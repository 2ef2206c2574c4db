#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "beac/crypto.hpp"

namespace beac {

enum class LatencyKind : std::uint8_t { kInt = 0, kLoc = 1, kP2p = 2 };
std::string_view to_string(LatencyKind kind);

// Either a constant or a lognormal fitted to a median and a P99.
class Distribution {
 public:
  enum class Shape { kDeterministic, kLognormal };

  static Distribution deterministic(double value_ms);
  static Distribution lognormal(double median_ms, double p99_ms);

  Shape shape() const { return shape_; }
  double median() const { return median_; }
  double p99() const { return p99_; }
  // Parameters of the underlying normal.
  double mu() const;
  double sigma() const;

  double sample(std::mt19937_64& rng) const;
  std::string describe() const;

  bool operator==(const Distribution&) const = default;

 private:
  Distribution(Shape shape, double median, double p99)
      : shape_(shape), median_(median), p99_(p99) {}

  Shape shape_;
  double median_;
  double p99_;
};

// 0.99 quantile of the standard normal.
inline constexpr double kZ99 = 2.3263478740408408;

struct LatencyModel {
  Distribution t_int = Distribution::deterministic(150);
  Distribution t_loc = Distribution::deterministic(1);
  Distribution t_p2p = Distribution::deterministic(890);
  // Chance that hole punching fails and traffic is relayed.
  double relay_probability = 0.0;

  const Distribution& get(LatencyKind kind) const;
};

std::uint64_t splitmix64(std::uint64_t x);

// Where protocol steps draw their durations from.
class LatencySource {
 public:
  virtual ~LatencySource() = default;
  virtual double sample(LatencyKind kind) = 0;
  // Uniform [0, 1) draw for success/failure decisions.
  virtual double uniform() = 0;
  virtual const LatencyModel& model() const = 0;
};

// One generator shared by every draw, in call order.
class LiveSampler : public LatencySource {
 public:
  LiveSampler(LatencyModel model, std::uint64_t seed)
      : model_(std::move(model)), rng_(seed) {}

  double sample(LatencyKind kind) override;
  double uniform() override;
  const LatencyModel& model() const override { return model_; }

 private:
  LatencyModel model_;
  std::mt19937_64 rng_;
};

// Independent lazily extended stream per latency kind. rewind() restarts
// every stream, so several protocol runs in one trial see the same values
// in the same positions.
class TrialSamples : public LatencySource {
 public:
  TrialSamples(LatencyModel model, std::uint64_t trial_seed);

  double sample(LatencyKind kind) override;
  double uniform() override;
  const LatencyModel& model() const override { return model_; }

  void rewind();
  // Values handed out since the last rewind, per kind.
  std::vector<double> drawn(LatencyKind kind) const;

 private:
  struct Stream {
    std::mt19937_64 rng;
    std::vector<double> values;
    std::size_t cursor = 0;
  };

  LatencyModel model_;
  std::array<Stream, 4> streams_;  // int, loc, p2p, uniform
};

// Virtual time in milliseconds with an ordered event queue.
class SimClock {
 public:
  using Action = std::function<void()>;

  double now() const { return now_; }
  std::size_t pending() const { return queue_.size(); }

  // Throws kConsistency when `at` lies in the past.
  std::uint64_t schedule(double at, Action action);
  std::uint64_t schedule_after(double delay, Action action);

  // Executes the next event; false when the queue is empty.
  bool step();
  void run();
  void run_until(double t);

 private:
  struct Event {
    double at;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  double now_ = 0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

// Line-delimited event records.
class EventLog {
 public:
  void record(double at, std::string_view kind, std::string_view detail);
  const std::vector<std::string>& lines() const { return lines_; }
  std::string text() const;
  void clear() { lines_.clear(); }

 private:
  std::vector<std::string> lines_;
};

std::string format_ms(double ms);

enum class PeerRole : std::uint8_t { kUser, kDevice, kHub, kValidator };
std::string_view to_string(PeerRole role);

struct Peer {
  Fingerprint id;
  std::string name;
  std::string subnet;
  PeerRole role = PeerRole::kUser;
};

class Topology {
 public:
  void add_peer(Peer peer);
  void move_peer(const Fingerprint& id, const std::string& subnet);
  const Peer& peer(const Fingerprint& id) const;  // kConfig if unknown
  const Peer* find(const Fingerprint& id) const;
  const Peer* find(std::string_view name) const;
  const std::map<Fingerprint, Peer>& peers() const { return peers_; }

  void set_firewalled(const std::string& subnet, bool firewalled);
  bool firewalled(const std::string& subnet) const;

  // Each device belongs to exactly one hub.
  void attach_device(const Fingerprint& device, const Fingerprint& hub);
  std::optional<Fingerprint> hub_of(const Fingerprint& device) const;

  bool same_subnet(const Fingerprint& a, const Fingerprint& b) const;

  void subscribe(const std::string& topic, const Fingerprint& peer);
  const std::set<Fingerprint>* subscribers(const std::string& topic) const;

 private:
  std::map<Fingerprint, Peer> peers_;
  std::set<std::string> firewalled_;
  std::map<Fingerprint, Fingerprint> device_hub_;
  std::map<std::string, std::set<Fingerprint>> topics_;
};

struct Delivery {
  Fingerprint to;
  double at = 0;
};

// Reliable delivery to every subscriber: T_loc within a subnet, T_int
// otherwise. `on_deliver` runs as a clock event at the delivery time.
std::vector<Delivery> publish(
    const Topology& topology, SimClock& clock, LatencySource& latency,
    const Fingerprint& from, const std::string& topic,
    const std::string& message, EventLog* log = nullptr,
    std::function<void(const Delivery&)> on_deliver = nullptr);

struct Connection {
  Fingerprint a;
  Fingerprint b;
  double established_at = 0;
  bool relayed = false;
};

// Same subnet: T_loc. Otherwise one T_p2p draw; with the model's relay
// probability the connection falls back to a relay.
Connection connect_p2p(const Topology& topology, SimClock& clock,
                       LatencySource& latency, const Fingerprint& a,
                       const Fingerprint& b, EventLog* log = nullptr);

}  // namespace beac

#include "beac/netsim.hpp"

#include <cmath>
#include <cstdio>

#include "beac/error.hpp"

namespace beac {

std::string_view to_string(LatencyKind kind) {
  switch (kind) {
    case LatencyKind::kInt: return "int";
    case LatencyKind::kLoc: return "loc";
    case LatencyKind::kP2p: return "p2p";
  }
  return "?";
}

std::string_view to_string(PeerRole role) {
  switch (role) {
    case PeerRole::kUser: return "user";
    case PeerRole::kDevice: return "device";
    case PeerRole::kHub: return "hub";
    case PeerRole::kValidator: return "validator";
  }
  return "?";
}

Distribution Distribution::deterministic(double value_ms) {
  if (!(value_ms > 0) || !std::isfinite(value_ms)) {
    throw Error(ErrorCode::kConfig, "latency must be positive, got " +
                                        std::to_string(value_ms));
  }
  return Distribution(Shape::kDeterministic, value_ms, value_ms);
}

Distribution Distribution::lognormal(double median_ms, double p99_ms) {
  if (!(median_ms > 0) || !std::isfinite(p99_ms) || !(p99_ms > median_ms)) {
    throw Error(ErrorCode::kConfig,
                "lognormal needs 0 < median < p99, got " +
                    std::to_string(median_ms) + " / " + std::to_string(p99_ms));
  }
  return Distribution(Shape::kLognormal, median_ms, p99_ms);
}

double Distribution::mu() const { return std::log(median_); }

double Distribution::sigma() const {
  return shape_ == Shape::kDeterministic
             ? 0.0
             : (std::log(p99_) - std::log(median_)) / kZ99;
}

double Distribution::sample(std::mt19937_64& rng) const {
  if (shape_ == Shape::kDeterministic) return median_;
  std::lognormal_distribution<double> dist(mu(), sigma());
  return dist(rng);
}

std::string Distribution::describe() const {
  if (shape_ == Shape::kDeterministic) {
    return "deterministic " + format_ms(median_);
  }
  return "lognormal " + format_ms(median_) + " " + format_ms(p99_);
}

const Distribution& LatencyModel::get(LatencyKind kind) const {
  switch (kind) {
    case LatencyKind::kInt: return t_int;
    case LatencyKind::kLoc: return t_loc;
    case LatencyKind::kP2p: return t_p2p;
  }
  return t_int;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double LiveSampler::sample(LatencyKind kind) {
  return model_.get(kind).sample(rng_);
}

double LiveSampler::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
}

TrialSamples::TrialSamples(LatencyModel model, std::uint64_t trial_seed)
    : model_(std::move(model)) {
  for (std::size_t i = 0; i < streams_.size(); ++i) {
    streams_[i].rng.seed(splitmix64(trial_seed ^ splitmix64(i + 1)));
  }
}

double TrialSamples::sample(LatencyKind kind) {
  auto& s = streams_[static_cast<std::size_t>(kind)];
  if (s.cursor == s.values.size()) {
    s.values.push_back(model_.get(kind).sample(s.rng));
  }
  return s.values[s.cursor++];
}

double TrialSamples::uniform() {
  auto& s = streams_[3];
  if (s.cursor == s.values.size()) {
    s.values.push_back(
        std::uniform_real_distribution<double>(0.0, 1.0)(s.rng));
  }
  return s.values[s.cursor++];
}

void TrialSamples::rewind() {
  for (auto& s : streams_) s.cursor = 0;
}

std::vector<double> TrialSamples::drawn(LatencyKind kind) const {
  const auto& s = streams_[static_cast<std::size_t>(kind)];
  return {s.values.begin(), s.values.begin() + s.cursor};
}

std::uint64_t SimClock::schedule(double at, Action action) {
  if (at < now_) {
    throw Error(ErrorCode::kConsistency,
                "event at " + format_ms(at) + " is before now " +
                    format_ms(now_));
  }
  auto seq = seq_++;
  queue_.push(Event{at, seq, std::move(action)});
  return seq;
}

std::uint64_t SimClock::schedule_after(double delay, Action action) {
  return schedule(now_ + delay, std::move(action));
}

bool SimClock::step() {
  if (queue_.empty()) return false;
  auto event = queue_.top();
  queue_.pop();
  now_ = event.at;
  if (event.action) event.action();
  return true;
}

void SimClock::run() {
  while (step()) {
  }
}

void SimClock::run_until(double t) {
  while (!queue_.empty() && queue_.top().at <= t) step();
  if (t > now_) now_ = t;
}

std::string format_ms(double ms) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", ms);
  return buf;
}

void EventLog::record(double at, std::string_view kind,
                      std::string_view detail) {
  std::string line = format_ms(at);
  line += ' ';
  line += kind;
  if (!detail.empty()) {
    line += ' ';
    line += detail;
  }
  lines_.push_back(std::move(line));
}

std::string EventLog::text() const {
  std::string out;
  for (const auto& line : lines_) {
    out += line;
    out += '\n';
  }
  return out;
}

void Topology::add_peer(Peer peer) {
  auto id = peer.id;
  if (!peers_.emplace(id, std::move(peer)).second) {
    throw Error(ErrorCode::kConfig, "peer " + id.label() + " defined twice");
  }
}

void Topology::move_peer(const Fingerprint& id, const std::string& subnet) {
  auto it = peers_.find(id);
  if (it == peers_.end()) {
    throw Error(ErrorCode::kConfig, "unknown peer " + id.label());
  }
  it->second.subnet = subnet;
}

const Peer& Topology::peer(const Fingerprint& id) const {
  const auto* p = find(id);
  if (!p) throw Error(ErrorCode::kConfig, "unknown peer " + id.label());
  return *p;
}

const Peer* Topology::find(const Fingerprint& id) const {
  auto it = peers_.find(id);
  return it == peers_.end() ? nullptr : &it->second;
}

const Peer* Topology::find(std::string_view name) const {
  for (const auto& [id, p] : peers_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void Topology::set_firewalled(const std::string& subnet, bool firewalled) {
  if (firewalled) {
    firewalled_.insert(subnet);
  } else {
    firewalled_.erase(subnet);
  }
}

bool Topology::firewalled(const std::string& subnet) const {
  return firewalled_.count(subnet) != 0;
}

void Topology::attach_device(const Fingerprint& device, const Fingerprint& hub) {
  auto [it, inserted] = device_hub_.emplace(device, hub);
  if (!inserted && it->second != hub) {
    throw Error(ErrorCode::kConfig,
                "device " + device.label() + " already belongs to hub " +
                    it->second.label());
  }
}

std::optional<Fingerprint> Topology::hub_of(const Fingerprint& device) const {
  auto it = device_hub_.find(device);
  if (it == device_hub_.end()) return std::nullopt;
  return it->second;
}

bool Topology::same_subnet(const Fingerprint& a, const Fingerprint& b) const {
  return peer(a).subnet == peer(b).subnet;
}

void Topology::subscribe(const std::string& topic, const Fingerprint& peer) {
  topics_[topic].insert(peer);
}

const std::set<Fingerprint>* Topology::subscribers(
    const std::string& topic) const {
  auto it = topics_.find(topic);
  return it == topics_.end() ? nullptr : &it->second;
}

std::vector<Delivery> publish(const Topology& topology, SimClock& clock,
                              LatencySource& latency, const Fingerprint& from,
                              const std::string& topic,
                              const std::string& message, EventLog* log,
                              std::function<void(const Delivery&)> on_deliver) {
  const auto& sender = topology.peer(from);
  const auto* subs = topology.subscribers(topic);
  if (!subs) {
    if (log) log->record(clock.now(), "warn", "no topic " + topic);
    return {};
  }
  std::vector<Delivery> out;
  for (const auto& to : *subs) {
    bool local = topology.peer(to).subnet == sender.subnet;
    auto delay = latency.sample(local ? LatencyKind::kLoc : LatencyKind::kInt);
    Delivery d{to, clock.now() + delay};
    out.push_back(d);
    clock.schedule(d.at, [d, log, topic, message, on_deliver, &topology] {
      if (log) {
        log->record(d.at, "deliver",
                    topic + " -> " + topology.peer(d.to).name + " " + message);
      }
      if (on_deliver) on_deliver(d);
    });
  }
  return out;
}

Connection connect_p2p(const Topology& topology, SimClock& clock,
                       LatencySource& latency, const Fingerprint& a,
                       const Fingerprint& b, EventLog* log) {
  if (a == b) {
    throw Error(ErrorCode::kConsistency, "p2p connection to self");
  }
  Connection c{a, b, clock.now(), false};
  if (topology.same_subnet(a, b)) {
    c.established_at += latency.sample(LatencyKind::kLoc);
  } else {
    c.established_at += latency.sample(LatencyKind::kP2p);
    auto p = latency.model().relay_probability;
    c.relayed = p > 0 && latency.uniform() < p;
  }
  if (log) {
    log->record(c.established_at, c.relayed ? "relayed" : "connected",
                topology.peer(a).name + " <-> " + topology.peer(b).name);
  }
  return c;
}

}  // namespace beac

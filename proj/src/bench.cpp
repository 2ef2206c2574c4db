#include "beac/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "beac/error.hpp"

namespace beac {
namespace {

using nlohmann::json;

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
  return buf;
}

constexpr PathKind kBySpeed[] = {PathKind::kFull, PathKind::kShortcutInternet,
                                 PathKind::kShortcutLocal};

std::optional<Outcome> parse_outcome(std::string_view text) {
  for (auto o : {Outcome::kGranted, Outcome::kDenied,
                 Outcome::kRevokedAfterGrant, Outcome::kTimeout}) {
    if (text == to_string(o)) return o;
  }
  return std::nullopt;
}

}  // namespace

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) {
    throw Error(ErrorCode::kConfig, "percentile of an empty sample");
  }
  auto rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

const PathStats* PercentileReport::find(PathKind path) const {
  for (const auto& s : paths) {
    if (s.path == path) return &s;
  }
  return nullptr;
}

const Savings* PercentileReport::find(PathKind slower, PathKind faster) const {
  for (const auto& s : savings) {
    if (s.slower == slower && s.faster == faster) return &s;
  }
  return nullptr;
}

PercentileReport summarize(const std::vector<TrialRecord>& records,
                           const std::vector<PathKind>& paths,
                           std::uint64_t seed, double bucket_ms) {
  PercentileReport report;
  report.seed = seed;
  report.bucket_ms = bucket_ms;

  std::map<std::uint32_t, std::map<PathKind, double>> by_trial;
  std::map<PathKind, std::vector<double>> totals;
  std::map<PathKind, std::map<Outcome, std::size_t>> outcomes;
  for (const auto& r : records) {
    by_trial[r.trial][r.trace.path] = r.trace.total;
    totals[r.trace.path].push_back(r.trace.total);
    ++outcomes[r.trace.path][r.trace.outcome];
  }
  report.trials = static_cast<std::uint32_t>(by_trial.size());

  for (auto path : kBySpeed) {
    if (std::find(paths.begin(), paths.end(), path) == paths.end()) continue;
    auto values = totals[path];
    if (values.empty()) continue;
    PathStats stats;
    stats.path = path;
    stats.count = values.size();
    stats.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                 static_cast<double>(values.size());
    for (auto v : values) {
      ++stats.histogram[static_cast<std::int64_t>(std::floor(v / bucket_ms))];
    }
    std::sort(values.begin(), values.end());
    stats.p50 = percentile(values, 50);
    stats.p99 = percentile(values, 99);
    stats.min = values.front();
    stats.max = values.back();
    stats.outcomes = outcomes[path];
    report.paths.push_back(std::move(stats));
  }

  for (std::size_t i = 0; i < report.paths.size(); ++i) {
    for (std::size_t j = i + 1; j < report.paths.size(); ++j) {
      const auto& slow = report.paths[i];
      const auto& fast = report.paths[j];
      report.savings.push_back({slow.path, fast.path, 1.0 - fast.p50 / slow.p50,
                                1.0 - fast.p99 / slow.p99});
    }
  }

  for (const auto& [trial, per_path] : by_trial) {
    bool violated = false;
    for (auto a = per_path.begin(); a != per_path.end(); ++a) {
      for (auto b = std::next(a); b != per_path.end(); ++b) {
        // Map order follows PathKind: a is the slower path.
        if (b->second > a->second) violated = true;
      }
    }
    if (violated) ++report.dominance_violations;
  }
  return report;
}

BenchRun run_scenario(const ScenarioConfig& config) {
  validate_scenario(config);
  ClusterConfig healthy = config.cluster;
  healthy.faulty.clear();
  World world(healthy, config.seed);
  auto ids = bootstrap_home(world, {config.model, config.home_subnet,
                                    config.remote_subnet});
  // Bootstrapping happens once and is not part of any measurement.
  world.cluster.set_faulty(config.cluster.faulty);

  const Identity* user = &ids.resident;
  if (config.eligibility == Eligibility::kOwner) user = &ids.owner;
  if (config.eligibility == Eligibility::kGuest) user = &ids.guest;

  AccessRequest request;
  request.user = user->fingerprint();
  request.device = ids.camera.fingerprint();
  request.service = ids.service;
  request.permission = config.permission;
  request.eligibility = config.eligibility;

  std::vector<PathKind> order;
  for (auto path : kBySpeed) {
    if (config.has_path(path)) order.push_back(path);
  }

  BenchRun run;
  run.records.reserve(static_cast<std::size_t>(config.trials) * order.size());
  for (std::uint32_t trial = 0; trial < config.trials; ++trial) {
    TrialSamples samples(config.latency,
                         splitmix64(config.seed ^ splitmix64(trial)));
    for (auto path : order) {
      samples.rewind();
      world.topology.move_peer(request.user, path == PathKind::kShortcutLocal
                                                 ? config.home_subnet
                                                 : config.remote_subnet);
      request.path = path;
      run.records.push_back({trial, run_access(request, world, samples)});
    }
  }
  run.report = summarize(run.records, order, config.seed, config.bucket_ms);
  return run;
}

std::string format_report(const PercentileReport& report) {
  std::ostringstream os;
  os << "seed " << report.seed << " trials " << report.trials
     << " bucket_ms " << format_ms(report.bucket_ms) << "\n";
  for (const auto& s : report.paths) {
    os << "path " << to_string(s.path) << " n " << s.count << " mean "
       << format_ms(s.mean) << " p50 " << format_ms(s.p50) << " p99 "
       << format_ms(s.p99) << " min " << format_ms(s.min) << " max "
       << format_ms(s.max) << "\n";
    os << "  outcomes";
    for (const auto& [outcome, count] : s.outcomes) {
      os << " " << to_string(outcome) << "=" << count;
    }
    os << "\n  histogram";
    for (const auto& [bucket, count] : s.histogram) {
      os << " " << format_ms(static_cast<double>(bucket) * report.bucket_ms)
         << ":" << count;
    }
    os << "\n";
  }
  for (const auto& s : report.savings) {
    os << "savings " << to_string(s.faster) << " vs " << to_string(s.slower)
       << " p50 " << percent(s.p50) << " p99 " << percent(s.p99) << "\n";
  }
  os << "dominance violations " << report.dominance_violations << "/"
     << report.trials << "\n";
  return os.str();
}

std::string trace_jsonl(const std::vector<TrialRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json steps = json::array();
    for (const auto& s : r.trace.steps) {
      steps.push_back({{"name", s.name},
                       {"start", s.start},
                       {"end", s.end},
                       {"duration", s.duration()},
                       {"critical", s.critical}});
    }
    json line = {{"trial", r.trial},
                 {"path", std::string(to_string(r.trace.path))},
                 {"steps", std::move(steps)},
                 {"total", r.trace.total},
                 {"outcome", std::string(to_string(r.trace.outcome))},
                 {"deferred", r.trace.ratification_deferred}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<TrialRecord> parse_trace_jsonl(const std::string& text) {
  std::vector<TrialRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      TrialRecord r;
      r.trial = j.at("trial").get<std::uint32_t>();
      auto path = parse_path(j.at("path").get<std::string>());
      auto outcome = parse_outcome(j.at("outcome").get<std::string>());
      if (!path || !outcome) throw Error(ErrorCode::kParse, "bad enum value");
      r.trace.path = *path;
      r.trace.outcome = *outcome;
      r.trace.total = j.at("total").get<double>();
      r.trace.ratification_deferred = j.value("deferred", false);
      for (const auto& s : j.at("steps")) {
        r.trace.steps.push_back({s.at("name").get<std::string>(),
                                 s.at("start").get<double>(),
                                 s.at("end").get<double>(),
                                 s.at("critical").get<bool>()});
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse,
                  "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace beac

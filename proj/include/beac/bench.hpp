#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "beac/protocols.hpp"
#include "beac/scenario.hpp"

namespace beac {

// Nearest-rank percentile over `sorted` (ascending, non-empty), p in (0, 100].
double percentile(const std::vector<double>& sorted, double p);

struct PathStats {
  PathKind path = PathKind::kFull;
  std::size_t count = 0;
  double mean = 0;
  double p50 = 0;
  double p99 = 0;
  double min = 0;
  double max = 0;
  std::map<Outcome, std::size_t> outcomes;
  // floor(total / bucket_ms) -> count, empty buckets omitted.
  std::map<std::int64_t, std::size_t> histogram;
};

// 1 - faster / slower at each percentile.
struct Savings {
  PathKind slower = PathKind::kFull;
  PathKind faster = PathKind::kShortcutInternet;
  double p50 = 0;
  double p99 = 0;
};

struct PercentileReport {
  std::uint64_t seed = 0;
  std::uint32_t trials = 0;
  double bucket_ms = 50;
  std::vector<PathStats> paths;
  std::vector<Savings> savings;
  // Trials where a shortcut took longer than a slower path.
  std::size_t dominance_violations = 0;

  const PathStats* find(PathKind path) const;
  const Savings* find(PathKind slower, PathKind faster) const;
};

struct TrialRecord {
  std::uint32_t trial = 0;
  ProtocolTrace trace;
};

struct BenchRun {
  PercentileReport report;
  std::vector<TrialRecord> records;  // by trial, then path order
};

// Every trial draws one shared sample set used by all selected paths.
BenchRun run_scenario(const ScenarioConfig& config);

PercentileReport summarize(const std::vector<TrialRecord>& records,
                           const std::vector<PathKind>& paths,
                           std::uint64_t seed, double bucket_ms);

std::string format_report(const PercentileReport& report);

// One JSON object per line: trial, path, steps, total, outcome.
std::string trace_jsonl(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> parse_trace_jsonl(const std::string& text);

}  // namespace beac

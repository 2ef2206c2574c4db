#include "beac/scenario.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "beac/error.hpp"

namespace beac {
namespace {

constexpr std::string_view kHeader = "beac-scenario";
constexpr int kVersion = 1;

std::string_view trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
    auto start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != ',') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

class LineParser {
 public:
  LineParser(std::string_view source, std::size_t line)
      : source_(source), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kConfig, std::string(source_) + ":" +
                                        std::to_string(line_) + ": " + what);
  }

  template <class T>
  T number(std::string_view text, std::string_view key) const {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                     value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      fail("'" + std::string(key) + "' expects a number, got '" +
           std::string(text) + "'");
    }
    return value;
  }

  Distribution distribution(std::string_view value, std::string_view key) const {
    auto w = words(value);
    bool fixed = w.size() == 2 && w[0] == "deterministic";
    bool skewed = w.size() == 3 && w[0] == "lognormal";
    if (!fixed && !skewed) {
      fail("'" + std::string(key) +
           "' expects 'deterministic <ms>' or 'lognormal <median> <p99>'");
    }
    auto first = number<double>(w[1], key);
    auto second = skewed ? number<double>(w[2], key) : first;
    try {
      return fixed ? Distribution::deterministic(first)
                   : Distribution::lognormal(first, second);
    } catch (const Error& e) {
      fail("'" + std::string(key) + "': " + e.what());
    }
  }

 private:
  std::string_view source_;
  std::size_t line_;
};

std::string join_paths(const std::vector<PathKind>& paths) {
  std::string out;
  for (auto p : paths) {
    if (!out.empty()) out += ' ';
    out += to_string(p);
  }
  return out;
}

std::string number_text(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

bool ScenarioConfig::has_path(PathKind path) const {
  for (auto p : paths) {
    if (p == path) return true;
  }
  return false;
}

ScenarioConfig parse_scenario(std::string_view text, std::string_view source) {
  ScenarioConfig config;
  std::map<std::string, std::size_t> seen;
  bool header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    LineParser lp(source, line_no);

    if (auto hash = raw.find('#'); hash != std::string_view::npos) {
      raw = raw.substr(0, hash);
    }
    auto line = trim(raw);
    if (line.empty()) continue;

    if (!header) {
      auto w = words(line);
      if (w.size() != 2 || w[0] != kHeader) {
        lp.fail("expected '" + std::string(kHeader) + " " +
                std::to_string(kVersion) + "' header");
      }
      if (lp.number<int>(w[1], "version") != kVersion) {
        lp.fail("unsupported scenario version " + std::string(w[1]));
      }
      header = true;
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string_view::npos) lp.fail("expected 'key = value'");
    auto key = std::string(trim(line.substr(0, eq)));
    auto value = trim(line.substr(eq + 1));
    if (auto [it, fresh] = seen.emplace(key, line_no); !fresh) {
      lp.fail("'" + key + "' already set on line " +
              std::to_string(it->second));
    }

    if (key == "seed") {
      config.seed = lp.number<std::uint64_t>(value, key);
    } else if (key == "trials") {
      config.trials = lp.number<std::uint32_t>(value, key);
      if (config.trials == 0) lp.fail("'trials' must be at least 1");
    } else if (key == "paths") {
      config.paths.clear();
      for (auto w : words(value)) {
        auto p = parse_path(w);
        if (!p) lp.fail("unknown path '" + std::string(w) + "'");
        if (config.has_path(*p)) lp.fail("path '" + std::string(w) + "' repeated");
        config.paths.push_back(*p);
      }
      if (config.paths.empty()) lp.fail("'paths' needs at least one path");
    } else if (key == "latency.int") {
      config.latency.t_int = lp.distribution(value, key);
    } else if (key == "latency.loc") {
      config.latency.t_loc = lp.distribution(value, key);
    } else if (key == "latency.p2p") {
      config.latency.t_p2p = lp.distribution(value, key);
    } else if (key == "latency.relay_probability") {
      auto p = lp.number<double>(value, key);
      if (!(p >= 0 && p <= 1)) lp.fail("'" + key + "' must lie in [0, 1]");
      config.latency.relay_probability = p;
    } else if (key == "validators.f") {
      config.cluster.f = lp.number<std::uint32_t>(value, key);
      if (config.cluster.f == 0) lp.fail("'validators.f' must be at least 1");
    } else if (key == "validators.faulty") {
      config.cluster.faulty.clear();
      if (value != "none") {
        for (auto w : words(value)) {
          config.cluster.faulty.insert(lp.number<std::uint32_t>(w, key));
        }
      }
    } else if (key == "consensus") {
      if (value == "optimal") {
        config.cluster.mode = ConsensusMode::kOptimal;
      } else if (value == "worst") {
        config.cluster.mode = ConsensusMode::kWorst;
      } else {
        lp.fail("'consensus' is 'optimal' or 'worst'");
      }
    } else if (key == "consensus.r") {
      config.cluster.rounds = lp.number<std::uint32_t>(value, key);
    } else if (key == "consensus.stall_timeout_ms") {
      config.cluster.stall_timeout_ms = lp.number<double>(value, key);
      if (!(config.cluster.stall_timeout_ms > 0)) {
        lp.fail("'" + key + "' must be positive");
      }
    } else if (key == "histogram.bucket_ms") {
      config.bucket_ms = lp.number<double>(value, key);
      if (!(config.bucket_ms > 0)) lp.fail("'" + key + "' must be positive");
    } else if (key == "domain.model") {
      auto m = parse_access_model(value);
      if (!m) lp.fail("'domain.model' is dac, abac or rbac");
      config.model = *m;
    } else if (key == "request.eligibility") {
      auto e = parse_eligibility(value);
      if (!e) lp.fail("'request.eligibility' is owner, permanent or guest");
      config.eligibility = *e;
    } else if (key == "request.permission") {
      auto p = parse_permission(value);
      if (!p) lp.fail("'request.permission' is list, chmod or execute");
      config.permission = *p;
    } else if (key == "topology.home") {
      if (value.empty()) lp.fail("'topology.home' needs a subnet name");
      config.home_subnet = std::string(value);
    } else if (key == "topology.remote") {
      if (value.empty()) lp.fail("'topology.remote' needs a subnet name");
      config.remote_subnet = std::string(value);
    } else {
      lp.fail("unknown key '" + key + "'");
    }
  }
  if (!header) {
    throw Error(ErrorCode::kConfig,
                std::string(source) + ":1: missing scenario header");
  }
  try {
    validate_scenario(config);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string(source) + ": " + e.what());
  }
  return config;
}

void validate_scenario(const ScenarioConfig& config) {
  if (config.trials == 0) {
    throw Error(ErrorCode::kConfig, "trials must be at least 1");
  }
  if (config.paths.empty()) {
    throw Error(ErrorCode::kConfig, "no paths selected");
  }
  std::uint32_t n = 3 * config.cluster.f + 1;
  for (auto index : config.cluster.faulty) {
    if (index >= n) {
      throw Error(ErrorCode::kConfig,
                  "validators.faulty index " + std::to_string(index) +
                      " out of range for n = " + std::to_string(n));
    }
  }
  if (config.eligibility == Eligibility::kGuest &&
      (config.has_path(PathKind::kShortcutInternet) ||
       config.has_path(PathKind::kShortcutLocal))) {
    throw Error(ErrorCode::kConfig,
                "guest requests can only use the full path");
  }
  if (config.home_subnet == config.remote_subnet) {
    throw Error(ErrorCode::kConfig,
                "topology.home and topology.remote must differ");
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kConfig, "cannot read " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_scenario(text, path.string());
}

std::string format_scenario(const ScenarioConfig& c) {
  std::ostringstream os;
  os << kHeader << ' ' << kVersion << '\n';
  os << "seed = " << c.seed << '\n';
  os << "trials = " << c.trials << '\n';
  os << "paths = " << join_paths(c.paths) << '\n';
  auto dist = [](const Distribution& d) {
    if (d.shape() == Distribution::Shape::kDeterministic) {
      return "deterministic " + number_text(d.median());
    }
    return "lognormal " + number_text(d.median()) + " " + number_text(d.p99());
  };
  os << "latency.int = " << dist(c.latency.t_int) << '\n';
  os << "latency.loc = " << dist(c.latency.t_loc) << '\n';
  os << "latency.p2p = " << dist(c.latency.t_p2p) << '\n';
  os << "latency.relay_probability = "
     << number_text(c.latency.relay_probability) << '\n';
  os << "validators.f = " << c.cluster.f << '\n';
  os << "validators.faulty =";
  if (c.cluster.faulty.empty()) os << " none";
  for (auto i : c.cluster.faulty) os << ' ' << i;
  os << '\n';
  os << "consensus = " << to_string(c.cluster.mode) << '\n';
  os << "consensus.r = " << c.cluster.rounds << '\n';
  os << "consensus.stall_timeout_ms = " << number_text(c.cluster.stall_timeout_ms)
     << '\n';
  os << "histogram.bucket_ms = " << number_text(c.bucket_ms) << '\n';
  std::string model(to_string(c.model));
  for (auto& ch : model) ch = static_cast<char>(std::tolower(ch));
  os << "domain.model = " << model << '\n';
  os << "request.eligibility = " << to_string(c.eligibility) << '\n';
  std::string perm(to_string(c.permission));
  for (auto& ch : perm) ch = static_cast<char>(std::tolower(ch));
  os << "request.permission = " << perm << '\n';
  os << "topology.home = " << c.home_subnet << '\n';
  os << "topology.remote = " << c.remote_subnet << '\n';
  return os.str();
}

}  // namespace beac

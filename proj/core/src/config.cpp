#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bloatsim/experiment/config.hpp"

namespace bloatsim::experiment {

namespace {

std::string
WithLine(size_t line, const std::string& message)
{
  return line == 0 ? message : "line " + std::to_string(line) + ": " + message;
}

std::string_view
Trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view>
SplitList(std::string_view text)
{
  std::vector<std::string_view> items;
  size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    items.push_back(Trim(text.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return items;
}

double
ParseReal(std::string_view key, std::string_view v, size_t line)
{
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ConfigError(line, std::string(key) + ": malformed number '" + std::string(v) + "'");
  }
  return out;
}

uint64_t
ParseCount(std::string_view key, std::string_view v, size_t line)
{
  // Accept "4194304" as well as "1e6" for rates, as long as the value is a
  // non-negative integer.
  const double d = ParseReal(key, v, line);
  if (d < 0 || d != std::floor(d) || d > 1.8e19) {
    throw ConfigError(line, std::string(key) + ": expected a non-negative integer, got '" + std::string(v) + "'");
  }
  uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec == std::errc() && ptr == v.data() + v.size()) {
    return out;
  }
  return static_cast<uint64_t>(d);
}

uint32_t
ParseCount32(std::string_view key, std::string_view v, size_t line)
{
  const uint64_t n = ParseCount(key, v, line);
  if (n > UINT32_MAX) {
    throw ConfigError(line, std::string(key) + ": value too large");
  }
  return static_cast<uint32_t>(n);
}

std::string
FormatReal(double v)
{
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

} // namespace

ConfigError::ConfigError(size_t line, const std::string& message)
  : std::runtime_error(WithLine(line, message)), m_line(line)
{
}

std::vector<qdisc::DisciplineKind>
ParseDisciplineList(std::string_view text, size_t line)
{
  std::vector<qdisc::DisciplineKind> out;
  for (auto item : SplitList(text)) {
    auto kind = qdisc::ParseDisciplineKind(item);
    if (!kind) {
      throw ConfigError(line, "unknown queue discipline '" + std::string(item) +
                                "' (expected droptail | codel | codel-lifo | fq-codel | fq-codel-lifo)");
    }
    out.push_back(*kind);
  }
  return out;
}

std::vector<mptcp::CcAlgorithm>
ParseCcList(std::string_view text, size_t line)
{
  std::vector<mptcp::CcAlgorithm> out;
  for (auto item : SplitList(text)) {
    auto alg = mptcp::ParseCcAlgorithm(item);
    if (!alg) {
      throw ConfigError(line, "unknown congestion control '" + std::string(item) +
                                "' (expected lia | rtt-compensator | uncoupled | fully-coupled)");
    }
    out.push_back(*alg);
  }
  return out;
}

std::vector<double>
ParseDelayList(std::string_view text, size_t line)
{
  std::vector<double> out;
  for (auto item : SplitList(text)) {
    const double d = ParseReal("delay_a_ms", item, line);
    if (d < 0) {
      throw ConfigError(line, "delay_a_ms values must be ≥ 0");
    }
    out.push_back(d);
  }
  return out;
}

void
ApplySetting(ScenarioConfig& c, std::string_view key, std::string_view value, size_t line)
{
  const std::string k(key);
  const auto real = [&] { return ParseReal(key, value, line); };
  const auto count = [&] { return ParseCount(key, value, line); };
  const auto count32 = [&] { return ParseCount32(key, value, line); };

  if (k == "scenario") {
    if (value.empty() || value.find_first_of(",\"\n") != std::string_view::npos) {
      throw ConfigError(line, "scenario: name must be non-empty and free of commas/quotes");
    }
    c.scenario = std::string(value);
  } else if (k == "workload_bytes") c.workloadBytes = count();
  else if (k == "bottleneck_rate_bps") c.bottleneckRateBps = count();
  else if (k == "access_rate_bps") c.accessRateBps = count();
  else if (k == "delay_a_ms") c.delayAMs = ParseDelayList(value, line);
  else if (k == "delay_b_ms") c.delayBMs = real();
  else if (k == "delay_d_ms") c.delayDMs = real();
  else if (k == "bottleneck_delay_ms") c.bottleneckDelayMs = real();
  else if (k == "queue_limit") c.queueLimit = count32();
  else if (k == "packet_size") c.packetSize = count32();
  else if (k == "header_bytes") c.headerBytes = count32();
  else if (k == "rcv_window_bytes") c.rcvWindowBytes = count();
  else if (k == "cbr_rate_bps") c.cbrRateBps = count();
  else if (k == "tau_ms") c.tauMs = real();
  else if (k == "lambda_ms") c.lambdaMs = real();
  else if (k == "quantum") c.quantum = count32();
  else if (k == "reps") c.reps = count32();
  else if (k == "base_seed") c.baseSeed = count();
  else if (k == "jitter_fraction") c.jitterFraction = real();
  else if (k == "initial_window") c.initialWindow = real();
  else if (k == "time_ceiling_s") c.timeCeilingS = real();
  else if (k == "qdiscs") c.qdiscs = ParseDisciplineList(value, line);
  else if (k == "ccs") c.ccs = ParseCcList(value, line);
  else throw ConfigError(line, "unknown key '" + k + "'");
}

void
ScenarioConfig::Validate() const
{
  const auto fail = [](const std::string& m) { throw ConfigError(0, m); };
  if (workloadBytes == 0) fail("workload_bytes must be ≥ 1");
  if (bottleneckRateBps == 0) fail("bottleneck_rate_bps must be > 0");
  if (accessRateBps == 0) fail("access_rate_bps must be > 0");
  if (delayAMs.empty()) fail("delay_a_ms must list at least one delay");
  for (double d : delayAMs) {
    if (d < 0) fail("delay_a_ms values must be ≥ 0");
  }
  if (delayBMs < 0) fail("delay_b_ms must be ≥ 0");
  if (delayDMs < 0) fail("delay_d_ms must be ≥ 0");
  if (bottleneckDelayMs < 0) fail("bottleneck_delay_ms must be ≥ 0");
  if (queueLimit < 1) fail("queue_limit must be ≥ 1");
  if (headerBytes == 0) fail("header_bytes must be ≥ 1");
  if (packetSize <= headerBytes) fail("packet_size must exceed header_bytes");
  if (rcvWindowBytes < Mss()) fail("rcv_window_bytes must hold at least one segment");
  if (!(tauMs > 0)) fail("tau_ms must be > 0");
  if (!(lambdaMs > 0)) fail("lambda_ms must be > 0");
  if (quantum < packetSize) fail("quantum must be ≥ packet_size");
  if (reps < 1) fail("reps must be ≥ 1");
  if (!(jitterFraction >= 0 && jitterFraction < 1)) fail("jitter_fraction must be in [0, 1)");
  if (!(initialWindow >= 1)) fail("initial_window must be ≥ 1");
  if (!(timeCeilingS > 0)) fail("time_ceiling_s must be > 0");
  if (qdiscs.empty()) fail("qdiscs must list at least one discipline");
  if (ccs.empty()) fail("ccs must list at least one algorithm");
}

qdisc::DisciplineConfig
ScenarioConfig::Discipline() const
{
  qdisc::DisciplineConfig d;
  d.limit = queueLimit;
  d.target = sim::SimTime::FromMilliseconds(tauMs);
  d.interval = sim::SimTime::FromMilliseconds(lambdaMs);
  d.quantum = quantum;
  return d;
}

ScenarioConfig
ParseConfig(std::string_view text)
{
  ScenarioConfig cfg;
  size_t lineNo = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineNo;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(lineNo, "expected 'key = value', got '" + std::string(line) + "'");
    }
    const auto key = Trim(line.substr(0, eq));
    const auto value = Trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(lineNo, "missing key before '='");
    }
    ApplySetting(cfg, key, value, lineNo);
    try {
      cfg.Validate();
    } catch (const ConfigError& e) {
      // Report range errors against the line that introduced them.
      throw ConfigError(lineNo, e.what());
    }
  }
  cfg.Validate();
  return cfg;
}

ScenarioConfig
LoadConfigFile(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError(0, "cannot read config file '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string
Render(const ScenarioConfig& c)
{
  std::ostringstream os;
  const auto list = [](const auto& items, auto toString) {
    std::string s;
    for (size_t i = 0; i < items.size(); ++i) {
      if (i) s += ',';
      s += toString(items[i]);
    }
    return s;
  };
  os << "scenario = " << c.scenario << '\n'
     << "workload_bytes = " << c.workloadBytes << '\n'
     << "bottleneck_rate_bps = " << c.bottleneckRateBps << '\n'
     << "access_rate_bps = " << c.accessRateBps << '\n'
     << "delay_a_ms = " << list(c.delayAMs, FormatReal) << '\n'
     << "delay_b_ms = " << FormatReal(c.delayBMs) << '\n'
     << "delay_d_ms = " << FormatReal(c.delayDMs) << '\n'
     << "bottleneck_delay_ms = " << FormatReal(c.bottleneckDelayMs) << '\n'
     << "queue_limit = " << c.queueLimit << '\n'
     << "packet_size = " << c.packetSize << '\n'
     << "header_bytes = " << c.headerBytes << '\n'
     << "rcv_window_bytes = " << c.rcvWindowBytes << '\n'
     << "cbr_rate_bps = " << c.cbrRateBps << '\n'
     << "tau_ms = " << FormatReal(c.tauMs) << '\n'
     << "lambda_ms = " << FormatReal(c.lambdaMs) << '\n'
     << "quantum = " << c.quantum << '\n'
     << "reps = " << c.reps << '\n'
     << "base_seed = " << c.baseSeed << '\n'
     << "jitter_fraction = " << FormatReal(c.jitterFraction) << '\n'
     << "initial_window = " << FormatReal(c.initialWindow) << '\n'
     << "time_ceiling_s = " << FormatReal(c.timeCeilingS) << '\n'
     << "qdiscs = " << list(c.qdiscs, [](auto k) { return std::string(qdisc::ToString(k)); }) << '\n'
     << "ccs = " << list(c.ccs, [](auto a) { return std::string(mptcp::ToString(a)); }) << '\n';
  return os.str();
}

} // namespace bloatsim::experiment

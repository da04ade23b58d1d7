#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bloatsim/mptcp/coupling.hpp"
#include "bloatsim/qdisc/queue_disc.hpp"
#include "bloatsim/sim/time.hpp"

namespace bloatsim::experiment {

// Raised for unknown keys, malformed or out-of-range values. `Line()` is 0
// when the problem is not tied to a line (e.g. a CLI override).
class ConfigError : public std::runtime_error
{
public:
  ConfigError(size_t line, const std::string& message);
  size_t Line() const { return m_line; }

private:
  size_t m_line;
};

struct FactorGrid
{
  std::vector<qdisc::DisciplineKind> qdiscs;
  std::vector<mptcp::CcAlgorithm> ccs;
  std::vector<double> delaysAMs;

  size_t CellCount() const { return qdiscs.size() * ccs.size() * delaysAMs.size(); }
};

struct ScenarioConfig
{
  std::string scenario = "hetnet";
  uint64_t workloadBytes = 4u << 20;
  uint64_t bottleneckRateBps = 1000000;
  uint64_t accessRateBps = 1000000000;
  std::vector<double> delayAMs = {1, 10, 100, 300};
  double delayBMs = 1;
  double delayDMs = 1;
  double bottleneckDelayMs = 1;
  uint32_t queueLimit = 100;
  uint32_t packetSize = 1458;
  uint32_t headerBytes = 40;
  uint64_t rcvWindowBytes = 65536;
  uint64_t cbrRateBps = 250000;
  double tauMs = 5;
  double lambdaMs = 100;
  uint32_t quantum = 1514;
  uint32_t reps = 35;
  uint64_t baseSeed = 1;
  double jitterFraction = 0.01;
  double initialWindow = 2;
  double timeCeilingS = 600;
  std::vector<qdisc::DisciplineKind> qdiscs = {qdisc::DisciplineKind::DropTail, qdisc::DisciplineKind::CoDel,
                                               qdisc::DisciplineKind::CoDelLifo};
  std::vector<mptcp::CcAlgorithm> ccs = {mptcp::CcAlgorithm::Lia, mptcp::CcAlgorithm::RttCompensator,
                                         mptcp::CcAlgorithm::Uncoupled};

  uint32_t Mss() const { return packetSize - headerBytes; }
  qdisc::DisciplineConfig Discipline() const;
  FactorGrid Grid() const { return {qdiscs, ccs, delayAMs}; }

  // Throws ConfigError (line 0) naming the offending key.
  void Validate() const;
};

// Line-oriented `key = value` text; `#` starts a comment; lists are
// comma-separated. Missing keys keep their defaults.
ScenarioConfig ParseConfig(std::string_view text);
ScenarioConfig LoadConfigFile(const std::string& path);

// Applies one `key = value` assignment (used for CLI overrides too).
void ApplySetting(ScenarioConfig& cfg, std::string_view key, std::string_view value, size_t line = 0);

// Canonical `key = value` rendering; ParseConfig(Render(c)) reproduces c.
std::string Render(const ScenarioConfig& cfg);

std::vector<qdisc::DisciplineKind> ParseDisciplineList(std::string_view text, size_t line = 0);
std::vector<mptcp::CcAlgorithm> ParseCcList(std::string_view text, size_t line = 0);
std::vector<double> ParseDelayList(std::string_view text, size_t line = 0);

} // namespace bloatsim::experiment

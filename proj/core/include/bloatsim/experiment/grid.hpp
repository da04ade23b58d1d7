#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bloatsim/experiment/config.hpp"
#include "bloatsim/experiment/scenario.hpp"
#include "bloatsim/metrics/metrics.hpp"

namespace bloatsim::experiment {

struct RunFailure
{
  Cell cell;
  uint32_t rep;
  std::string message;
};

struct GridResult
{
  // Ordered by (qdisc, cc, delay) in grid order, then rep.
  std::vector<metrics::RunMetrics> runs;
  std::vector<RunFailure> failures;
};

// Cells in output order: qdisc-major, then cc, then delay.
std::vector<Cell> EnumerateCells(const FactorGrid& grid);

// Executes every cell x rep, using up to `jobs` worker threads. Output order
// does not depend on `jobs`.
GridResult RunGrid(const ScenarioConfig& cfg, const FactorGrid& grid, unsigned jobs = 1);

// Writes runs.csv and aggregate.csv into `dir` (created if missing).
void WriteResults(const std::filesystem::path& dir, const GridResult& result);

} // namespace bloatsim::experiment

#include <algorithm>
#include <atomic>
#include <fstream>
#include <optional>
#include <thread>

#include "bloatsim/experiment/grid.hpp"

namespace bloatsim::experiment {

std::vector<Cell>
EnumerateCells(const FactorGrid& grid)
{
  std::vector<Cell> cells;
  cells.reserve(grid.CellCount());
  for (auto q : grid.qdiscs) {
    for (auto cc : grid.ccs) {
      for (double d : grid.delaysAMs) {
        cells.push_back({q, cc, d});
      }
    }
  }
  return cells;
}

GridResult
RunGrid(const ScenarioConfig& cfg, const FactorGrid& grid, unsigned jobs)
{
  const auto cells = EnumerateCells(grid);
  const size_t total = cells.size() * cfg.reps;

  struct Slot
  {
    std::optional<metrics::RunMetrics> run;
    std::optional<std::string> error;
  };
  std::vector<Slot> slots(total);
  std::atomic<size_t> next{0};

  const auto worker = [&] {
    for (size_t k = next++; k < total; k = next++) {
      const Cell& cell = cells[k / cfg.reps];
      const auto rep = static_cast<uint32_t>(k % cfg.reps);
      try {
        slots[k].run = RunCell(cfg, cell, rep);
      } catch (const std::exception& e) {
        slots[k].error = e.what();
      }
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<size_t>(total, 1))));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) {
      pool.emplace_back(worker);
    }
  }

  GridResult result;
  result.runs.reserve(total);
  for (size_t k = 0; k < total; ++k) {
    if (slots[k].run) {
      result.runs.push_back(std::move(*slots[k].run));
    } else {
      result.failures.push_back({cells[k / cfg.reps], static_cast<uint32_t>(k % cfg.reps), *slots[k].error});
    }
  }
  return result;
}

void
WriteResults(const std::filesystem::path& dir, const GridResult& result)
{
  std::filesystem::create_directories(dir);
  {
    std::ofstream runs(dir / "runs.csv", std::ios::binary);
    metrics::WriteRunsCsv(runs, result.runs);
    if (!runs) {
      throw std::runtime_error("cannot write " + (dir / "runs.csv").string());
    }
  }
  std::ofstream agg(dir / "aggregate.csv", std::ios::binary);
  metrics::WriteAggregateCsv(agg, metrics::AggregateByCell(result.runs));
  if (!agg) {
    throw std::runtime_error("cannot write " + (dir / "aggregate.csv").string());
  }
}

} // namespace bloatsim::experiment

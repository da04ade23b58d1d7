#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bloatsim/experiment/config.hpp"
#include "bloatsim/metrics/metrics.hpp"

namespace bloatsim::experiment {

// A run that did not finish its workload before the simulated-time ceiling.
class RunStalled : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct Cell
{
  qdisc::DisciplineKind qdisc;
  mptcp::CcAlgorithm cc;
  double delayAMs;
};

// FNV-1a 64 over "<qdisc>|<cc>|<delay_a_ms>", the delay in shortest decimal
// form (e.g. "codel-lifo|lia|300").
uint64_t CellHash(const Cell& cell);

// (baseSeed XOR CellHash(cell)) + rep, modulo 2^64.
uint64_t DeriveSeed(uint64_t baseSeed, const Cell& cell, uint32_t rep);

// Invariant counters gathered while a run executes; used by tests.
struct RunAudit
{
  uint64_t routerAdmitted = 0;
  uint64_t routerDelivered = 0;
  uint64_t routerDropped = 0;
  uint64_t routerResident = 0;
  uint64_t maxOccupancy = 0;
  double minWindow = 1e300;
  uint64_t windowViolations = 0; // window-limited sends exceeding w * MSS
  uint64_t rwndViolations = 0;   // unacked connection data above the receive window
  uint64_t eventsScheduled = 0;
  uint64_t eventsExecuted = 0;
  uint64_t eventsCancelled = 0;
  uint64_t bottleneckBytes = 0;
  double bottleneckBusyFraction = 0.0;
};

struct RunOptions
{
  // One line per simulation event when set (see `bloatsim trace`).
  std::function<void(std::string_view)> trace;
  RunAudit* audit = nullptr;
};

// Builds the two-path topology (UE -A/B-> router -C-> receiver, CBR -D->
// router), runs it until the whole workload is acknowledged, and returns the
// run's metrics. Throws RunStalled past the time ceiling.
metrics::RunMetrics RunCell(const ScenarioConfig& cfg, const Cell& cell, uint32_t rep, const RunOptions& options = {});

} // namespace bloatsim::experiment

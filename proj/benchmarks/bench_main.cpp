#include <benchmark/benchmark.h>

#include "bloatsim/experiment/scenario.hpp"
#include "bloatsim/qdisc/disciplines.hpp"
#include "bloatsim/sim/prng.hpp"
#include "bloatsim/sim/simulator.hpp"

using namespace bloatsim;

namespace {

// Admit/dequeue cycles against a half-full queue with sojourns above target,
// so the CoDel variants spend their time in the control law.
void
BM_QueueDisc(benchmark::State& state)
{
  const auto kind = static_cast<qdisc::DisciplineKind>(state.range(0));
  auto q = qdisc::MakeQueueDisc(kind, {});
  sim::Prng rng(1);
  sim::SimTime now;
  uint64_t id = 0;
  const auto admit = [&] {
    net::Packet p;
    p.id = ++id;
    p.flow = static_cast<net::FlowId>(rng.NextU64() % 3);
    p.size = 1458;
    q->Admit(std::move(p), now);
  };
  for (int i = 0; i < 50; ++i) admit();
  for (auto _ : state) {
    now += sim::SimTime::Microseconds(500);
    admit();
    if (q->Occupancy() > 50 || rng.NextU64() % 2 == 0) {
      benchmark::DoNotOptimize(q->Dequeue(now));
    }
  }
  state.SetLabel(std::string(qdisc::ToString(kind)));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_QueueDisc)->DenseRange(0, 4);

void
BM_Scheduler(benchmark::State& state)
{
  const auto n = state.range(0);
  for (auto _ : state) {
    sim::Simulator sim;
    sim::Prng rng(2);
    int64_t fired = 0;
    for (int64_t i = 0; i < n; ++i) {
      sim.ScheduleAt(sim::SimTime::Nanoseconds(static_cast<int64_t>(rng.NextU64() % 1'000'000'000)),
                     [&fired] { ++fired; });
    }
    sim.Run();
    benchmark::DoNotOptimize(fired);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Scheduler)->Arg(1 << 10)->Arg(1 << 16);

// One full 4 MiB transfer through the default topology.
void
BM_RunCell(benchmark::State& state)
{
  const experiment::ScenarioConfig cfg;
  const experiment::Cell cell{static_cast<qdisc::DisciplineKind>(state.range(0)), mptcp::CcAlgorithm::Lia, 10};
  uint32_t rep = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(experiment::RunCell(cfg, cell, rep++ % cfg.reps));
  }
  state.SetLabel(std::string(qdisc::ToString(cell.qdisc)));
}
BENCHMARK(BM_RunCell)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();

#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "bloatsim/experiment/config.hpp"
#include "bloatsim/experiment/grid.hpp"
#include "bloatsim/experiment/scenario.hpp"

using namespace bloatsim;
using experiment::ConfigError;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRun = 2;

struct Overrides
{
  std::string config;
  std::optional<std::string> qdisc;
  std::optional<std::string> cc;
  std::optional<std::string> delayA;
  std::optional<uint32_t> reps;
  std::optional<uint64_t> seed;
};

experiment::ScenarioConfig
Load(const Overrides& o)
{
  auto cfg = o.config.empty() ? experiment::ScenarioConfig{} : experiment::LoadConfigFile(o.config);
  if (o.qdisc) cfg.qdiscs = experiment::ParseDisciplineList(*o.qdisc);
  if (o.cc) cfg.ccs = experiment::ParseCcList(*o.cc);
  if (o.delayA) cfg.delayAMs = experiment::ParseDelayList(*o.delayA);
  if (o.reps) cfg.reps = *o.reps;
  if (o.seed) cfg.baseSeed = *o.seed;
  cfg.Validate();
  return cfg;
}

void
AddOverrides(CLI::App* cmd, Overrides& o, bool withReps)
{
  cmd->add_option("--qdisc", o.qdisc, "Queue disciplines, comma-separated");
  cmd->add_option("--cc", o.cc, "Congestion control algorithms, comma-separated");
  cmd->add_option("--delay-a", o.delayA, "Path A one-way delays in ms, comma-separated");
  if (withReps) {
    cmd->add_option("--reps", o.reps, "Repetitions per cell");
  }
  cmd->add_option("--seed", o.seed, "Base seed");
}

int
Run(const Overrides& o, unsigned jobs, const std::string& out)
{
  const auto cfg = Load(o);
  const auto grid = cfg.Grid();
  std::cerr << "bloatsim: " << grid.CellCount() << " cells x " << cfg.reps << " reps, " << jobs << " job(s)\n";
  const auto result = experiment::RunGrid(cfg, grid, jobs);
  experiment::WriteResults(out, result);
  for (const auto& f : result.failures) {
    std::cerr << "bloatsim: run failed (" << qdisc::ToString(f.cell.qdisc) << ", " << mptcp::ToString(f.cell.cc)
              << ", " << f.cell.delayAMs << " ms, rep " << f.rep << "): " << f.message << '\n';
  }
  std::cerr << "bloatsim: wrote " << result.runs.size() << " runs to " << out << '\n';
  return result.failures.empty() ? kExitOk : kExitRun;
}

int
Trace(const Overrides& o, uint32_t rep)
{
  const auto cfg = Load(o);
  if (cfg.qdiscs.size() != 1 || cfg.ccs.size() != 1 || cfg.delayAMs.size() != 1) {
    throw ConfigError(0, "trace needs exactly one qdisc, cc and delay_a (use --qdisc/--cc/--delay-a)");
  }
  experiment::RunOptions options;
  options.trace = [](std::string_view line) { std::cout << line << '\n'; };
  const auto m = experiment::RunCell(cfg, {cfg.qdiscs[0], cfg.ccs[0], cfg.delayAMs[0]}, rep, options);
  std::cout << "# seed=" << m.seed << " duration_s=" << metrics::FormatDecimal(m.durationS)
            << " goodput_bps=" << metrics::FormatDecimal(m.goodputTotalBps) << " drops=" << m.drops
            << " forgiven=" << m.forgiven << " retransmissions=" << m.retransmissions << " timeouts=" << m.timeouts
            << '\n';
  return kExitOk;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{"bloatsim: discrete-event simulator for AQM under multipath TCP"};
  app.require_subcommand(1);

  Overrides runOpts;
  std::string out;
  unsigned jobs = 1;
  auto* run = app.add_subcommand("run", "Run the factor grid and write runs.csv / aggregate.csv");
  run->add_option("--config", runOpts.config, "Config file (key = value)")->required()->check(CLI::ExistingFile);
  AddOverrides(run, runOpts, true);
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u));
  run->add_option("--out", out, "Output directory")->required();

  std::string validatePath;
  auto* validate = app.add_subcommand("validate", "Check a config file and print the effective settings");
  validate->add_option("--config", validatePath, "Config file")->required()->check(CLI::ExistingFile);

  Overrides traceOpts;
  uint32_t traceRep = 0;
  auto* trace = app.add_subcommand("trace", "Single run with a per-event log on stdout");
  trace->add_option("--config", traceOpts.config, "Config file (defaults if omitted)")->check(CLI::ExistingFile);
  AddOverrides(trace, traceOpts, false);
  trace->add_option("--rep", traceRep, "Repetition index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      return Run(runOpts, jobs, out);
    }
    if (*validate) {
      std::cout << experiment::Render(experiment::LoadConfigFile(validatePath));
      return kExitOk;
    }
    if (*trace) {
      return Trace(traceOpts, traceRep);
    }
  } catch (const ConfigError& e) {
    std::cerr << "bloatsim: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "bloatsim: " << e.what() << '\n';
    return kExitRun;
  }
  return kExitOk;
}

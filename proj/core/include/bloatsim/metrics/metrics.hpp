#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bloatsim/sim/time.hpp"

namespace bloatsim::metrics {

using sim::SimTime;

// bytes * 8 / (last - first), in bits per second. Zero bytes gives 0.
// Throws std::invalid_argument when bytes > 0 and last <= first.
double Goodput(uint64_t bytes, SimTime first, SimTime last);

// Arithmetic mean; absent for an empty sample.
std::optional<double> Mean(std::span<const double> samples);

// Time-weighted mean of a step function: each value holds from its
// timestamp until the next one, the last until `end`. Timestamps must be
// non-decreasing and the series non-empty.
double TimeAverage(std::span<const std::pair<SimTime, double>> series, SimTime end);

// Streaming form of TimeAverage.
class TimeWeightedMean
{
public:
  void Update(SimTime t, double value);
  double Finish(SimTime end) const;
  bool Empty() const { return !m_started; }

private:
  bool m_started = false;
  SimTime m_start;
  SimTime m_last;
  double m_value = 0.0;
  double m_area = 0.0; // value * ns
};

// Running sum/count.
class SampleMean
{
public:
  void Add(double v)
  {
    m_sum += v;
    ++m_n;
  }
  uint64_t Count() const { return m_n; }
  std::optional<double> Value() const;

private:
  double m_sum = 0.0;
  uint64_t m_n = 0;
};

struct RunMetrics
{
  std::string scenario;
  std::string qdisc;
  std::string cc;
  double delayAMs = 0.0;
  uint32_t rep = 0;
  uint64_t seed = 0;

  double goodputTotalBps = 0.0; // sum of the per-path goodputs
  double goodputABps = 0.0;
  double goodputBBps = 0.0;
  std::optional<double> rttMsA;
  std::optional<double> rttMsB;
  uint64_t drops = 0;
  std::optional<double> avgQueueLenPkts;
  std::optional<double> avgSojournMs; // CoDel family only
  double durationS = 0.0;

  // Not part of the CSV schema.
  uint64_t deliveredBytes = 0;
  uint64_t dequeueDrops = 0;
  uint64_t forgiven = 0;
  uint64_t retransmissions = 0;
  uint64_t timeouts = 0;
};

// Metric columns shared by runs.csv and aggregate.csv, in schema order.
inline constexpr std::array<std::string_view, 9> kMetricColumns = {
  "goodput_bps_total", "goodput_bps_a", "goodput_bps_b", "rtt_ms_a",  "rtt_ms_b",
  "drops",             "avg_qlen_pkts", "avg_sojourn_ms", "duration_s",
};

std::optional<double> MetricValue(const RunMetrics& run, size_t column);

// Two-sided 95% Student-t critical value for `dof` degrees of freedom.
double StudentT975(size_t dof);

struct Estimate
{
  double mean = 0.0;
  std::optional<double> ci95; // half-width; absent when n < 2
  size_t n = 0;
};

// Mean and t_{0.975,n-1} * s / sqrt(n). Absent for an empty sample.
std::optional<Estimate> MeanWithCi(std::span<const double> values);

struct AggregateMetrics
{
  std::string scenario;
  std::string qdisc;
  std::string cc;
  double delayAMs = 0.0;
  size_t reps = 0;
  std::array<std::optional<Estimate>, kMetricColumns.size()> values;
};

// Aggregates runs of one cell (same config, different seeds). Absent values
// (e.g. sojourn for DropTail) are skipped per metric.
AggregateMetrics Aggregate(std::span<const RunMetrics> runs);

// Groups consecutive runs sharing (scenario, qdisc, cc, delay) and
// aggregates each group, preserving order of first appearance.
std::vector<AggregateMetrics> AggregateByCell(std::span<const RunMetrics> runs);

// Fixed-point decimal, '.' separator, no grouping.
std::string FormatDecimal(double v, int precision = 6);

void WriteRunsCsv(std::ostream& os, std::span<const RunMetrics> runs);
void WriteAggregateCsv(std::ostream& os, std::span<const AggregateMetrics> rows);

} // namespace bloatsim::metrics

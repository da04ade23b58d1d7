#include <charconv>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "bloatsim/metrics/metrics.hpp"

namespace bloatsim::metrics {

double
Goodput(uint64_t bytes, SimTime first, SimTime last)
{
  if (bytes == 0) {
    return 0.0;
  }
  if (last <= first) {
    throw std::invalid_argument("Goodput: empty delivery span with bytes received");
  }
  return static_cast<double>(bytes) * 8.0 / (last - first).ToSeconds();
}

std::optional<double>
Mean(std::span<const double> samples)
{
  if (samples.empty()) {
    return std::nullopt;
  }
  double sum = 0.0;
  for (double v : samples) {
    sum += v;
  }
  return sum / static_cast<double>(samples.size());
}

double
TimeAverage(std::span<const std::pair<SimTime, double>> series, SimTime end)
{
  if (series.empty()) {
    throw std::invalid_argument("TimeAverage: empty series");
  }
  TimeWeightedMean m;
  for (const auto& [t, v] : series) {
    m.Update(t, v);
  }
  return m.Finish(end);
}

void
TimeWeightedMean::Update(SimTime t, double value)
{
  if (!m_started) {
    m_started = true;
    m_start = t;
  } else {
    if (t < m_last) {
      throw std::invalid_argument("TimeWeightedMean: time went backwards");
    }
    m_area += m_value * static_cast<double>((t - m_last).Ns());
  }
  m_last = t;
  m_value = value;
}

double
TimeWeightedMean::Finish(SimTime end) const
{
  if (!m_started) {
    throw std::logic_error("TimeWeightedMean: no samples");
  }
  if (end < m_last) {
    throw std::invalid_argument("TimeWeightedMean: end before last sample");
  }
  const double area = m_area + m_value * static_cast<double>((end - m_last).Ns());
  const auto span = static_cast<double>((end - m_start).Ns());
  return span > 0.0 ? area / span : m_value;
}

std::optional<double>
SampleMean::Value() const
{
  if (m_n == 0) {
    return std::nullopt;
  }
  return m_sum / static_cast<double>(m_n);
}

std::optional<double>
MetricValue(const RunMetrics& r, size_t column)
{
  switch (column) {
  case 0: return r.goodputTotalBps;
  case 1: return r.goodputABps;
  case 2: return r.goodputBBps;
  case 3: return r.rttMsA;
  case 4: return r.rttMsB;
  case 5: return static_cast<double>(r.drops);
  case 6: return r.avgQueueLenPkts;
  case 7: return r.avgSojournMs;
  case 8: return r.durationS;
  default: throw std::out_of_range("MetricValue: no such column");
  }
}

double
StudentT975(size_t dof)
{
  if (dof == 0) {
    throw std::invalid_argument("StudentT975: zero degrees of freedom");
  }
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.975);
}

std::optional<Estimate>
MeanWithCi(std::span<const double> values)
{
  const auto mean = Mean(values);
  if (!mean) {
    return std::nullopt;
  }
  Estimate e;
  e.mean = *mean;
  e.n = values.size();
  if (e.n >= 2) {
    double ss = 0.0;
    for (double v : values) {
      ss += (v - e.mean) * (v - e.mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(e.n - 1));
    e.ci95 = StudentT975(e.n - 1) * sd / std::sqrt(static_cast<double>(e.n));
  }
  return e;
}

AggregateMetrics
Aggregate(std::span<const RunMetrics> runs)
{
  AggregateMetrics a;
  if (runs.empty()) {
    return a;
  }
  a.scenario = runs.front().scenario;
  a.qdisc = runs.front().qdisc;
  a.cc = runs.front().cc;
  a.delayAMs = runs.front().delayAMs;
  a.reps = runs.size();
  std::vector<double> column;
  for (size_t c = 0; c < kMetricColumns.size(); ++c) {
    column.clear();
    for (const auto& r : runs) {
      if (auto v = MetricValue(r, c)) {
        column.push_back(*v);
      }
    }
    a.values[c] = MeanWithCi(column);
  }
  return a;
}

std::vector<AggregateMetrics>
AggregateByCell(std::span<const RunMetrics> runs)
{
  std::vector<AggregateMetrics> out;
  size_t begin = 0;
  const auto sameCell = [](const RunMetrics& x, const RunMetrics& y) {
    return x.scenario == y.scenario && x.qdisc == y.qdisc && x.cc == y.cc && x.delayAMs == y.delayAMs;
  };
  for (size_t i = 1; i <= runs.size(); ++i) {
    if (i == runs.size() || !sameCell(runs[i], runs[begin])) {
      out.push_back(Aggregate(runs.subspan(begin, i - begin)));
      begin = i;
    }
  }
  return out;
}

std::string
FormatDecimal(double v, int precision)
{
  if (!std::isfinite(v)) {
    throw std::invalid_argument("FormatDecimal: non-finite value");
  }
  if (v == 0.0) {
    v = 0.0; // no "-0"
  }
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  if (ec != std::errc()) {
    throw std::runtime_error("FormatDecimal: formatting failed");
  }
  return std::string(buf, end);
}

namespace {
std::string
FormatDelay(double ms)
{
  // Shortest round-trip form for the factor label (1, 10, 0.5 ...).
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, ms, std::chars_format::fixed);
  return std::string(buf, end);
}

void
WriteOptional(std::ostream& os, const std::optional<double>& v)
{
  if (v) {
    os << FormatDecimal(*v);
  }
}
} // namespace

void
WriteRunsCsv(std::ostream& os, std::span<const RunMetrics> runs)
{
  os << "scenario,qdisc,cc,delay_a_ms,rep,seed";
  for (auto c : kMetricColumns) {
    os << ',' << c;
  }
  os << '\n';
  for (const auto& r : runs) {
    os << r.scenario << ',' << r.qdisc << ',' << r.cc << ',' << FormatDelay(r.delayAMs) << ',' << r.rep << ','
       << r.seed;
    for (size_t c = 0; c < kMetricColumns.size(); ++c) {
      os << ',';
      if (c == 5) {
        os << r.drops;
      } else {
        WriteOptional(os, MetricValue(r, c));
      }
    }
    os << '\n';
  }
}

void
WriteAggregateCsv(std::ostream& os, std::span<const AggregateMetrics> rows)
{
  os << "scenario,qdisc,cc,delay_a_ms,n";
  for (auto c : kMetricColumns) {
    os << ',' << c << "_mean," << c << "_ci95";
  }
  os << '\n';
  for (const auto& a : rows) {
    os << a.scenario << ',' << a.qdisc << ',' << a.cc << ',' << FormatDelay(a.delayAMs) << ',' << a.reps;
    for (const auto& v : a.values) {
      os << ',';
      if (v) {
        os << FormatDecimal(v->mean);
      }
      os << ',';
      if (v && v->ci95) {
        os << FormatDecimal(*v->ci95);
      }
    }
    os << '\n';
  }
}

} // namespace bloatsim::metrics

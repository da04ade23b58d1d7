#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "bloatsim/metrics/metrics.hpp"

using namespace bloatsim::metrics;
using bloatsim::sim::SimTime;

TEST(Goodput, BitsOverDeliverySpan)
{
  EXPECT_DOUBLE_EQ(Goodput(4'194'304, SimTime::Seconds(1), SimTime::Seconds(41)), 4'194'304.0 * 8 / 40);
  EXPECT_DOUBLE_EQ(Goodput(125'000, SimTime(), SimTime::Seconds(1)), 1e6);
  EXPECT_EQ(Goodput(0, SimTime(), SimTime()), 0.0);
  EXPECT_THROW(Goodput(10, SimTime::Seconds(1), SimTime::Seconds(1)), std::invalid_argument);
}

TEST(Mean, Basics)
{
  const std::vector<double> v{1.0, 2.0, 6.0};
  EXPECT_DOUBLE_EQ(*Mean(v), 3.0);
  EXPECT_FALSE(Mean(std::vector<double>{}));
  SampleMean m;
  EXPECT_FALSE(m.Value());
  m.Add(10);
  m.Add(20);
  EXPECT_DOUBLE_EQ(*m.Value(), 15.0);
  EXPECT_EQ(m.Count(), 2u);
}

TEST(TimeAverage, WeightsByHoldingTime)
{
  // 0 for 1 s, 10 for 3 s.
  const std::vector<std::pair<SimTime, double>> s{{SimTime(), 0.0}, {SimTime::Seconds(1), 10.0}};
  EXPECT_DOUBLE_EQ(TimeAverage(s, SimTime::Seconds(4)), 7.5);
  TimeWeightedMean m;
  m.Update(SimTime::Seconds(2), 4.0);
  EXPECT_DOUBLE_EQ(m.Finish(SimTime::Seconds(2)), 4.0);
  EXPECT_THROW(m.Update(SimTime::Seconds(1), 1.0), std::invalid_argument);
  EXPECT_THROW(m.Finish(SimTime::Seconds(1)), std::invalid_argument);
}

TEST(StudentT, Quantiles)
{
  EXPECT_NEAR(StudentT975(1), 12.706, 1e-3);
  EXPECT_NEAR(StudentT975(2), 4.303, 1e-3);
  EXPECT_NEAR(StudentT975(34), 2.032, 1e-3);
  EXPECT_NEAR(StudentT975(1000000), 1.960, 1e-3);
  EXPECT_THROW(StudentT975(0), std::invalid_argument);
}

TEST(MeanWithCi, HalfWidth)
{
  const std::vector<double> v{1.0, 2.0, 3.0};
  const auto e = MeanWithCi(v);
  ASSERT_TRUE(e);
  EXPECT_DOUBLE_EQ(e->mean, 2.0);
  EXPECT_EQ(e->n, 3u);
  ASSERT_TRUE(e->ci95);
  EXPECT_NEAR(*e->ci95, 4.302652729749464 / std::sqrt(3.0), 1e-9);

  const std::vector<double> one{5.0};
  EXPECT_FALSE(MeanWithCi(one)->ci95);
  const std::vector<double> same(35, 7.0);
  EXPECT_DOUBLE_EQ(*MeanWithCi(same)->ci95, 0.0);
  EXPECT_FALSE(MeanWithCi(std::vector<double>{}));
}

TEST(FormatDecimal, FixedPrecision)
{
  EXPECT_EQ(FormatDecimal(1.5), "1.500000");
  EXPECT_EQ(FormatDecimal(-0.0), "0.000000");
  EXPECT_EQ(FormatDecimal(2.0 / 3.0, 3), "0.667");
  EXPECT_THROW(FormatDecimal(NAN), std::invalid_argument);
}

namespace {
RunMetrics
MakeRun(std::string qdisc, double delay, uint32_t rep, double goodput)
{
  RunMetrics r;
  r.scenario = "hetnet";
  r.qdisc = std::move(qdisc);
  r.cc = "lia";
  r.delayAMs = delay;
  r.rep = rep;
  r.seed = 100 + rep;
  r.goodputTotalBps = goodput;
  r.goodputABps = goodput / 2;
  r.goodputBBps = goodput / 2;
  r.rttMsA = 10.0;
  r.drops = rep;
  r.durationS = 30.0;
  return r;
}
} // namespace

TEST(Aggregate, GroupsConsecutiveCells)
{
  const std::vector<RunMetrics> runs{MakeRun("codel", 1, 0, 10), MakeRun("codel", 1, 1, 20), MakeRun("codel", 0.5, 0, 30)};
  const auto agg = AggregateByCell(runs);
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_EQ(agg[0].reps, 2u);
  EXPECT_DOUBLE_EQ(agg[0].values[0]->mean, 15.0);
  EXPECT_NEAR(*agg[0].values[0]->ci95, 12.706204736 * std::sqrt(50.0) / std::sqrt(2.0), 1e-6);
  EXPECT_FALSE(agg[0].values[4]); // rtt_ms_b never measured
  EXPECT_EQ(agg[1].reps, 1u);
}

TEST(Csv, RunsLayout)
{
  std::ostringstream os;
  const std::vector<RunMetrics> runs{MakeRun("droptail", 0.5, 3, 1000)};
  WriteRunsCsv(os, runs);
  EXPECT_EQ(os.str(),
            "scenario,qdisc,cc,delay_a_ms,rep,seed,goodput_bps_total,goodput_bps_a,goodput_bps_b,rtt_ms_a,rtt_ms_b,"
            "drops,avg_qlen_pkts,avg_sojourn_ms,duration_s\n"
            "hetnet,droptail,lia,0.5,3,103,1000.000000,500.000000,500.000000,10.000000,,3,,,30.000000\n");
}

TEST(Csv, AggregateHeader)
{
  std::ostringstream os;
  const std::vector<RunMetrics> runs{MakeRun("codel", 10, 0, 1), MakeRun("codel", 10, 1, 3)};
  WriteAggregateCsv(os, AggregateByCell(runs));
  std::istringstream in(os.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header.rfind("scenario,qdisc,cc,delay_a_ms,n,goodput_bps_total_mean,goodput_bps_total_ci95,", 0), 0u);
  EXPECT_EQ(row.rfind("hetnet,codel,lia,10,2,2.000000,12.706205,", 0), 0u);
}

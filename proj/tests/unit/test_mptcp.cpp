#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bloatsim/mptcp/coupling.hpp"
#include "bloatsim/mptcp/receiver.hpp"
#include "bloatsim/mptcp/sender.hpp"
#include "bloatsim/sim/prng.hpp"

using namespace bloatsim;
using namespace bloatsim::mptcp;
using net::FlowId;
using sim::SimTime;

namespace {

SimTime
Ms(int64_t ms)
{
  return SimTime::Milliseconds(ms);
}

// Alpha by the defining expression, evaluated in long double.
long double
AlphaOracle(const std::vector<SubflowSnapshot>& s)
{
  long double total = 0, num = 0, den = 0;
  for (const auto& x : s) total += x.w;
  for (const auto& x : s) {
    const long double r = x.rttSeconds;
    num = std::max(num, static_cast<long double>(x.w) / (r * r));
    den += static_cast<long double>(x.w) / r;
  }
  return total * num / (den * den);
}

struct Harness
{
  sim::Simulator sim;
  std::vector<std::pair<int, Packet>> sent;
  std::unique_ptr<MptcpSender> sender;

  explicit Harness(SenderConfig cfg)
  {
    SenderHooks h;
    h.transmit = [this](int i, Packet&& p) { sent.emplace_back(i, std::move(p)); };
    sender = std::make_unique<MptcpSender>(sim, cfg, std::move(h));
  }

  Packet Ack(int i, uint64_t subflowAck, uint64_t dataAck, SimTime echo = SimTime()) const
  {
    Packet a;
    a.flow = FlowId::Ack;
    a.ackFlow = net::SubflowFlow(i);
    a.size = 40;
    a.subflowAck = subflowAck;
    a.dataAck = dataAck;
    a.echoSentAt = echo;
    return a;
  }
};

SenderConfig
SmallConfig(double initialWindow = 2.0)
{
  SenderConfig c;
  c.mss = 1000;
  c.workloadBytes = 100'000;
  c.receiveWindow = 65'000;
  c.cwndCapBytes = 65'000;
  c.initialWindow = initialWindow;
  return c;
}

} // namespace

TEST(Coupling, AlphaExamples)
{
  EXPECT_DOUBLE_EQ(Alpha(CouplingView({{7.0, 0.05}})), 1.0);
  EXPECT_DOUBLE_EQ(Alpha(CouplingView({{10.0, 0.1}, {10.0, 0.1}})), 0.5);
  // w/rtt^2 = 3200 and 50; sum of w/rtt = 160 + 10.
  EXPECT_NEAR(Alpha(CouplingView({{8.0, 0.05}, {2.0, 0.2}})), 10.0 * 3200.0 / (170.0 * 170.0), 1e-12);
  EXPECT_NEAR(Alpha(CouplingView({{8.0, 0.05}, {2.0, 0.2}})), 1.1073, 1e-4);
  EXPECT_THROW(Alpha(CouplingView()), std::invalid_argument);
  EXPECT_THROW(Alpha(CouplingView({{1.0, 0.0}})), std::invalid_argument);
}

TEST(Coupling, AlphaMatchesOracleOnRandomViews)
{
  sim::Prng rng(77);
  for (int c = 0; c < 1000; ++c) {
    std::vector<SubflowSnapshot> s;
    const int n = 1 + static_cast<int>(rng.NextU64() % 4);
    for (int i = 0; i < n; ++i) s.push_back({rng.Uniform(1.0, 100.0), rng.Uniform(0.0005, 3.0)});
    const double got = Alpha(CouplingView(s));
    const long double want = AlphaOracle(s);
    EXPECT_LE(std::abs((got - want) / want), 1e-12) << "case " << c;
  }
}

TEST(Coupling, IncreaseExamples)
{
  const CouplingView one({{4.0, 0.1}});
  EXPECT_DOUBLE_EQ(IncreasePerAck(CcAlgorithm::Lia, one, 0), 0.25);
  const CouplingView two({{10.0, 0.1}, {30.0, 0.1}});
  EXPECT_DOUBLE_EQ(IncreasePerAck(CcAlgorithm::Uncoupled, two, 0), 0.1);
  EXPECT_DOUBLE_EQ(IncreasePerAck(CcAlgorithm::FullyCoupled, two, 0), 0.025);
  // Equal RTTs: alpha = 40 * 3000 / 400^2 = 0.75.
  EXPECT_NEAR(IncreasePerAck(CcAlgorithm::Lia, two, 0), 0.75 / 40.0, 1e-15);
  EXPECT_NEAR(IncreasePerAck(CcAlgorithm::RttCompensator, two, 1), std::min(0.75 / 40.0, 1.0 / 30.0), 1e-15);
}

TEST(Coupling, DecreaseHalvesWithFloor)
{
  EXPECT_DOUBLE_EQ(DecreasedWindow(10.0), 5.0);
  EXPECT_DOUBLE_EQ(DecreasedWindow(1.5), 1.0);
  EXPECT_DOUBLE_EQ(DecreasedWindow(1.0), 1.0);
}

TEST(Coupling, ParsesNames)
{
  for (auto a : {CcAlgorithm::Lia, CcAlgorithm::RttCompensator, CcAlgorithm::Uncoupled, CcAlgorithm::FullyCoupled}) {
    EXPECT_EQ(ParseCcAlgorithm(ToString(a)), a);
  }
  EXPECT_FALSE(ParseCcAlgorithm("cubic"));
}

TEST(ReceiveBuffer, Reassembles)
{
  ReceiveBuffer b(10'000);
  using R = ReceiveBuffer::Result;
  EXPECT_EQ(b.OnData(1000, 1000, Ms(1)), R::OutOfOrder);
  EXPECT_EQ(b.BufferedBytes(), 1000u);
  EXPECT_EQ(b.DeliveredBytes(), 0u);
  EXPECT_EQ(b.OnData(1000, 1000, Ms(2)), R::Duplicate);
  EXPECT_EQ(b.OnData(0, 1000, Ms(3)), R::InOrder);
  EXPECT_EQ(b.DeliveredBytes(), 2000u);
  EXPECT_EQ(b.BufferedBytes(), 0u);
  EXPECT_EQ(b.OnData(0, 1000, Ms(4)), R::Duplicate);
  EXPECT_EQ(b.OnData(11'000, 1000, Ms(5)), R::OutOfOrder);
  EXPECT_EQ(b.OnData(12'000, 1000, Ms(5)), R::OverCapacity);
  EXPECT_EQ(*b.FirstDeliveryAt(), Ms(3));
  EXPECT_EQ(*b.LastDeliveryAt(), Ms(3));
}

TEST(MptcpReceiver, AcksBothLevels)
{
  MptcpReceiver r(65536);
  Packet d;
  d.flow = FlowId::SubflowB;
  d.seq = 0;
  d.dsn = 1000;
  d.payload = 1000;
  d.sentAt = Ms(7);
  auto ack = r.OnData(d, Ms(10));
  ASSERT_TRUE(ack);
  EXPECT_EQ(ack->flow, FlowId::Ack);
  EXPECT_EQ(ack->ackFlow, FlowId::SubflowB);
  EXPECT_EQ(ack->subflowAck, 1000u);
  EXPECT_EQ(ack->dataAck, 0u); // connection-level hole at 0
  EXPECT_EQ(ack->echoSentAt, Ms(7));
  EXPECT_EQ(ack->size, MptcpReceiver::kAckSize);

  d.flow = FlowId::SubflowA;
  d.dsn = 0;
  ack = r.OnData(d, Ms(11));
  EXPECT_EQ(ack->subflowAck, 1000u);
  EXPECT_EQ(ack->dataAck, 2000u);
  EXPECT_EQ(r.PathBytes(0), 1000u);
  EXPECT_EQ(r.PathBytes(1), 1000u);

  ack = r.OnData(d, Ms(12));
  EXPECT_EQ(r.DuplicateSegments(), 1u);
  EXPECT_EQ(ack->dataAck, 2000u);
}

TEST(Sender, InitialWindowAndSlowStart)
{
  Harness h(SmallConfig());
  h.sender->EstablishSubflow(0, Ms(10));
  ASSERT_EQ(h.sent.size(), 2u);
  EXPECT_EQ(h.sent[0].second.seq, 0u);
  EXPECT_EQ(h.sent[1].second.dsn, 1000u);
  EXPECT_EQ(h.sent[0].second.size, 1040u);

  h.sim.Run(Ms(10));
  h.sender->OnAck(h.Ack(0, 1000, 1000));
  EXPECT_DOUBLE_EQ(h.sender->Subflow(0).w, 3.0);
  EXPECT_EQ(h.sent.size(), 4u); // in flight: 3
  EXPECT_EQ(h.sender->Subflow(0).BytesInFlight(), 3000u);
}

TEST(Sender, ThreeDupAcksHalveWindow)
{
  Harness h(SmallConfig(12.0));
  h.sender->EstablishSubflow(0, Ms(10));
  ASSERT_EQ(h.sent.size(), 12u);
  h.sim.Run(Ms(10));
  for (int k = 0; k < 3; ++k) h.sender->OnAck(h.Ack(0, 0, 0));
  EXPECT_DOUBLE_EQ(h.sender->Subflow(0).w, 6.0);
  EXPECT_EQ(h.sender->Subflow(0).phase, Phase::FastRecovery);
  ASSERT_EQ(h.sent.size(), 13u);
  EXPECT_EQ(h.sent.back().second.seq, 0u);
  EXPECT_TRUE(h.sent.back().second.retransmission);
  EXPECT_EQ(h.sender->FastRetransmits(), 1u);

  // Recovery ends once everything outstanding at the loss is acknowledged.
  h.sender->OnAck(h.Ack(0, 12'000, 12'000));
  EXPECT_EQ(h.sender->Subflow(0).phase, Phase::CongestionAvoidance);
  EXPECT_DOUBLE_EQ(h.sender->Subflow(0).w, 6.0);
}

TEST(Sender, TimeoutGoesBackToOneSegment)
{
  Harness h(SmallConfig(4.0));
  h.sender->EstablishSubflow(0, Ms(10));
  ASSERT_EQ(h.sent.size(), 4u);
  // srtt 10 ms, rttvar 5 ms: 30 ms clamps to the 200 ms floor.
  h.sim.Run(Ms(199));
  EXPECT_EQ(h.sender->Timeouts(), 0u);
  h.sim.Run(Ms(200));
  EXPECT_EQ(h.sender->Timeouts(), 1u);
  EXPECT_DOUBLE_EQ(h.sender->Subflow(0).w, 1.0);
  EXPECT_DOUBLE_EQ(h.sender->Subflow(0).ssthresh, 2.0);
  ASSERT_EQ(h.sent.size(), 5u);
  EXPECT_EQ(h.sent.back().second.seq, 0u);
  EXPECT_TRUE(h.sent.back().second.retransmission);
  // Exponential backoff: next expiry 400 ms later.
  h.sim.Run(Ms(599));
  EXPECT_EQ(h.sender->Timeouts(), 1u);
  h.sim.Run(Ms(600));
  EXPECT_EQ(h.sender->Timeouts(), 2u);
}

TEST(Sender, SchedulerPrefersLowerRtt)
{
  Harness h(SmallConfig());
  h.sender->EstablishSubflow(1, Ms(5));
  h.sender->EstablishSubflow(0, Ms(50));
  ASSERT_EQ(h.sent.size(), 4u);
  EXPECT_EQ(h.sent[0].first, 1);
  EXPECT_EQ(h.sent[0].second.dsn, 0u);
  EXPECT_EQ(h.sent[2].first, 0);
  EXPECT_EQ(h.sent[2].second.dsn, 2000u);
}

TEST(Sender, ReceiveWindowLimitsConnectionData)
{
  auto cfg = SmallConfig(40.0);
  cfg.receiveWindow = 5000;
  cfg.cwndCapBytes = 65'000;
  Harness h(cfg);
  h.sender->EstablishSubflow(0, Ms(10));
  h.sender->EstablishSubflow(1, Ms(10));
  EXPECT_EQ(h.sent.size(), 5u);
  EXPECT_EQ(h.sender->NextDsn(), 5000u);
}

TEST(Sender, CompletesOnFinalDataAck)
{
  auto cfg = SmallConfig();
  cfg.workloadBytes = 1500;
  bool done = false;
  sim::Simulator sim;
  SenderHooks hooks;
  std::vector<Packet> sent;
  hooks.transmit = [&](int, Packet&& p) { sent.push_back(std::move(p)); };
  hooks.onComplete = [&] { done = true; };
  MptcpSender s(sim, cfg, hooks);
  s.EstablishSubflow(0, Ms(10));
  ASSERT_EQ(sent.size(), 2u);
  EXPECT_EQ(sent[1].payload, 500u);
  Packet a;
  a.ackFlow = FlowId::SubflowA;
  a.subflowAck = 1500;
  a.dataAck = 1500;
  s.OnAck(a);
  EXPECT_TRUE(done);
  EXPECT_TRUE(s.Complete());
  sim.Run();
  EXPECT_EQ(s.Timeouts(), 0u);
}

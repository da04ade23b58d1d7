#include <algorithm>
#include <charconv>
#include <sstream>

#include "bloatsim/experiment/scenario.hpp"
#include "bloatsim/mptcp/receiver.hpp"
#include "bloatsim/mptcp/sender.hpp"
#include "bloatsim/net/link.hpp"
#include "bloatsim/sim/prng.hpp"
#include "bloatsim/sim/simulator.hpp"

namespace bloatsim::experiment {

using net::FlowId;
using net::Packet;
using sim::SimTime;

namespace {

std::string
ShortestDecimal(double v)
{
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// All state of one run. Members are declared in dependency order; lambdas
// capture `this` only.
class HetNetRun
{
public:
  HetNetRun(const ScenarioConfig& cfg, const Cell& cell, uint64_t seed, const RunOptions& options);

  metrics::RunMetrics Execute(uint32_t rep);

private:
  void Trace(const std::string& line);
  void FromSender(int i, Packet&& pkt);
  void AtRouter(Packet&& pkt);
  void AtReceiver(Packet&& pkt);
  void AtSender(Packet&& ack);
  void OnComplete();

  static std::string Describe(const Packet& p);

  const ScenarioConfig& m_cfg;
  Cell m_cell;
  uint64_t m_seed;
  const RunOptions& m_options;

  sim::Simulator m_sim;
  sim::Prng m_prng;
  uint64_t m_nextId = 1;

  net::Link m_uplinkA;
  net::Link m_uplinkB;
  net::Link m_uplinkD;
  net::Link m_reverseC;
  net::Link m_downlinkA;
  net::Link m_downlinkB;
  std::unique_ptr<net::Router> m_router;
  std::unique_ptr<net::CbrSource> m_cbr;
  mptcp::MptcpReceiver m_receiver;
  std::unique_ptr<mptcp::MptcpSender> m_sender;

  metrics::TimeWeightedMean m_queueLen;
  metrics::SampleMean m_sojournMs;
  std::array<metrics::SampleMean, 2> m_rttMs;
  uint64_t m_drops = 0;
  uint64_t m_dequeueDrops = 0;
  std::optional<SimTime> m_completedAt;
};

SimTime
Ms(double ms)
{
  return SimTime::FromMilliseconds(ms);
}

HetNetRun::HetNetRun(const ScenarioConfig& cfg, const Cell& cell, uint64_t seed, const RunOptions& options)
  : m_cfg(cfg), m_cell(cell), m_seed(seed), m_options(options), m_prng(seed),
    m_uplinkA(cfg.accessRateBps, Ms(cell.delayAMs), cfg.jitterFraction, &m_prng),
    m_uplinkB(cfg.accessRateBps, Ms(cfg.delayBMs), cfg.jitterFraction, &m_prng),
    m_uplinkD(cfg.accessRateBps, Ms(cfg.delayDMs), cfg.jitterFraction, &m_prng),
    m_reverseC(cfg.bottleneckRateBps, Ms(cfg.bottleneckDelayMs), cfg.jitterFraction, &m_prng),
    m_downlinkA(cfg.accessRateBps, Ms(cell.delayAMs), cfg.jitterFraction, &m_prng),
    m_downlinkB(cfg.accessRateBps, Ms(cfg.delayBMs), cfg.jitterFraction, &m_prng),
    m_receiver(cfg.rcvWindowBytes)
{
  net::RouterHooks hooks;
  hooks.onOccupancy = [this](SimTime now, size_t occ) {
    m_queueLen.Update(now, static_cast<double>(occ));
    if (m_options.audit != nullptr) {
      m_options.audit->maxOccupancy = std::max<uint64_t>(m_options.audit->maxOccupancy, occ);
    }
  };
  hooks.onDrop = [this](const Packet& p, SimTime now, bool atDequeue) {
    ++m_drops;
    if (atDequeue) {
      ++m_dequeueDrops;
    }
    if (m_options.trace) {
      Trace(std::to_string(now.Ns()) + (atDequeue ? " drop-dequeue " : " drop-admit ") + Describe(p));
    }
  };
  hooks.onDequeue = [this](const Packet& p, SimTime now, SimTime sojourn) {
    m_sojournMs.Add(sojourn.ToMilliseconds());
    if (m_options.trace) {
      Trace(std::to_string(now.Ns()) + " dequeue " + Describe(p) + " sojourn_ns=" + std::to_string(sojourn.Ns()));
    }
  };
  m_router = std::make_unique<net::Router>(
    m_sim, qdisc::MakeQueueDisc(cell.qdisc, cfg.Discipline()),
    net::Link(cfg.bottleneckRateBps, Ms(cfg.bottleneckDelayMs), cfg.jitterFraction, &m_prng),
    [this](Packet&& p) { AtReceiver(std::move(p)); }, std::move(hooks));

  m_cbr = std::make_unique<net::CbrSource>(m_sim, cfg.cbrRateBps, cfg.packetSize, [this](Packet&& p) {
    p.id = m_nextId++;
    const SimTime arrival = m_uplinkD.Transmit(p.size, m_sim.Now());
    m_sim.ScheduleAt(arrival, [this, p = std::move(p)]() mutable { AtRouter(std::move(p)); });
  });

  mptcp::SenderConfig sc;
  sc.workloadBytes = cfg.workloadBytes;
  sc.mss = cfg.Mss();
  sc.headerBytes = cfg.headerBytes;
  sc.receiveWindow = cfg.rcvWindowBytes;
  sc.cwndCapBytes = cfg.rcvWindowBytes;
  sc.initialWindow = cfg.initialWindow;
  sc.algorithm = cell.cc;

  mptcp::SenderHooks sh;
  sh.transmit = [this](int i, Packet&& p) { FromSender(i, std::move(p)); };
  sh.onRttSample = [this](int i, SimTime sample) { m_rttMs[i].Add(sample.ToMilliseconds()); };
  sh.onComplete = [this] { OnComplete(); };
  if (m_options.audit != nullptr) {
    sh.onWindowSend = [this](int, const mptcp::SubflowState& s) {
      RunAudit& a = *m_options.audit;
      a.minWindow = std::min(a.minWindow, s.w);
      if (static_cast<double>(s.BytesInFlight()) > s.w * m_cfg.Mss() + 1e-9) {
        ++a.windowViolations;
      }
      if (m_sender && m_sender->NextDsn() > m_sender->DataAcked() + m_cfg.rcvWindowBytes) {
        ++a.rwndViolations;
      }
    };
  }
  m_sender = std::make_unique<mptcp::MptcpSender>(m_sim, sc, std::move(sh));
}

std::string
HetNetRun::Describe(const Packet& p)
{
  std::ostringstream os;
  os << "id=" << p.id << " flow=" << net::ToString(p.flow) << " size=" << p.size;
  if (p.flow == FlowId::SubflowA || p.flow == FlowId::SubflowB) {
    os << " seq=" << p.seq << " dsn=" << p.dsn << (p.retransmission ? " rtx" : "");
  } else if (p.flow == FlowId::Ack) {
    os << " of=" << net::ToString(p.ackFlow) << " ack=" << p.subflowAck << " data_ack=" << p.dataAck;
  }
  return os.str();
}

void
HetNetRun::Trace(const std::string& line)
{
  m_options.trace(line);
}

void
HetNetRun::FromSender(int i, Packet&& pkt)
{
  pkt.id = m_nextId++;
  if (m_options.trace) {
    Trace(std::to_string(m_sim.Now().Ns()) + " send " + Describe(pkt));
  }
  net::Link& up = i == 0 ? m_uplinkA : m_uplinkB;
  const SimTime arrival = up.Transmit(pkt.size, m_sim.Now());
  m_sim.ScheduleAt(arrival, [this, p = std::move(pkt)]() mutable { AtRouter(std::move(p)); });
}

void
HetNetRun::AtRouter(Packet&& pkt)
{
  if (m_options.trace) {
    Trace(std::to_string(m_sim.Now().Ns()) + " arrive " + Describe(pkt));
  }
  m_router->Enqueue(std::move(pkt));
}

void
HetNetRun::AtReceiver(Packet&& pkt)
{
  if (pkt.flow == FlowId::UdpCbr) {
    return;
  }
  auto ack = m_receiver.OnData(pkt, m_sim.Now());
  if (m_options.trace) {
    Trace(std::to_string(m_sim.Now().Ns()) + " receive " + Describe(pkt) + (ack ? "" : " discarded"));
  }
  if (!ack) {
    return;
  }
  ack->id = m_nextId++;
  const SimTime atRouter = m_reverseC.Transmit(ack->size, m_sim.Now());
  m_sim.ScheduleAt(atRouter, [this, a = std::move(*ack)]() mutable {
    net::Link& down = a.ackFlow == FlowId::SubflowB ? m_downlinkB : m_downlinkA;
    const SimTime atSender = down.Transmit(a.size, m_sim.Now());
    m_sim.ScheduleAt(atSender, [this, a = std::move(a)]() mutable { AtSender(std::move(a)); });
  });
}

void
HetNetRun::AtSender(Packet&& ack)
{
  if (m_options.trace) {
    Trace(std::to_string(m_sim.Now().Ns()) + " ack " + Describe(ack));
  }
  m_sender->OnAck(ack);
}

void
HetNetRun::OnComplete()
{
  m_completedAt = m_sim.Now();
  if (m_options.trace) {
    Trace(std::to_string(m_sim.Now().Ns()) + " complete");
  }
  m_cbr->Stop();
  m_sim.Stop();
}

metrics::RunMetrics
HetNetRun::Execute(uint32_t rep)
{
  // Handshakes: one round trip of 40-byte control segments over the access
  // link and the bottleneck. Subflow B opens once A is up.
  const auto handshake = [this](double accessMs) {
    const SimTime oneWay = Ms(accessMs) + Ms(m_cfg.bottleneckDelayMs) +
                           sim::SerializationTime(mptcp::MptcpReceiver::kAckSize, m_cfg.accessRateBps) +
                           sim::SerializationTime(mptcp::MptcpReceiver::kAckSize, m_cfg.bottleneckRateBps);
    return oneWay * 2;
  };
  const SimTime rttA = handshake(m_cell.delayAMs);
  const SimTime rttB = handshake(m_cfg.delayBMs);
  m_sim.ScheduleAt(rttA, [this, rttA] {
    if (m_options.trace) Trace(std::to_string(m_sim.Now().Ns()) + " established subflow-A");
    m_sender->EstablishSubflow(0, rttA);
  });
  m_sim.ScheduleAt(rttA + rttB, [this, rttB] {
    if (m_options.trace) Trace(std::to_string(m_sim.Now().Ns()) + " established subflow-B");
    m_sender->EstablishSubflow(1, rttB);
  });
  m_queueLen.Update(SimTime(), 0.0);
  if (m_cbr->Gap() > SimTime()) {
    const auto offset = static_cast<int64_t>(m_prng.Uniform(0.0, static_cast<double>(m_cbr->Gap().Ns())));
    m_cbr->Start(SimTime::Nanoseconds(offset));
  }

  const SimTime ceiling = SimTime::FromSeconds(m_cfg.timeCeilingS);
  m_sim.Run(ceiling);
  if (!m_completedAt) {
    std::ostringstream os;
    os << "run stalled: " << qdisc::ToString(m_cell.qdisc) << '/' << mptcp::ToString(m_cell.cc) << '/'
       << ShortestDecimal(m_cell.delayAMs) << "ms rep " << rep << " acknowledged " << m_sender->DataAcked() << " of "
       << m_cfg.workloadBytes << " bytes by t=" << m_sim.Now().ToSeconds() << " s (ceiling "
       << m_cfg.timeCeilingS << " s)";
    throw RunStalled(os.str());
  }

  const SimTime end = *m_completedAt;
  const auto& buf = m_receiver.Buffer();
  metrics::RunMetrics r;
  r.scenario = m_cfg.scenario;
  r.qdisc = std::string(qdisc::ToString(m_cell.qdisc));
  r.cc = std::string(mptcp::ToString(m_cell.cc));
  r.delayAMs = m_cell.delayAMs;
  r.rep = rep;
  r.seed = m_seed;
  // Per-path goodput shares the connection's delivery span, so the paths
  // add up to the total.
  const SimTime first = buf.FirstDeliveryAt().value_or(SimTime());
  const SimTime last = buf.LastDeliveryAt().value_or(SimTime());
  r.goodputABps = metrics::Goodput(m_receiver.PathBytes(0), first, last);
  r.goodputBBps = metrics::Goodput(m_receiver.PathBytes(1), first, last);
  r.goodputTotalBps = r.goodputABps + r.goodputBBps;
  r.rttMsA = m_rttMs[0].Value();
  r.rttMsB = m_rttMs[1].Value();
  r.drops = m_drops;
  r.avgQueueLenPkts = m_queueLen.Finish(end);
  if (qdisc::IsCoDelFamily(m_cell.qdisc)) {
    r.avgSojournMs = m_sojournMs.Value();
  }
  r.durationS = end.ToSeconds();
  r.deliveredBytes = buf.DeliveredBytes();
  r.dequeueDrops = m_dequeueDrops;
  r.forgiven = m_router->Disc().ForgivenCount();
  r.retransmissions = m_sender->Retransmissions();
  r.timeouts = m_sender->Timeouts();

  if (RunAudit* a = m_options.audit) {
    const auto& d = m_router->Disc();
    a->routerAdmitted = d.AdmittedCount();
    a->routerDelivered = d.DeliveredCount();
    a->routerDropped = d.DequeueDrops();
    a->routerResident = d.Occupancy();
    a->eventsScheduled = m_sim.ScheduledCount();
    a->eventsExecuted = m_sim.ExecutedCount();
    a->eventsCancelled = m_sim.CancelledCount();
    a->bottleneckBytes = m_router->Egress().BytesSent();
    const double capacity = static_cast<double>(m_cfg.bottleneckRateBps) / 8.0 * end.ToSeconds();
    a->bottleneckBusyFraction = capacity > 0 ? static_cast<double>(a->bottleneckBytes) / capacity : 0.0;
  }
  return r;
}

} // namespace

uint64_t
CellHash(const Cell& cell)
{
  const std::string key = std::string(qdisc::ToString(cell.qdisc)) + '|' + std::string(mptcp::ToString(cell.cc)) +
                          '|' + ShortestDecimal(cell.delayAMs);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t
DeriveSeed(uint64_t baseSeed, const Cell& cell, uint32_t rep)
{
  return (baseSeed ^ CellHash(cell)) + rep;
}

metrics::RunMetrics
RunCell(const ScenarioConfig& cfg, const Cell& cell, uint32_t rep, const RunOptions& options)
{
  HetNetRun run(cfg, cell, DeriveSeed(cfg.baseSeed, cell, rep), options);
  return run.Execute(rep);
}

} // namespace bloatsim::experiment

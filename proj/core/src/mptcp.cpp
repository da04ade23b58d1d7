#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bloatsim/mptcp/coupling.hpp"
#include "bloatsim/mptcp/receiver.hpp"
#include "bloatsim/mptcp/sender.hpp"

namespace bloatsim::mptcp {

std::optional<CcAlgorithm>
ParseCcAlgorithm(std::string_view name)
{
  if (name == "lia") return CcAlgorithm::Lia;
  if (name == "rtt-compensator") return CcAlgorithm::RttCompensator;
  if (name == "uncoupled") return CcAlgorithm::Uncoupled;
  if (name == "fully-coupled") return CcAlgorithm::FullyCoupled;
  return std::nullopt;
}

std::string_view
ToString(CcAlgorithm alg)
{
  switch (alg) {
  case CcAlgorithm::Lia: return "lia";
  case CcAlgorithm::RttCompensator: return "rtt-compensator";
  case CcAlgorithm::Uncoupled: return "uncoupled";
  case CcAlgorithm::FullyCoupled: return "fully-coupled";
  }
  return "?";
}

CouplingView::CouplingView(std::vector<SubflowSnapshot> subflows) : m_subflows(std::move(subflows))
{
  for (const auto& s : m_subflows) {
    m_total += s.w;
  }
}

double
Alpha(const CouplingView& view)
{
  if (view.Size() == 0 || !(view.TotalWindow() > 0.0)) {
    throw std::invalid_argument("Alpha: total window must be > 0");
  }
  double best = 0.0;
  double sum = 0.0;
  for (const auto& s : view.Subflows()) {
    if (!(s.rttSeconds > 0.0)) {
      throw std::invalid_argument("Alpha: RTT must be > 0");
    }
    best = std::max(best, s.w / (s.rttSeconds * s.rttSeconds));
    sum += s.w / s.rttSeconds;
  }
  return view.TotalWindow() * best / (sum * sum);
}

double
IncreasePerAck(CcAlgorithm alg, const CouplingView& view, size_t i)
{
  const double wi = view.Subflows()[i].w;
  const double total = view.TotalWindow();
  switch (alg) {
  case CcAlgorithm::Lia: return Alpha(view) / total;
  case CcAlgorithm::RttCompensator: return std::min(Alpha(view) / total, 1.0 / wi);
  case CcAlgorithm::FullyCoupled: return 1.0 / total;
  case CcAlgorithm::Uncoupled: return 1.0 / wi;
  }
  return 0.0;
}

double
DecreasedWindow(double w)
{
  return std::max(w / 2.0, 1.0);
}

// ---------------------------------------------------------------------------

ReceiveBuffer::ReceiveBuffer(uint64_t capacity) : m_capacity(capacity)
{
  if (capacity == 0) throw std::invalid_argument("ReceiveBuffer: capacity must be > 0");
}

ReceiveBuffer::Result
ReceiveBuffer::OnData(uint64_t offset, uint32_t len, SimTime now)
{
  if (len == 0) throw std::logic_error("ReceiveBuffer: empty segment");
  if (offset + len <= m_nextExpected || m_outOfOrder.contains(offset)) {
    return Result::Duplicate;
  }
  if (offset + len > m_nextExpected + m_capacity) {
    return Result::OverCapacity;
  }
  if (offset > m_nextExpected) {
    m_outOfOrder.emplace(offset, len);
    m_bufferedBytes += len;
    return Result::OutOfOrder;
  }
  m_nextExpected = offset + len;
  for (auto it = m_outOfOrder.begin(); it != m_outOfOrder.end() && it->first <= m_nextExpected;) {
    m_nextExpected = std::max(m_nextExpected, it->first + it->second);
    m_bufferedBytes -= it->second;
    it = m_outOfOrder.erase(it);
  }
  if (!m_firstDelivery) m_firstDelivery = now;
  m_lastDelivery = now;
  return Result::InOrder;
}

uint64_t
SubflowAckState::OnSegment(uint64_t seq, uint32_t len)
{
  if (seq + len <= m_next) {
    return m_next;
  }
  if (seq > m_next) {
    m_outOfOrder.emplace(seq, len);
    return m_next;
  }
  m_next = seq + len;
  for (auto it = m_outOfOrder.begin(); it != m_outOfOrder.end() && it->first <= m_next;) {
    m_next = std::max(m_next, it->first + it->second);
    it = m_outOfOrder.erase(it);
  }
  return m_next;
}

std::optional<Packet>
MptcpReceiver::OnData(const Packet& data, SimTime now)
{
  const int i = net::SubflowIndex(data.flow);
  const auto result = m_buffer.OnData(data.dsn, data.payload, now);
  if (result == ReceiveBuffer::Result::OverCapacity) {
    return std::nullopt;
  }
  if (result == ReceiveBuffer::Result::Duplicate) {
    ++m_duplicates;
  } else {
    m_pathBytes[i] += data.payload;
  }
  Packet ack;
  ack.flow = net::FlowId::Ack;
  ack.ackFlow = data.flow;
  ack.size = kAckSize;
  ack.subflowAck = m_subflows[i].OnSegment(data.seq, data.payload);
  ack.dataAck = m_buffer.NextExpected();
  ack.echoSentAt = data.sentAt;
  ack.echoRetransmission = data.retransmission;
  ack.sentAt = now;
  return ack;
}

// ---------------------------------------------------------------------------

MptcpSender::MptcpSender(sim::Simulator& simulator, SenderConfig config, SenderHooks hooks)
  : m_sim(simulator), m_config(config), m_hooks(std::move(hooks))
{
  if (m_config.mss == 0) throw std::invalid_argument("MptcpSender: mss must be > 0");
  if (m_config.initialWindow < 1.0) throw std::invalid_argument("MptcpSender: initial window below 1 MSS");
  for (auto& s : m_subflows) {
    s.w = std::min(m_config.initialWindow, WindowCap());
    s.ssthresh = static_cast<double>(m_config.receiveWindow) / m_config.mss;
    s.rto = m_config.initialRto;
  }
}

MptcpSender::~MptcpSender() = default;

double
MptcpSender::WindowCap() const
{
  return std::max(1.0, static_cast<double>(m_config.cwndCapBytes) / m_config.mss);
}

CouplingView
MptcpSender::View() const
{
  std::vector<SubflowSnapshot> snaps;
  for (const auto& s : m_subflows) {
    if (s.established) {
      snaps.push_back({s.w, s.srtt.ToSeconds()});
    }
  }
  return CouplingView(std::move(snaps));
}

void
MptcpSender::EstablishSubflow(int i, SimTime handshakeRtt)
{
  auto& s = m_subflows.at(i);
  if (s.established) {
    throw std::logic_error("MptcpSender: subflow established twice");
  }
  if (handshakeRtt <= SimTime()) {
    throw std::invalid_argument("MptcpSender: handshake RTT must be > 0");
  }
  s.established = true;
  s.srtt = handshakeRtt;
  s.rttvar = SimTime::Nanoseconds(handshakeRtt.Ns() / 2);
  ScheduleSend();
}

void
MptcpSender::UpdateRtt(SubflowState& s, SimTime sample)
{
  const int64_t err = std::llabs(s.srtt.Ns() - sample.Ns());
  s.rttvar = SimTime::Nanoseconds((3 * s.rttvar.Ns() + err) / 4);
  s.srtt = SimTime::Nanoseconds((7 * s.srtt.Ns() + sample.Ns()) / 8);
}

SimTime
MptcpSender::CurrentRto(const SubflowState& s) const
{
  SimTime base = s.established ? s.srtt + s.rttvar * 4 : m_config.initialRto;
  base = std::max(base, m_config.minRto);
  SimTime rto = base;
  for (uint32_t b = 0; b < s.backoff && rto < m_config.maxRto; ++b) {
    rto = rto * 2;
  }
  return std::min(rto, m_config.maxRto);
}

void
MptcpSender::ArmRto(int i)
{
  auto& s = m_subflows[i];
  if (m_complete || s.highTx <= s.highAck) {
    s.rtoDeadline.reset();
    return;
  }
  s.rto = CurrentRto(s);
  const SimTime deadline = m_sim.Now() + s.rto;
  s.rtoDeadline = deadline;
  // The timer event is lazy: it may fire early and re-arm itself, but must
  // never be later than the deadline.
  if (!m_sim.IsPending(m_rtoEvents[i])) {
    m_rtoEvents[i] = m_sim.ScheduleAt(deadline, [this, i] { OnRtoTimer(i); });
  }
}

void
MptcpSender::OnRtoTimer(int i)
{
  auto& s = m_subflows[i];
  m_rtoEvents[i] = sim::EventHandle();
  if (m_complete || !s.rtoDeadline) {
    return;
  }
  if (*s.rtoDeadline > m_sim.Now()) {
    m_rtoEvents[i] = m_sim.ScheduleAt(*s.rtoDeadline, [this, i] { OnRtoTimer(i); });
    return;
  }
  FireRto(i);
}

void
MptcpSender::FireRto(int i)
{
  auto& s = m_subflows[i];
  ++m_timeouts;
  s.ssthresh = DecreasedWindow(s.w);
  s.w = 1.0;
  s.phase = Phase::SlowStart;
  s.dupAcks = 0;
  s.recover = s.highTx;
  s.nextSeq = s.highAck; // go back N
  s.backoff = std::min<uint32_t>(s.backoff + 1, 16);
  s.rtoDeadline.reset();
  FillSubflow(i);
  ArmRto(i);
}

void
MptcpSender::SendSegment(int i, uint64_t seq, SentSegment& seg)
{
  seg.sentAt = m_sim.Now();
  Packet p;
  p.flow = net::SubflowFlow(i);
  p.size = seg.len + m_config.headerBytes;
  p.seq = seq;
  p.dsn = seg.dsn;
  p.payload = seg.len;
  p.retransmission = seg.retransmitted;
  p.sentAt = seg.sentAt;
  m_hooks.transmit(i, std::move(p));
}

void
MptcpSender::Retransmit(int i, uint64_t seq)
{
  auto& s = m_subflows[i];
  auto it = s.outstanding.find(seq);
  if (it == s.outstanding.end()) {
    throw std::logic_error("MptcpSender: retransmission of unknown segment");
  }
  it->second.retransmitted = true;
  ++m_retransmissions;
  SendSegment(i, seq, it->second);
}

bool
MptcpSender::FillSubflow(int i)
{
  auto& s = m_subflows[i];
  if (!s.established || m_complete) {
    return false;
  }
  bool sent = false;
  for (;;) {
    const double allowance = s.w * m_config.mss;
    if (s.nextSeq < s.highTx) {
      auto it = s.outstanding.find(s.nextSeq);
      if (it == s.outstanding.end()) {
        throw std::logic_error("MptcpSender: go-back-N hole without a segment");
      }
      if (static_cast<double>(s.BytesInFlight() + it->second.len) > allowance) {
        break;
      }
      Retransmit(i, s.nextSeq);
      s.nextSeq += it->second.len;
    } else {
      const uint64_t remaining = m_config.workloadBytes - m_nextDsn;
      if (remaining == 0) {
        break;
      }
      const auto len = static_cast<uint32_t>(std::min<uint64_t>(m_config.mss, remaining));
      if (m_nextDsn + len > m_dataAck + m_config.receiveWindow) {
        break;
      }
      if (static_cast<double>(s.BytesInFlight() + len) > allowance) {
        break;
      }
      auto& seg = s.outstanding[s.nextSeq];
      seg.dsn = m_nextDsn;
      seg.len = len;
      const uint64_t seq = s.nextSeq;
      m_nextDsn += len;
      s.nextSeq += len;
      s.highTx = s.nextSeq;
      SendSegment(i, seq, seg);
    }
    sent = true;
    if (m_hooks.onWindowSend) m_hooks.onWindowSend(i, s);
    if (!s.rtoDeadline) ArmRto(i);
  }
  return sent;
}

void
MptcpSender::ScheduleSend()
{
  std::array<int, kSubflows> order{0, 1};
  std::stable_sort(order.begin(), order.end(),
                   [this](int a, int b) { return m_subflows[a].srtt < m_subflows[b].srtt; });
  for (int i : order) {
    FillSubflow(i);
  }
}

void
MptcpSender::OnAck(const Packet& ack)
{
  if (m_complete) {
    return;
  }
  const int i = net::SubflowIndex(ack.ackFlow);
  auto& s = m_subflows[i];
  const bool newData = ack.dataAck > m_dataAck;
  m_dataAck = std::max(m_dataAck, ack.dataAck);

  if (ack.subflowAck > s.highAck) {
    if (ack.subflowAck > s.highTx) {
      throw std::logic_error("MptcpSender: ACK beyond highest transmitted byte");
    }
    if (!ack.echoRetransmission) {
      const SimTime sample = m_sim.Now() - ack.echoSentAt;
      UpdateRtt(s, sample);
      if (m_hooks.onRttSample) m_hooks.onRttSample(i, sample);
    }
    s.outstanding.erase(s.outstanding.begin(), s.outstanding.lower_bound(ack.subflowAck));
    s.highAck = ack.subflowAck;
    s.nextSeq = std::max(s.nextSeq, s.highAck);
    s.backoff = 0;

    if (s.phase == Phase::FastRecovery) {
      if (s.highAck >= *s.recover) {
        s.phase = Phase::CongestionAvoidance;
        s.w = s.ssthresh;
        s.dupAcks = 0;
      } else {
        // Partial ACK: the next hole was lost too.
        Retransmit(i, s.highAck);
      }
    } else {
      s.dupAcks = 0;
      if (s.phase == Phase::SlowStart) {
        s.w += 1.0;
        if (s.w >= s.ssthresh) {
          s.phase = Phase::CongestionAvoidance;
        }
      } else {
        const CouplingView view = View();
        size_t vi = 0;
        for (int j = 0; j < i; ++j) {
          vi += m_subflows[j].established ? 1 : 0;
        }
        s.w += IncreasePerAck(m_config.algorithm, view, vi);
      }
      s.w = std::min(s.w, WindowCap());
    }
    s.rtoDeadline.reset();
    ArmRto(i);
  } else if (ack.subflowAck == s.highAck && s.highTx > s.highAck && !newData) {
    if (s.phase == Phase::FastRecovery || s.dupAcks < 3) {
      ++s.dupAcks;
    }
    if (s.phase != Phase::FastRecovery && s.dupAcks == 3 && (!s.recover || s.highAck > *s.recover)) {
      ++m_fastRetransmits;
      s.ssthresh = DecreasedWindow(s.w);
      s.w = s.ssthresh;
      s.phase = Phase::FastRecovery;
      s.recover = s.highTx;
      Retransmit(i, s.highAck);
    }
  }

  if (m_dataAck >= m_config.workloadBytes) {
    m_complete = true;
    for (auto& ev : m_rtoEvents) {
      m_sim.Cancel(ev);
    }
    for (auto& sf : m_subflows) {
      sf.rtoDeadline.reset();
    }
    if (m_hooks.onComplete) m_hooks.onComplete();
    return;
  }
  ScheduleSend();
}

} // namespace bloatsim::mptcp

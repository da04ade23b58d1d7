#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bloatsim/net/link.hpp"
#include "bloatsim/net/packet.hpp"

namespace bloatsim::net {

std::string_view
ToString(FlowId flow)
{
  switch (flow) {
  case FlowId::SubflowA: return "subflow-A";
  case FlowId::SubflowB: return "subflow-B";
  case FlowId::UdpCbr: return "udp-cbr";
  case FlowId::Ack: return "ack";
  }
  return "?";
}

Link::Link(uint64_t rateBps, SimTime baseDelay, double jitterFraction, sim::Prng* prng)
  : m_rateBps(rateBps), m_baseDelay(baseDelay), m_jitterFraction(jitterFraction), m_prng(prng)
{
  if (rateBps == 0) throw std::invalid_argument("Link: rate must be > 0");
  if (baseDelay < SimTime()) throw std::invalid_argument("Link: negative delay");
  if (!(jitterFraction >= 0.0 && jitterFraction < 1.0)) throw std::invalid_argument("Link: jitter fraction not in [0,1)");
}

SimTime
Link::SerializationTimeOf(uint32_t sizeBytes) const
{
  return sim::SerializationTime(sizeBytes, m_rateBps);
}

SimTime
Link::Transmit(uint32_t sizeBytes, SimTime now)
{
  if (sizeBytes == 0) throw std::logic_error("Link::Transmit: zero-size packet");
  const SimTime start = std::max(now, m_busyUntil);
  m_busyUntil = start + SerializationTimeOf(sizeBytes);
  m_bytesSent += sizeBytes;
  SimTime arrival = m_busyUntil + m_baseDelay;
  if (m_prng != nullptr && m_jitterFraction > 0.0 && m_baseDelay > SimTime()) {
    const double maxJitterNs = m_jitterFraction * static_cast<double>(m_baseDelay.Ns());
    const auto jitter = static_cast<int64_t>(std::floor(m_prng->Uniform(0.0, maxJitterNs)));
    arrival += SimTime::Nanoseconds(jitter);
  }
  arrival = std::max(arrival, m_lastArrival);
  m_lastArrival = arrival;
  return arrival;
}

// ---------------------------------------------------------------------------

Router::Router(sim::Simulator& simulator, std::unique_ptr<qdisc::QueueDisc> disc, Link egress, DeliverFn deliver,
               RouterHooks hooks)
  : m_sim(simulator), m_disc(std::move(disc)), m_egress(std::move(egress)), m_deliver(std::move(deliver)),
    m_hooks(std::move(hooks))
{
}

qdisc::AdmitResult
Router::Enqueue(Packet pkt)
{
  const SimTime now = m_sim.Now();
  if (pkt.enq) {
    throw std::logic_error("Router::Enqueue: packet already queued");
  }
  const Packet copy = m_hooks.onDrop ? pkt : Packet{};
  const auto result = m_disc->Admit(std::move(pkt), now);
  if (result == qdisc::AdmitResult::Dropped) {
    if (m_hooks.onDrop) m_hooks.onDrop(copy, now, false);
    return result;
  }
  if (m_hooks.onOccupancy) m_hooks.onOccupancy(now, m_disc->Occupancy());
  if (!m_transmitting) {
    TryServe();
  }
  return result;
}

void
Router::TryServe()
{
  const SimTime now = m_sim.Now();
  m_transmitting = false;
  if (m_disc->Occupancy() == 0) {
    return;
  }
  auto out = m_disc->Dequeue(now);
  for (const auto& d : out.dropped) {
    if (m_hooks.onDrop) m_hooks.onDrop(d, now, true);
  }
  if (m_hooks.onOccupancy) m_hooks.onOccupancy(now, m_disc->Occupancy());
  if (!out.delivered) {
    return;
  }
  Packet pkt = std::move(*out.delivered);
  if (m_hooks.onDequeue) m_hooks.onDequeue(pkt, now, *out.sojournOfDelivered);
  const SimTime arrival = m_egress.Transmit(pkt.size, now);
  m_transmitting = true;
  m_sim.ScheduleAt(m_egress.BusyUntil(), [this] { TryServe(); });
  m_sim.ScheduleAt(arrival, [this, p = std::move(pkt)]() mutable { m_deliver(std::move(p)); });
}

// ---------------------------------------------------------------------------

CbrSource::CbrSource(sim::Simulator& simulator, uint64_t rateBps, uint32_t packetSize, EmitFn emit)
  : m_sim(simulator), m_rateBps(rateBps), m_packetSize(packetSize), m_emit(std::move(emit))
{
  if (packetSize == 0) throw std::invalid_argument("CbrSource: packet size must be > 0");
}

SimTime
CbrSource::Gap() const
{
  return m_rateBps == 0 ? SimTime() : sim::SerializationTime(m_packetSize, m_rateBps);
}

void
CbrSource::Start(SimTime firstSendAt)
{
  if (m_rateBps == 0 || m_running) {
    return;
  }
  m_running = true;
  m_next = m_sim.ScheduleAt(firstSendAt, [this] { Tick(); });
}

void
CbrSource::Stop()
{
  m_running = false;
  m_sim.Cancel(m_next);
}

void
CbrSource::Tick()
{
  if (!m_running) {
    return;
  }
  Packet p;
  p.flow = FlowId::UdpCbr;
  p.size = m_packetSize;
  p.seq = m_sent;
  p.sentAt = m_sim.Now();
  ++m_sent;
  m_next = m_sim.Schedule(Gap(), [this] { Tick(); });
  m_emit(std::move(p));
}

} // namespace bloatsim::net

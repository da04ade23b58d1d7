#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bloatsim/qdisc/codel.hpp"
#include "bloatsim/qdisc/disciplines.hpp"
#include "bloatsim/qdisc/queue_disc.hpp"

namespace bloatsim::qdisc {

std::optional<DisciplineKind>
ParseDisciplineKind(std::string_view name)
{
  if (name == "droptail") return DisciplineKind::DropTail;
  if (name == "codel") return DisciplineKind::CoDel;
  if (name == "codel-lifo") return DisciplineKind::CoDelLifo;
  if (name == "fq-codel") return DisciplineKind::FqCoDel;
  if (name == "fq-codel-lifo") return DisciplineKind::FqCoDelLifo;
  return std::nullopt;
}

std::string_view
ToString(DisciplineKind kind)
{
  switch (kind) {
  case DisciplineKind::DropTail: return "droptail";
  case DisciplineKind::CoDel: return "codel";
  case DisciplineKind::CoDelLifo: return "codel-lifo";
  case DisciplineKind::FqCoDel: return "fq-codel";
  case DisciplineKind::FqCoDelLifo: return "fq-codel-lifo";
  }
  return "?";
}

bool
IsCoDelFamily(DisciplineKind kind)
{
  return kind != DisciplineKind::DropTail;
}

void
DisciplineConfig::Validate() const
{
  if (limit < 1) throw std::invalid_argument("queue limit must be >= 1");
  if (target <= SimTime()) throw std::invalid_argument("CoDel target must be > 0");
  if (interval <= SimTime()) throw std::invalid_argument("CoDel interval must be > 0");
  if (quantum < 1) throw std::invalid_argument("DRR quantum must be >= 1");
}

SimTime
Sojourn(const Packet& pkt, SimTime now)
{
  if (!pkt.enq) {
    throw std::logic_error("sojourn of a packet without an enqueue timestamp");
  }
  if (now < *pkt.enq) {
    throw std::logic_error("sojourn: dequeue before enqueue");
  }
  return now - *pkt.enq;
}

// ---------------------------------------------------------------------------

QueueDisc::QueueDisc(const DisciplineConfig& config) : m_config(config)
{
  m_config.Validate();
}

AdmitResult
QueueDisc::Admit(Packet pkt, SimTime now)
{
  CheckAdmissible(pkt);
  if (pkt.size == 0) {
    throw std::logic_error("QueueDisc::Admit: zero-size packet");
  }
  if (m_occupancy >= m_config.limit) {
    ++m_admissionDrops;
    return AdmitResult::Dropped;
  }
  pkt.enq = now;
  ++m_occupancy;
  m_occupancyBytes += pkt.size;
  ++m_admitted;
  DoEnqueue(std::move(pkt));
  return AdmitResult::Enqueued;
}

DequeueOutcome
QueueDisc::Dequeue(SimTime now)
{
  DequeueOutcome out = DoDequeue(now);
  for (const auto& p : out.dropped) {
    --m_occupancy;
    m_occupancyBytes -= p.size;
    ++m_dequeueDrops;
  }
  if (out.delivered) {
    --m_occupancy;
    m_occupancyBytes -= out.delivered->size;
    ++m_delivered;
  }
  return out;
}

// ---------------------------------------------------------------------------

SimTime
ControlLawSpacing(SimTime interval, uint32_t n)
{
  const double ns = static_cast<double>(interval.Ns()) / std::sqrt(static_cast<double>(n));
  return SimTime::Nanoseconds(std::llround(ns));
}

CoDelDecision
CoDelDecide(const CoDelState& state, SimTime delta, SimTime now, const CoDelParams& params)
{
  CoDelDecision d{CoDelVerdict::Deliver, state};
  if (delta < params.target) {
    d.next.dropping = false;
    d.next.nDrop = 1;
    d.next.firstAboveAt.reset();
    return d;
  }
  if (delta == params.target) {
    return d;
  }
  if (!state.dropping) {
    if (!state.firstAboveAt) {
      d.next.firstAboveAt = now;
    } else if (now - *state.firstAboveAt >= params.interval) {
      d.verdict = CoDelVerdict::Drop;
      d.next.dropping = true;
      d.next.nDrop = 1;
      d.next.nextDropAt = now + ControlLawSpacing(params.interval, 1);
    }
    return d;
  }
  if (now >= state.nextDropAt) {
    d.verdict = CoDelVerdict::Drop;
    d.next.nDrop = state.nDrop + 1;
    d.next.nextDropAt = state.nextDropAt + ControlLawSpacing(params.interval, d.next.nDrop);
  }
  return d;
}

void
ForgivenessState::Observe(SimTime delta)
{
  if (m_samples == 0 || delta > m_deltaMax) {
    m_deltaMax = delta;
  }
  m_deltaSum += delta;
  ++m_samples;
  if (m_prevDelta) {
    const int64_t gamma = (delta - *m_prevDelta).Ns();
    m_lastGamma = gamma;
    m_k = gamma > 0 ? m_k + 1 : 0;
  }
  m_prevDelta = delta;
}

std::optional<double>
ForgivenessState::Theta() const
{
  if (m_samples == 0 || m_deltaSum.Ns() == 0) {
    return std::nullopt;
  }
  const double mean = static_cast<double>(m_deltaSum.Ns()) / static_cast<double>(m_samples);
  return static_cast<double>(m_deltaMax.Ns()) / mean;
}

bool
ForgivenessState::Forgives() const
{
  const auto theta = Theta();
  return !theta || !(static_cast<double>(m_k) > *theta);
}

Packet
CoDelFlowQueue::Pop()
{
  Packet p;
  if (m_order == Order::Fifo) {
    p = std::move(m_store.front());
    m_store.pop_front();
  } else {
    p = std::move(m_store.back());
    m_store.pop_back();
  }
  return p;
}

void
CoDelFlowQueue::Dequeue(SimTime now, DequeueOutcome& out)
{
  const bool lifo = m_order == Order::Lifo;
  while (!m_store.empty()) {
    Packet pkt = Pop();
    const SimTime delta = Sojourn(pkt, now);
    if (lifo) {
      m_forgiveness.Observe(delta);
      if (delta < m_params.target) {
        m_forgiveness.Reset();
      }
    }
    const CoDelDecision d = CoDelDecide(m_state, delta, now, m_params);
    if (d.verdict == CoDelVerdict::Drop) {
      if (lifo && m_forgiveness.Forgives()) {
        // Delivered in place of the drop; the control law does not advance.
        ++m_forgiven;
        out.delivered = std::move(pkt);
        out.sojournOfDelivered = delta;
        return;
      }
      m_state = d.next;
      out.dropped.push_back(std::move(pkt));
      continue;
    }
    m_state = d.next;
    out.delivered = std::move(pkt);
    out.sojournOfDelivered = delta;
    return;
  }
}

// ---------------------------------------------------------------------------

DequeueOutcome
DropTailQueueDisc::DoDequeue(SimTime now)
{
  DequeueOutcome out;
  if (!m_fifo.empty()) {
    out.sojournOfDelivered = Sojourn(m_fifo.front(), now);
    out.delivered = std::move(m_fifo.front());
    m_fifo.pop_front();
  }
  return out;
}

namespace {
CoDelParams
ParamsOf(const DisciplineConfig& c)
{
  return CoDelParams{c.target, c.interval};
}
} // namespace

CoDelQueueDisc::CoDelQueueDisc(const DisciplineConfig& config, CoDelFlowQueue::Order order)
  : QueueDisc(config), m_queue(order, ParamsOf(config))
{
}

DisciplineKind
CoDelQueueDisc::Kind() const
{
  return m_queue.GetOrder() == CoDelFlowQueue::Order::Lifo ? DisciplineKind::CoDelLifo : DisciplineKind::CoDel;
}

DequeueOutcome
CoDelQueueDisc::DoDequeue(SimTime now)
{
  DequeueOutcome out;
  m_queue.Dequeue(now, out);
  return out;
}

FqCoDelQueueDisc::FqCoDelQueueDisc(const DisciplineConfig& config, CoDelFlowQueue::Order order)
  : QueueDisc(config), m_order(order)
{
  for (auto& f : m_flows) {
    f.queue = CoDelFlowQueue(order, ParamsOf(config));
  }
}

DisciplineKind
FqCoDelQueueDisc::Kind() const
{
  return m_order == CoDelFlowQueue::Order::Lifo ? DisciplineKind::FqCoDelLifo : DisciplineKind::FqCoDel;
}

uint64_t
FqCoDelQueueDisc::ForgivenCount() const
{
  uint64_t n = 0;
  for (const auto& f : m_flows) {
    n += f.queue.ForgivenCount();
  }
  return n;
}

void
FqCoDelQueueDisc::CheckAdmissible(const Packet& pkt) const
{
  if (pkt.size > Config().quantum) {
    throw std::logic_error("FQ-CoDel: packet of " + std::to_string(pkt.size) + " bytes exceeds quantum " +
                           std::to_string(Config().quantum));
  }
}

void
FqCoDelQueueDisc::DoEnqueue(Packet&& pkt)
{
  const size_t idx = Index(pkt.flow);
  Flow& f = m_flows[idx];
  f.queue.Push(std::move(pkt));
  if (!f.active) {
    f.active = true;
    f.creditedThisTurn = false;
    f.deficit = 0;
    m_active.push_back(idx);
  }
}

DequeueOutcome
FqCoDelQueueDisc::DoDequeue(SimTime now)
{
  DequeueOutcome out;
  const auto deactivate = [this](Flow& f) {
    f.active = false;
    f.creditedThisTurn = false;
    f.deficit = 0;
    m_active.pop_front();
  };
  while (!m_active.empty()) {
    Flow& f = m_flows[m_active.front()];
    if (!f.creditedThisTurn) {
      f.deficit += Config().quantum;
      f.creditedThisTurn = true;
    }
    if (f.queue.Empty()) {
      deactivate(f);
      continue;
    }
    if (static_cast<int64_t>(f.queue.Peek().size) > f.deficit) {
      // Not enough credit this round; the deficit carries over.
      f.creditedThisTurn = false;
      m_active.push_back(m_active.front());
      m_active.pop_front();
      continue;
    }
    f.queue.Dequeue(now, out);
    if (out.delivered) {
      f.deficit -= out.delivered->size;
      if (f.queue.Empty()) {
        deactivate(f);
      }
      return out;
    }
    deactivate(f);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::unique_ptr<QueueDisc>
MakeQueueDisc(DisciplineKind kind, const DisciplineConfig& config)
{
  using Order = CoDelFlowQueue::Order;
  switch (kind) {
  case DisciplineKind::DropTail: return std::make_unique<DropTailQueueDisc>(config);
  case DisciplineKind::CoDel: return std::make_unique<CoDelQueueDisc>(config, Order::Fifo);
  case DisciplineKind::CoDelLifo: return std::make_unique<CoDelQueueDisc>(config, Order::Lifo);
  case DisciplineKind::FqCoDel: return std::make_unique<FqCoDelQueueDisc>(config, Order::Fifo);
  case DisciplineKind::FqCoDelLifo: return std::make_unique<FqCoDelQueueDisc>(config, Order::Lifo);
  }
  throw std::invalid_argument("unknown discipline");
}

} // namespace bloatsim::qdisc

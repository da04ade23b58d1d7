#pragma once

#include <array>
#include <deque>
#include <optional>

#include "bloatsim/qdisc/codel.hpp"
#include "bloatsim/qdisc/queue_disc.hpp"

namespace bloatsim::qdisc {

// Passive FIFO: drops arrivals when full, never at dequeue.
class DropTailQueueDisc : public QueueDisc
{
public:
  using QueueDisc::QueueDisc;
  DisciplineKind Kind() const override { return DisciplineKind::DropTail; }

protected:
  void DoEnqueue(Packet&& pkt) override { m_fifo.push_back(std::move(pkt)); }
  DequeueOutcome DoDequeue(SimTime now) override;

private:
  std::deque<Packet> m_fifo;
};

// CoDel over a single FIFO queue, or CoDel-LIFO over a single stack.
class CoDelQueueDisc : public QueueDisc
{
public:
  CoDelQueueDisc(const DisciplineConfig& config, CoDelFlowQueue::Order order);

  DisciplineKind Kind() const override;
  uint64_t ForgivenCount() const override { return m_queue.ForgivenCount(); }
  const CoDelFlowQueue& Inner() const { return m_queue; }

protected:
  void DoEnqueue(Packet&& pkt) override { m_queue.Push(std::move(pkt)); }
  DequeueOutcome DoDequeue(SimTime now) override;

private:
  CoDelFlowQueue m_queue;
};

// FQ-CoDel: one CoDel sub-queue per flow identity, served by deficit round
// robin. The packet limit is global; overflow drops the arriving packet.
class FqCoDelQueueDisc : public QueueDisc
{
public:
  FqCoDelQueueDisc(const DisciplineConfig& config, CoDelFlowQueue::Order order);

  DisciplineKind Kind() const override;
  uint64_t ForgivenCount() const override;

  const CoDelFlowQueue& SubQueue(net::FlowId flow) const { return m_flows[Index(flow)].queue; }
  int64_t Deficit(net::FlowId flow) const { return m_flows[Index(flow)].deficit; }

protected:
  void DoEnqueue(Packet&& pkt) override;
  DequeueOutcome DoDequeue(SimTime now) override;
  void CheckAdmissible(const Packet& pkt) const override;

private:
  static constexpr size_t kFlowBuckets = 4;
  static size_t Index(net::FlowId flow) { return static_cast<size_t>(flow); }

  struct Flow
  {
    CoDelFlowQueue queue;
    int64_t deficit = 0;
    bool active = false;
    bool creditedThisTurn = false;
  };

  CoDelFlowQueue::Order m_order;
  std::array<Flow, kFlowBuckets> m_flows;
  std::deque<size_t> m_active;
};

} // namespace bloatsim::qdisc

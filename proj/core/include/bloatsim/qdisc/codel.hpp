#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "bloatsim/qdisc/queue_disc.hpp"

namespace bloatsim::qdisc {

struct CoDelParams
{
  SimTime target;
  SimTime interval;
};

struct CoDelState
{
  bool dropping = false;
  uint32_t nDrop = 1;
  SimTime nextDropAt;
  std::optional<SimTime> firstAboveAt;

  bool operator==(const CoDelState&) const = default;
};

enum class CoDelVerdict
{
  Deliver,
  Drop,
};

struct CoDelDecision
{
  CoDelVerdict verdict;
  CoDelState next; // state after applying the verdict
};

// interval / sqrt(n), rounded to the nearest nanosecond.
SimTime ControlLawSpacing(SimTime interval, uint32_t n);

// The CoDel control law for one packet popped at `now` with sojourn `delta`.
//
//   delta <  target: leave dropping state, nDrop = 1, forget firstAboveAt.
//   delta == target: deliver, state untouched.
//   delta >  target, not dropping: the first such packet starts the clock;
//     once delta has stayed above target for a full interval, drop and enter
//     dropping state with nDrop = 1, next drop one interval out.
//   delta >  target, dropping: drop when now >= nextDropAt, then
//     nDrop += 1 and nextDropAt += interval / sqrt(nDrop).
CoDelDecision CoDelDecide(const CoDelState& state, SimTime delta, SimTime now, const CoDelParams& params);

// Sojourn statistics behind CoDel-LIFO's forgiveness rule. Accumulated over
// consecutive dequeues since the last sub-target sojourn.
class ForgivenessState
{
public:
  // max, running sum/count, gamma = delta - previous delta; k counts
  // consecutive strictly increasing sojourns (reset to 0 when gamma <= 0).
  void Observe(SimTime delta);
  void Reset() { *this = ForgivenessState(); }

  SimTime DeltaMax() const { return m_deltaMax; }
  SimTime DeltaSum() const { return m_deltaSum; }
  uint64_t Samples() const { return m_samples; }
  std::optional<SimTime> PrevDelta() const { return m_prevDelta; }
  std::optional<int64_t> LastGamma() const { return m_lastGamma; }
  uint64_t K() const { return m_k; }

  // max / mean. Absent when the mean is zero (no samples, or all zero).
  std::optional<double> Theta() const;

  // True when a control-law drop must be cancelled: k <= theta, or theta
  // undefined.
  bool Forgives() const;

  bool operator==(const ForgivenessState&) const = default;

private:
  SimTime m_deltaMax;
  SimTime m_deltaSum;
  uint64_t m_samples = 0;
  std::optional<SimTime> m_prevDelta;
  std::optional<int64_t> m_lastGamma;
  uint64_t m_k = 0;
};

// A single CoDel-controlled packet store, FIFO or LIFO. The LIFO flavour
// applies the forgiveness rule. Used directly by the CoDel disciplines and as
// the per-flow sub-queue of the FQ variants.
class CoDelFlowQueue
{
public:
  enum class Order
  {
    Fifo,
    Lifo,
  };

  CoDelFlowQueue() = default;
  CoDelFlowQueue(Order order, CoDelParams params) : m_order(order), m_params(params) {}

  void Push(Packet&& pkt) { m_store.push_back(std::move(pkt)); }
  Order GetOrder() const { return m_order; }
  bool Empty() const { return m_store.empty(); }
  size_t Size() const { return m_store.size(); }
  // Next packet the store would hand out.
  const Packet& Peek() const { return m_order == Order::Fifo ? m_store.front() : m_store.back(); }

  // Pops until one packet is delivered or the store runs dry. Drops are
  // appended to `out.dropped`.
  void Dequeue(SimTime now, DequeueOutcome& out);

  const CoDelState& State() const { return m_state; }
  const ForgivenessState& Forgiveness() const { return m_forgiveness; }
  uint64_t ForgivenCount() const { return m_forgiven; }

private:
  Packet Pop();

  Order m_order = Order::Fifo;
  CoDelParams m_params{};
  std::deque<Packet> m_store;
  CoDelState m_state;
  ForgivenessState m_forgiveness;
  uint64_t m_forgiven = 0;
};

} // namespace bloatsim::qdisc

#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "bloatsim/sim/time.hpp"

namespace bloatsim::sim {

class EventHandle
{
public:
  EventHandle() = default;
  bool IsValid() const { return m_seq != 0; }
  uint64_t Seq() const { return m_seq; }

private:
  friend class Simulator;
  explicit EventHandle(uint64_t seq) : m_seq(seq) {}
  uint64_t m_seq = 0;
};

// Single-threaded discrete-event engine. Events fire in (time, insertion
// order). Scheduling into the past throws std::logic_error.
class Simulator
{
public:
  using Action = std::function<void()>;

  SimTime Now() const { return m_now; }

  EventHandle ScheduleAt(SimTime at, Action action);
  EventHandle Schedule(SimTime delay, Action action) { return ScheduleAt(m_now + delay, std::move(action)); }

  // Returns false if the event already ran or was cancelled.
  bool Cancel(EventHandle& handle);
  bool IsPending(const EventHandle& handle) const;

  // Runs until no events remain, Stop() is called, or the next event lies
  // beyond `limit`. Returns the final clock.
  SimTime Run(SimTime limit = SimTime::Max());
  SimTime RunUntilIdle() { return Run(); }

  // Cancels every pending event; Run() returns after the current handler.
  void Stop();

  size_t PendingCount() const { return m_actions.size(); }
  uint64_t ScheduledCount() const { return m_nextSeq - 1; }
  uint64_t ExecutedCount() const { return m_executed; }
  uint64_t CancelledCount() const { return m_cancelled; }

private:
  struct Key
  {
    SimTime at;
    uint64_t seq;
    bool operator>(const Key& o) const { return at != o.at ? at > o.at : seq > o.seq; }
  };

  SimTime m_now;
  uint64_t m_nextSeq = 1;
  uint64_t m_executed = 0;
  uint64_t m_cancelled = 0;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> m_queue;
  std::unordered_map<uint64_t, Action> m_actions;
};

} // namespace bloatsim::sim

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "bloatsim/net/packet.hpp"
#include "bloatsim/sim/time.hpp"

namespace bloatsim::qdisc {

using net::Packet;
using sim::SimTime;

enum class DisciplineKind
{
  DropTail,
  CoDel,
  CoDelLifo,
  FqCoDel,
  FqCoDelLifo,
};

// Accepts droptail | codel | codel-lifo | fq-codel | fq-codel-lifo.
std::optional<DisciplineKind> ParseDisciplineKind(std::string_view name);
std::string_view ToString(DisciplineKind kind);
bool IsCoDelFamily(DisciplineKind kind);

struct DisciplineConfig
{
  uint32_t limit = 100;                       // packets
  SimTime target = SimTime::Milliseconds(5);  // tau
  SimTime interval = SimTime::Milliseconds(100); // lambda
  uint32_t quantum = 1514;                    // bytes, FQ variants

  // Throws std::invalid_argument on a violated invariant.
  void Validate() const;
};

enum class AdmitResult
{
  Enqueued,
  Dropped,
};

struct DequeueOutcome
{
  std::optional<Packet> delivered;
  std::vector<Packet> dropped;
  std::optional<SimTime> sojournOfDelivered;
};

// delta = deq - enq. Throws std::logic_error for an unstamped packet or a
// dequeue time before the enqueue time.
SimTime Sojourn(const Packet& pkt, SimTime now);

// Common admission path (tail-drop at `limit`, enqueue timestamp) and
// accounting. Subclasses own packet storage and the dequeue policy.
class QueueDisc
{
public:
  explicit QueueDisc(const DisciplineConfig& config);
  virtual ~QueueDisc() = default;

  QueueDisc(const QueueDisc&) = delete;
  QueueDisc& operator=(const QueueDisc&) = delete;

  AdmitResult Admit(Packet pkt, SimTime now);
  DequeueOutcome Dequeue(SimTime now);

  size_t Occupancy() const { return m_occupancy; }
  uint64_t OccupancyBytes() const { return m_occupancyBytes; }
  const DisciplineConfig& Config() const { return m_config; }

  virtual DisciplineKind Kind() const = 0;

  uint64_t AdmittedCount() const { return m_admitted; }
  uint64_t AdmissionDrops() const { return m_admissionDrops; }
  uint64_t DequeueDrops() const { return m_dequeueDrops; }
  uint64_t DeliveredCount() const { return m_delivered; }
  // Drops cancelled by CoDel-LIFO forgiveness.
  virtual uint64_t ForgivenCount() const { return 0; }

protected:
  virtual void DoEnqueue(Packet&& pkt) = 0;
  virtual DequeueOutcome DoDequeue(SimTime now) = 0;
  virtual void CheckAdmissible(const Packet&) const {}

private:
  DisciplineConfig m_config;
  size_t m_occupancy = 0;
  uint64_t m_occupancyBytes = 0;
  uint64_t m_admitted = 0;
  uint64_t m_admissionDrops = 0;
  uint64_t m_dequeueDrops = 0;
  uint64_t m_delivered = 0;
};

std::unique_ptr<QueueDisc> MakeQueueDisc(DisciplineKind kind, const DisciplineConfig& config);

} // namespace bloatsim::qdisc

#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "bloatsim/net/packet.hpp"
#include "bloatsim/qdisc/queue_disc.hpp"
#include "bloatsim/sim/prng.hpp"
#include "bloatsim/sim/simulator.hpp"

namespace bloatsim::net {

using sim::SimTime;

// Point-to-point link: serialization at `rate`, propagation `baseDelay` plus
// per-packet jitter drawn uniformly from [0, jitterFraction * baseDelay).
// Arrivals never overtake one another.
class Link
{
public:
  Link(uint64_t rateBps, SimTime baseDelay, double jitterFraction = 0.0, sim::Prng* prng = nullptr);

  // Starts serializing `sizeBytes` at max(now, busy-until); returns the
  // arrival time at the far end.
  SimTime Transmit(uint32_t sizeBytes, SimTime now);

  SimTime SerializationTimeOf(uint32_t sizeBytes) const;
  bool IsIdle(SimTime now) const { return m_busyUntil <= now; }
  SimTime BusyUntil() const { return m_busyUntil; }
  uint64_t RateBps() const { return m_rateBps; }
  SimTime BaseDelay() const { return m_baseDelay; }
  uint64_t BytesSent() const { return m_bytesSent; }

private:
  uint64_t m_rateBps;
  SimTime m_baseDelay;
  double m_jitterFraction;
  sim::Prng* m_prng;
  SimTime m_busyUntil;
  SimTime m_lastArrival;
  uint64_t m_bytesSent = 0;
};

// Observer hooks for the router's queue. All optional.
struct RouterHooks
{
  std::function<void(SimTime now, size_t occupancy)> onOccupancy;
  std::function<void(const Packet&, SimTime now, bool atDequeue)> onDrop;
  std::function<void(const Packet&, SimTime now, SimTime sojourn)> onDequeue;
};

// Router with one queue discipline in front of one egress link. Work
// conserving: whenever the egress goes idle and the discipline holds a
// packet, the next one is pulled.
class Router
{
public:
  using DeliverFn = std::function<void(Packet&&)>;

  Router(sim::Simulator& simulator, std::unique_ptr<qdisc::QueueDisc> disc, Link egress, DeliverFn deliver,
         RouterHooks hooks = {});

  qdisc::AdmitResult Enqueue(Packet pkt);

  const qdisc::QueueDisc& Disc() const { return *m_disc; }
  const Link& Egress() const { return m_egress; }
  bool Transmitting() const { return m_transmitting; }

private:
  void TryServe();

  sim::Simulator& m_sim;
  std::unique_ptr<qdisc::QueueDisc> m_disc;
  Link m_egress;
  DeliverFn m_deliver;
  RouterHooks m_hooks;
  bool m_transmitting = false;
};

// UDP constant-bit-rate source.
class CbrSource
{
public:
  using EmitFn = std::function<void(Packet&&)>;

  CbrSource(sim::Simulator& simulator, uint64_t rateBps, uint32_t packetSize, EmitFn emit);

  // Inter-send gap, size * 8 / rate. Zero rate disables the source.
  SimTime Gap() const;
  void Start(SimTime firstSendAt);
  void Stop();
  uint64_t Sent() const { return m_sent; }
  bool Running() const { return m_running; }

private:
  void Tick();

  sim::Simulator& m_sim;
  uint64_t m_rateBps;
  uint32_t m_packetSize;
  EmitFn m_emit;
  bool m_running = false;
  sim::EventHandle m_next;
  uint64_t m_sent = 0;
};

} // namespace bloatsim::net

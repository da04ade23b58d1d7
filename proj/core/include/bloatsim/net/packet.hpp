#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "bloatsim/sim/time.hpp"

namespace bloatsim::net {

enum class FlowId : uint8_t
{
  SubflowA = 0,
  SubflowB = 1,
  UdpCbr = 2,
  Ack = 3,
};

std::string_view ToString(FlowId flow);

// Index of a TCP subflow flow id (A -> 0, B -> 1).
inline int SubflowIndex(FlowId flow) { return flow == FlowId::SubflowB ? 1 : 0; }
inline FlowId SubflowFlow(int index) { return index == 1 ? FlowId::SubflowB : FlowId::SubflowA; }

struct Packet
{
  uint64_t id = 0;
  FlowId flow = FlowId::UdpCbr;
  uint32_t size = 0; // on-wire bytes

  // Data segments: subflow sequence number and connection-level data offset
  // (bytes), with `payload` application bytes.
  uint64_t seq = 0;
  uint64_t dsn = 0;
  uint32_t payload = 0;
  bool retransmission = false;
  sim::SimTime sentAt;

  // Stamped once, at queue admission.
  std::optional<sim::SimTime> enq;

  // ACK fields. `ackFlow` names the subflow the ACK belongs to.
  FlowId ackFlow = FlowId::SubflowA;
  uint64_t subflowAck = 0;
  uint64_t dataAck = 0;
  sim::SimTime echoSentAt;
  bool echoRetransmission = false;
};

} // namespace bloatsim::net

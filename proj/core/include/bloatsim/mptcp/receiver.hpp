#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>

#include "bloatsim/net/packet.hpp"
#include "bloatsim/sim/time.hpp"

namespace bloatsim::mptcp {

using net::Packet;
using sim::SimTime;

// Connection-level reassembly buffer shared by all subflows. Bytes become
// deliverable only in order; anything past next-expected waits in an
// out-of-order store bounded by `capacity`.
class ReceiveBuffer
{
public:
  enum class Result
  {
    InOrder,      // advanced next-expected (possibly draining buffered data)
    OutOfOrder,   // stored for later
    Duplicate,    // already held or delivered
    OverCapacity, // beyond the window, discarded
  };

  explicit ReceiveBuffer(uint64_t capacity);

  Result OnData(uint64_t offset, uint32_t len, SimTime now);

  uint64_t NextExpected() const { return m_nextExpected; }
  uint64_t DeliveredBytes() const { return m_nextExpected; }
  uint64_t BufferedBytes() const { return m_bufferedBytes; }
  uint64_t Capacity() const { return m_capacity; }
  std::optional<SimTime> FirstDeliveryAt() const { return m_firstDelivery; }
  std::optional<SimTime> LastDeliveryAt() const { return m_lastDelivery; }

private:
  uint64_t m_capacity;
  uint64_t m_nextExpected = 0;
  uint64_t m_bufferedBytes = 0;
  std::map<uint64_t, uint32_t> m_outOfOrder;
  std::optional<SimTime> m_firstDelivery;
  std::optional<SimTime> m_lastDelivery;
};

// Per-subflow cumulative acknowledgment over the subflow sequence space.
class SubflowAckState
{
public:
  // Returns the cumulative ACK after absorbing [seq, seq + len).
  uint64_t OnSegment(uint64_t seq, uint32_t len);
  uint64_t Cumulative() const { return m_next; }

private:
  uint64_t m_next = 0;
  std::map<uint64_t, uint32_t> m_outOfOrder;
};

// MPTCP receiving endpoint: one ACK per arriving data segment, sent back on
// the segment's own subflow. Each ACK carries the subflow cumulative ACK, the
// connection-level data ACK and an echo of the segment's send timestamp.
class MptcpReceiver
{
public:
  static constexpr uint32_t kAckSize = 40;

  explicit MptcpReceiver(uint64_t receiveWindow) : m_buffer(receiveWindow) {}

  // Empty when the segment was discarded for lying beyond the window.
  std::optional<Packet> OnData(const Packet& data, SimTime now);

  const ReceiveBuffer& Buffer() const { return m_buffer; }
  // Unique payload bytes first received on subflow `i`.
  uint64_t PathBytes(int i) const { return m_pathBytes[i]; }
  uint64_t DuplicateSegments() const { return m_duplicates; }

private:
  ReceiveBuffer m_buffer;
  std::array<SubflowAckState, 2> m_subflows;
  std::array<uint64_t, 2> m_pathBytes{};
  uint64_t m_duplicates = 0;
};

} // namespace bloatsim::mptcp

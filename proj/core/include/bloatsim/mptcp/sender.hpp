#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>

#include "bloatsim/mptcp/coupling.hpp"
#include "bloatsim/net/packet.hpp"
#include "bloatsim/sim/simulator.hpp"

namespace bloatsim::mptcp {

using net::Packet;
using sim::SimTime;

struct SenderConfig
{
  uint64_t workloadBytes = 4u << 20;
  uint32_t mss = 1418;          // payload bytes per segment
  uint32_t headerBytes = 40;    // on-wire overhead per segment
  uint64_t receiveWindow = 65536;
  uint64_t cwndCapBytes = 65536;
  double initialWindow = 2.0;   // MSS
  SimTime minRto = SimTime::Milliseconds(200);
  SimTime maxRto = SimTime::Seconds(60);
  SimTime initialRto = SimTime::Seconds(1);
  CcAlgorithm algorithm = CcAlgorithm::Lia;
};

enum class Phase
{
  SlowStart,
  CongestionAvoidance,
  FastRecovery,
};

struct SentSegment
{
  uint64_t dsn = 0;
  uint32_t len = 0;
  SimTime sentAt;
  bool retransmitted = false;
};

struct SubflowState
{
  bool established = false;
  double w = 2.0;        // MSS
  double ssthresh = 0.0; // MSS
  Phase phase = Phase::SlowStart;
  uint32_t dupAcks = 0;

  SimTime srtt;
  SimTime rttvar;
  SimTime rto;
  uint32_t backoff = 0;
  std::optional<SimTime> rtoDeadline;

  uint64_t nextSeq = 0; // next subflow byte to (re)send
  uint64_t highAck = 0; // cumulative ACK received
  uint64_t highTx = 0;  // highest byte ever sent + 1
  std::optional<uint64_t> recover;

  std::map<uint64_t, SentSegment> outstanding; // keyed by subflow seq

  uint64_t BytesInFlight() const { return nextSeq - highAck; }
};

// Callbacks into the surrounding scenario.
struct SenderHooks
{
  std::function<void(int subflow, Packet&&)> transmit;
  std::function<void(int subflow, SimTime sample)> onRttSample;
  std::function<void()> onComplete;
  // Fired after each window-limited transmission (new data or go-back-N
  // resend), with the subflow state as of that send.
  std::function<void(int subflow, const SubflowState&)> onWindowSend;
};

// Two-subflow MPTCP sender: per-subflow NewReno loss recovery, coupled
// congestion avoidance, a lowest-RTT-first scheduler and a shared receive
// window on connection-level data.
class MptcpSender
{
public:
  static constexpr int kSubflows = 2;

  MptcpSender(sim::Simulator& simulator, SenderConfig config, SenderHooks hooks);
  ~MptcpSender();

  MptcpSender(const MptcpSender&) = delete;
  MptcpSender& operator=(const MptcpSender&) = delete;

  // Handshake done after `handshakeRtt`, which also seeds the RTT estimator.
  void EstablishSubflow(int i, SimTime handshakeRtt);

  void OnAck(const Packet& ack);

  // Pushes as much data as windows allow. Called automatically after ACKs,
  // timeouts and subflow establishment.
  void ScheduleSend();

  bool Complete() const { return m_complete; }
  uint64_t DataAcked() const { return m_dataAck; }
  uint64_t NextDsn() const { return m_nextDsn; }
  const SubflowState& Subflow(int i) const { return m_subflows.at(i); }
  const SenderConfig& Config() const { return m_config; }
  CouplingView View() const;

  uint64_t Retransmissions() const { return m_retransmissions; }
  uint64_t FastRetransmits() const { return m_fastRetransmits; }
  uint64_t Timeouts() const { return m_timeouts; }

private:
  void UpdateRtt(SubflowState& s, SimTime sample);
  SimTime CurrentRto(const SubflowState& s) const;
  void ArmRto(int i);
  void OnRtoTimer(int i);
  void FireRto(int i);
  void Retransmit(int i, uint64_t seq);
  void SendSegment(int i, uint64_t seq, SentSegment& seg);
  bool FillSubflow(int i);
  double WindowCap() const;

  sim::Simulator& m_sim;
  SenderConfig m_config;
  SenderHooks m_hooks;
  std::array<SubflowState, kSubflows> m_subflows;
  std::array<sim::EventHandle, kSubflows> m_rtoEvents;
  uint64_t m_nextDsn = 0;
  uint64_t m_dataAck = 0;
  bool m_complete = false;
  uint64_t m_retransmissions = 0;
  uint64_t m_fastRetransmits = 0;
  uint64_t m_timeouts = 0;
};

} // namespace bloatsim::mptcp

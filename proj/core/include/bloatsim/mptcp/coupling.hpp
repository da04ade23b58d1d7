#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace bloatsim::mptcp {

enum class CcAlgorithm
{
  Lia,
  RttCompensator,
  Uncoupled,
  FullyCoupled,
};

// Accepts lia | rtt-compensator | uncoupled | fully-coupled.
std::optional<CcAlgorithm> ParseCcAlgorithm(std::string_view name);
std::string_view ToString(CcAlgorithm alg);

struct SubflowSnapshot
{
  double w;        // congestion window, MSS
  double rttSeconds;
};

// Windows and RTTs of every established subflow, captured together so that
// W is exactly the sum of the w_i it is paired with.
class CouplingView
{
public:
  CouplingView() = default;
  explicit CouplingView(std::vector<SubflowSnapshot> subflows);

  double TotalWindow() const { return m_total; }
  std::span<const SubflowSnapshot> Subflows() const { return m_subflows; }
  size_t Size() const { return m_subflows.size(); }

private:
  std::vector<SubflowSnapshot> m_subflows;
  double m_total = 0.0;
};

// alpha = W * max_i(w_i / rtt_i^2) / (sum_i w_i / rtt_i)^2.
// Throws std::invalid_argument if any rtt <= 0 or W <= 0.
double Alpha(const CouplingView& view);

// Per-ACK congestion-avoidance increase of subflow `i`, in MSS:
//   LIA             alpha / W
//   RTT compensator min(alpha / W, 1 / w_i)
//   fully coupled   1 / W
//   uncoupled       1 / w_i
double IncreasePerAck(CcAlgorithm alg, const CouplingView& view, size_t i);

// Multiplicative decrease: half the window, never below one MSS.
double DecreasedWindow(double w);

} // namespace bloatsim::mptcp

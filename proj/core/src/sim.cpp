#include <cmath>
#include <stdexcept>
#include <string>

#include "bloatsim/sim/prng.hpp"
#include "bloatsim/sim/simulator.hpp"
#include "bloatsim/sim/time.hpp"

namespace bloatsim::sim {

SimTime
SimTime::FromSeconds(double s)
{
  if (!std::isfinite(s)) {
    throw std::invalid_argument("SimTime: non-finite seconds");
  }
  return SimTime(static_cast<int64_t>(std::llround(s * 1e9)));
}

SimTime
SerializationTime(uint64_t bytes, uint64_t rateBps)
{
  if (rateBps == 0) {
    throw std::invalid_argument("SerializationTime: zero rate");
  }
  const unsigned __int128 num = static_cast<unsigned __int128>(bytes) * 8u * 1000000000u;
  const unsigned __int128 ns = (num + rateBps - 1) / rateBps;
  return SimTime::Nanoseconds(static_cast<int64_t>(ns));
}

// ---------------------------------------------------------------------------

uint64_t
SplitMix64::Next()
{
  m_state += 0x9E3779B97F4A7C15ull;
  uint64_t z = m_state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {
constexpr uint64_t
Rotl(uint64_t x, int k)
{
  return (x << k) | (x >> (64 - k));
}
} // namespace

Prng::Prng(uint64_t seed) : m_seed(seed)
{
  SplitMix64 sm(seed);
  for (auto& w : m_s) {
    w = sm.Next();
  }
}

uint64_t
Prng::NextU64()
{
  const uint64_t result = Rotl(m_s[1] * 5, 7) * 9;
  const uint64_t t = m_s[1] << 17;
  m_s[2] ^= m_s[0];
  m_s[3] ^= m_s[1];
  m_s[1] ^= m_s[2];
  m_s[0] ^= m_s[3];
  m_s[2] ^= t;
  m_s[3] = Rotl(m_s[3], 45);
  return result;
}

double
Prng::NextUnit()
{
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double
Prng::Uniform(double lo, double hi)
{
  if (lo > hi) {
    throw std::invalid_argument("Prng::Uniform: lo > hi");
  }
  if (lo == hi) {
    return lo;
  }
  const double v = lo + (hi - lo) * NextUnit();
  // Guard the half-open bound against rounding at the top of the range.
  return v < hi ? v : std::nextafter(hi, lo);
}

// ---------------------------------------------------------------------------

EventHandle
Simulator::ScheduleAt(SimTime at, Action action)
{
  if (at < m_now) {
    throw std::logic_error("Simulator: event scheduled in the past (at=" + std::to_string(at.Ns()) +
                           "ns, now=" + std::to_string(m_now.Ns()) + "ns)");
  }
  const uint64_t seq = m_nextSeq++;
  m_queue.push(Key{at, seq});
  m_actions.emplace(seq, std::move(action));
  return EventHandle(seq);
}

bool
Simulator::Cancel(EventHandle& handle)
{
  if (!handle.IsValid()) {
    return false;
  }
  const bool erased = m_actions.erase(handle.m_seq) > 0;
  if (erased) {
    ++m_cancelled;
  }
  handle = EventHandle();
  return erased;
}

bool
Simulator::IsPending(const EventHandle& handle) const
{
  return handle.IsValid() && m_actions.contains(handle.m_seq);
}

SimTime
Simulator::Run(SimTime limit)
{
  while (!m_queue.empty()) {
    const Key key = m_queue.top();
    auto it = m_actions.find(key.seq);
    if (it == m_actions.end()) {
      m_queue.pop(); // cancelled
      continue;
    }
    if (key.at > limit) {
      break;
    }
    m_queue.pop();
    Action action = std::move(it->second);
    m_actions.erase(it);
    m_now = key.at;
    ++m_executed;
    action();
  }
  return m_now;
}

void
Simulator::Stop()
{
  m_cancelled += m_actions.size();
  m_actions.clear();
  m_queue = {};
}

} // namespace bloatsim::sim

#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace bloatsim::sim {

// Simulated time (or duration) in integer nanoseconds.
class SimTime
{
public:
  constexpr SimTime() = default;

  static constexpr SimTime Nanoseconds(int64_t ns) { return SimTime(ns); }
  static constexpr SimTime Microseconds(int64_t us) { return SimTime(us * 1000); }
  static constexpr SimTime Milliseconds(int64_t ms) { return SimTime(ms * 1000000); }
  static constexpr SimTime Seconds(int64_t s) { return SimTime(s * 1000000000); }

  // Rounds to the nearest nanosecond.
  static SimTime FromSeconds(double s);
  static SimTime FromMilliseconds(double ms) { return FromSeconds(ms / 1e3); }

  static constexpr SimTime Max() { return SimTime(std::numeric_limits<int64_t>::max()); }

  constexpr int64_t Ns() const { return m_ns; }
  constexpr double ToSeconds() const { return static_cast<double>(m_ns) / 1e9; }
  constexpr double ToMilliseconds() const { return static_cast<double>(m_ns) / 1e6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime o) const { return SimTime(m_ns + o.m_ns); }
  constexpr SimTime operator-(SimTime o) const { return SimTime(m_ns - o.m_ns); }
  constexpr SimTime& operator+=(SimTime o)
  {
    m_ns += o.m_ns;
    return *this;
  }
  constexpr SimTime& operator-=(SimTime o)
  {
    m_ns -= o.m_ns;
    return *this;
  }
  constexpr SimTime operator*(int64_t k) const { return SimTime(m_ns * k); }

private:
  constexpr explicit SimTime(int64_t ns) : m_ns(ns) {}

  int64_t m_ns = 0;
};

// Transmission time of `bytes` at `rateBps` bits per second, rounded up to the
// next nanosecond.
SimTime SerializationTime(uint64_t bytes, uint64_t rateBps);

} // namespace bloatsim::sim

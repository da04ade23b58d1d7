#pragma once

#include <string>

namespace bloatsim::testing {

struct CheckResult
{
  bool ok = false;
  std::string detail;
};

// Replays the schedule behind codel_golden.txt through a FIFO CoDel queue and
// compares every delivery and drop, including n and the next drop time.
CheckResult CoDelGoldenTrace(const std::string& fixturePath);

// Three pops from a LIFO CoDel queue at sojourns 6, 8 and 7 ms.
CheckResult ForgivenessGoldenTrace();

// Alpha against a long-double evaluation of its defining expression.
CheckResult AlphaOracle(int cases, unsigned long long seed);

} // namespace bloatsim::testing

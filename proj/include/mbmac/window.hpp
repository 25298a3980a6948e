#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mbmac/time.hpp"

namespace mbmac {

// Propagation delays of two transmitters that must be locally synchronized
// at a common multi-beam receiver.
struct SynchronizedPair {
  SimTime delay_i = 0;
  SimTime delay_j = 0;
};

struct WindowPeriodCheck {
  bool valid = false;
  SimTime lower_bound = 0;   // 2 * max |t_i - t_j| over all pairs
  SimTime requested = 0;
  bool lower_violated = false;
  bool upper_violated = false;   // requested >= SIFS
  bool infeasible = false;       // no valid window period exists at all
  std::string message;
};

// Validates a requested window period against
//   2 * max|t_{i,r} - t_{j,r}|  <=  window period  <  SIFS.
inline WindowPeriodCheck compute_window_period(
    const std::vector<SynchronizedPair>& pairs, SimTime sifs, SimTime requested) {
  WindowPeriodCheck out;
  out.requested = requested;
  SimTime max_diff = 0;
  for (const auto& p : pairs) {
    max_diff = std::max<SimTime>(max_diff, std::llabs(p.delay_i - p.delay_j));
  }
  out.lower_bound = 2 * max_diff;
  if (out.lower_bound >= sifs) {
    out.infeasible = true;
    out.message = "no valid window period exists: 2*max delay spread " +
                  format_us(out.lower_bound) + " >= SIFS " + format_us(sifs);
    return out;
  }
  if (requested < out.lower_bound) {
    out.lower_violated = true;
    out.message = "window period " + format_us(requested) +
                  " below lower bound " + format_us(out.lower_bound);
    return out;
  }
  if (requested >= sifs) {
    out.upper_violated = true;
    out.message = "window period " + format_us(requested) +
                  " must be strictly less than SIFS " + format_us(sifs);
    return out;
  }
  out.valid = true;
  return out;
}

// ceil(max packet delay between source and intermediate nodes / slot time).
inline int required_role_switch_slots(SimTime max_packet_delay, SimTime slot) {
  if (max_packet_delay <= 0) return 0;
  return static_cast<int>((max_packet_delay + slot - 1) / slot);
}

}  // namespace mbmac

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace mbmac {

// Simulation time in integer nanoseconds. 1 ns resolution keeps the
// non-integral propagation delays (e.g. 2.5 km -> 8333.33 ns) from
// accumulating rounding drift over long runs, while all the MAC timing
// constants (slot 20 us, SIFS 10 us, DIFS 50 us) stay exactly representable.
using SimTime = std::int64_t;

inline constexpr SimTime kNanosecond = 1;
inline constexpr SimTime kMicrosecond = 1000;
inline constexpr SimTime kMillisecond = 1000 * kMicrosecond;
inline constexpr SimTime kSecond = 1000 * kMillisecond;

inline constexpr SimTime from_us(double us) {
  return static_cast<SimTime>(us * static_cast<double>(kMicrosecond) + (us >= 0 ? 0.5 : -0.5));
}

inline constexpr double to_us(SimTime t) {
  return static_cast<double>(t) / static_cast<double>(kMicrosecond);
}

inline constexpr double to_seconds(SimTime t) {
  return static_cast<double>(t) / static_cast<double>(kSecond);
}

inline std::string format_us(SimTime t) {
  return std::to_string(to_us(t)) + " us";
}

// Default IEEE 802.11-style interframe timing used throughout.
struct MacTiming {
  SimTime slot = 20 * kMicrosecond;
  SimTime sifs = 10 * kMicrosecond;
  SimTime difs = 50 * kMicrosecond;
};

}  // namespace mbmac

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "mbmac/time.hpp"

namespace mbmac {

struct Position {
  double x = 0.0;  // meters
  double y = 0.0;  // meters
};

inline double distance(const Position& a, const Position& b) {
  return std::hypot(b.x - a.x, b.y - a.y);
}

// Angle of the vector from -> to, counterclockwise from +x, in [0, 360).
inline double azimuth_deg(const Position& from, const Position& to) {
  if (from.x == to.x && from.y == to.y) {
    throw std::invalid_argument("azimuth undefined for coincident positions");
  }
  double deg = std::atan2(to.y - from.y, to.x - from.x) * 180.0 / 3.14159265358979323846;
  if (deg < 0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

inline double angle_diff_deg(double a, double b) {
  double d = std::fmod(std::fabs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

// Sectored antenna: m contiguous non-overlapping beams covering [0, 360).
// A single-beam steerable antenna (m = 1, steerable = true) points its one
// beam of `beamwidth_deg` at the current peer instead of using fixed sectors.
struct AntennaConfig {
  int num_beams = 1;
  double boresight_offset_deg = 0.0;
  bool steerable = false;
  double beamwidth_deg = 45.0;  // steerable antennas only

  double sector_width_deg() const { return 360.0 / num_beams; }
};

// Sector index holding azimuth `az`, for a fixed (non-steerable) layout.
inline int beam_for_direction(const AntennaConfig& a, double az) {
  double rel = std::fmod(az - a.boresight_offset_deg, 360.0);
  if (rel < 0) rel += 360.0;
  int beam = static_cast<int>(rel / a.sector_width_deg());
  if (beam >= a.num_beams) beam = a.num_beams - 1;  // fp guard at 360-epsilon
  return beam;
}

struct ChannelModel {
  double bit_rate_bps = 5e6;
  double comm_radius_m = 3000.0;
  double propagation_speed_mps = 3e8;

  SimTime max_propagation_delay() const {
    return propagation_delay(comm_radius_m);
  }

  SimTime propagation_delay(double distance_m) const {
    return static_cast<SimTime>(
        std::llround(distance_m / propagation_speed_mps * 1e9));
  }

  SimTime transmission_delay(int size_bytes) const {
    return static_cast<SimTime>(
        std::llround(static_cast<double>(size_bytes) * 8.0 / bit_rate_bps * 1e9));
  }
};

}  // namespace mbmac

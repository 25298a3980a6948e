#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <list>
#include <vector>

#include "mbmac/event_queue.hpp"
#include "mbmac/frame.hpp"
#include "mbmac/geometry.hpp"
#include "mbmac/mac_common.hpp"

namespace mbmac {

// A frame in the air toward one (receiver, beam) pair.
struct Arrival {
  std::uint64_t id = 0;
  Frame frame;
  int tx_node = -1;
  int rx_node = -1;
  int rx_beam = 0;
  SimTime start = 0;
  SimTime end = 0;
  bool corrupted = false;   // temporal overlap on the same beam
  bool half_duplex_lost = false;  // receiver transmitted during the arrival
};

// Result of a completed arrival, handed to the MAC layer.
struct Reception {
  Frame frame;
  int tx_node = -1;
  int beam = 0;
  SimTime arr_start = 0;
  SimTime arr_end = 0;
  bool decodable = false;
};

// Ideal-disk, line-of-sight sectored radio medium. Delivery requires the
// receiver inside the transmit beam and within comm_radius; a steerable
// single-beam receiver additionally must be pointing at the transmitter.
// Any temporal overlap of two arrivals on one receiver beam corrupts both
// (no capture); corrupted frames still count as channel energy.
class Medium {
 public:
  struct Radio {
    Position pos;
    AntennaConfig antenna;
    double steer_az = 0.0;     // steerable antennas: current boresight
    SimTime tx_until = 0;      // transmitting while now < tx_until
  };

  Medium(EventQueue& queue, ChannelModel channel) : queue_(queue), channel_(channel) {}

  int add_radio(Position pos, AntennaConfig antenna) {
    radios_.push_back(Radio{pos, antenna, 0.0, 0});
    beam_arrivals_.emplace_back(antenna.num_beams);
    return static_cast<int>(radios_.size()) - 1;
  }

  Radio& radio(int node) { return radios_[static_cast<std::size_t>(node)]; }
  const Radio& radio(int node) const { return radios_[static_cast<std::size_t>(node)]; }
  int num_radios() const { return static_cast<int>(radios_.size()); }
  const ChannelModel& channel() const { return channel_; }

  void set_position(int node, Position p) { radios_[node].pos = p; }
  void set_steering(int node, double az) { radios_[node].steer_az = az; }

  // MAC delivery callback: invoked at every frame-arrival end.
  void set_receiver(std::function<void(int node, const Reception&)> fn) {
    deliver_ = std::move(fn);
  }

  bool is_transmitting(int node) const { return queue_.now() < radios_[node].tx_until; }

  // Carrier sense: energy currently arriving on the beam, or own transmission.
  bool carrier_busy(int node, int beam) const {
    if (is_transmitting(node)) return true;
    return incoming_busy(node, beam);
  }

  // Energy arriving on the beam from others, ignoring own transmissions.
  bool incoming_busy(int node, int beam) const {
    return !beam_arrivals_[node][beam].empty();
  }

  // Latest in-flight arrival end on the beam (0 when idle).
  SimTime busy_until(int node, int beam) const {
    SimTime t = is_transmitting(node) ? radios_[node].tx_until : 0;
    for (const auto& a : beam_arrivals_[node][beam]) t = std::max(t, a.end);
    return t;
  }

  // Puts a frame on the air from (tx_node, tx_beam) starting now; schedules
  // arrival start/end events at every reachable in-sector receiver. Returns
  // the air end time.
  SimTime transmit(int tx_node, int tx_beam, const Frame& frame) {
    const SimTime air_start = queue_.now();
    const SimTime air_end = air_start + channel_.transmission_delay(frame.size_bytes);
    Radio& tx = radios_[tx_node];
    tx.tx_until = std::max(tx.tx_until, air_end);

    // Half-duplex: starting a transmission ruins anything currently arriving.
    for (auto& beam_list : beam_arrivals_[tx_node]) {
      for (auto& a : beam_list) a.half_duplex_lost = true;
    }

    for (int rx = 0; rx < num_radios(); ++rx) {
      if (rx == tx_node) continue;
      const Radio& r = radios_[rx];
      const double d = distance(tx.pos, r.pos);
      if (d > channel_.comm_radius_m || d == 0.0) continue;
      const double az_out = azimuth_deg(tx.pos, r.pos);
      if (!beam_covers(tx, tx_beam, az_out)) continue;
      const double az_back = azimuth_deg(r.pos, tx.pos);
      int rx_beam = 0;
      if (r.antenna.steerable) {
        if (angle_diff_deg(r.steer_az, az_back) > r.antenna.beamwidth_deg / 2.0) continue;
      } else {
        rx_beam = beam_for_direction(r.antenna, az_back);
      }
      const SimTime prop = channel_.propagation_delay(d);
      schedule_arrival(tx_node, rx, rx_beam, frame, air_start + prop, air_end + prop);
    }
    return air_end;
  }

 private:
  void schedule_arrival(int tx_node, int rx, int rx_beam, const Frame& frame,
                        SimTime start, SimTime end) {
    const std::uint64_t id = ++next_arrival_id_;
    queue_.schedule(start, EventKind::FrameArrivalStart, rx, [=, this] {
      begin_arrival(id, tx_node, rx, rx_beam, frame, start, end);
    });
    queue_.schedule(end, EventKind::FrameArrivalEnd, rx, [=, this] {
      finish_arrival(id, rx, rx_beam);
    });
  }

  void begin_arrival(std::uint64_t id, int tx_node, int rx, int rx_beam,
                     const Frame& frame, SimTime start, SimTime end) {
    auto& list = beam_arrivals_[rx][rx_beam];
    Arrival a;
    a.id = id;
    a.frame = frame;
    a.tx_node = tx_node;
    a.rx_node = rx;
    a.rx_beam = rx_beam;
    a.start = start;
    a.end = end;
    a.half_duplex_lost = is_transmitting(rx);
    for (auto& other : list) {
      other.corrupted = true;
      a.corrupted = true;
    }
    list.push_back(a);
  }

  void finish_arrival(std::uint64_t id, int rx, int rx_beam) {
    auto& list = beam_arrivals_[rx][rx_beam];
    auto it = std::find_if(list.begin(), list.end(),
                           [&](const Arrival& a) { return a.id == id; });
    if (it == list.end()) return;
    Arrival a = *it;
    list.erase(it);
    if (deliver_) {
      Reception r;
      r.frame = a.frame;
      r.tx_node = a.tx_node;
      r.beam = rx_beam;
      r.arr_start = a.start;
      r.arr_end = a.end;
      r.decodable = !a.corrupted && !a.half_duplex_lost && !is_transmitting(rx);
      deliver_(rx, r);
    }
  }

  static bool beam_covers(const Radio& tx, int tx_beam, double az_out) {
    if (tx.antenna.steerable) {
      return angle_diff_deg(tx.steer_az, az_out) <= tx.antenna.beamwidth_deg / 2.0;
    }
    return beam_for_direction(tx.antenna, az_out) == tx_beam;
  }

  EventQueue& queue_;
  ChannelModel channel_;
  std::vector<Radio> radios_;
  // beam_arrivals_[node][beam] = arrivals currently in the air toward it
  std::vector<std::vector<std::list<Arrival>>> beam_arrivals_;
  std::function<void(int, const Reception&)> deliver_;
  std::uint64_t next_arrival_id_ = 0;
};

}  // namespace mbmac

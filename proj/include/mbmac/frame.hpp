#pragma once

#include <cstdint>
#include <string>

#include "mbmac/geometry.hpp"
#include "mbmac/time.hpp"

namespace mbmac {

enum class FrameKind : int { Rts, Cts, Data, Ack, NRts, NCts };

inline const char* frame_kind_name(FrameKind k) {
  switch (k) {
    case FrameKind::Rts: return "RTS";
    case FrameKind::Cts: return "CTS";
    case FrameKind::Data: return "DATA";
    case FrameKind::Ack: return "ACK";
    case FrameKind::NRts: return "N-RTS";
    case FrameKind::NCts: return "N-CTS";
  }
  return "?";
}

inline bool is_notification(FrameKind k) {
  return k == FrameKind::NRts || k == FrameKind::NCts;
}

struct FrameSizes {
  int rts_bytes = 20;
  int cts_bytes = 14;
  int ack_bytes = 14;
  int data_bytes = 1500;
  // Notifications default to the size of the frame they stand in for.
  int size_of(FrameKind k) const {
    switch (k) {
      case FrameKind::Rts:
      case FrameKind::NRts: return rts_bytes;
      case FrameKind::Cts:
      case FrameKind::NCts: return cts_bytes;
      case FrameKind::Ack: return ack_bytes;
      case FrameKind::Data: return data_bytes;
    }
    return 0;
  }
};

struct Frame {
  FrameKind kind = FrameKind::Rts;
  int src = -1;
  int dst = -1;
  SimTime nav_duration = 0;  // remaining handshake airtime after this frame
  int size_bytes = 0;
  int flow_id = -1;
  std::int64_t seq = -1;     // per-flow sequence number
  SimTime gen_time = 0;      // entry into the source MAC queue
  int final_dst = -1;        // end-to-end destination (DATA only)
  int route_id = -1;         // route the packet is traveling on (DATA only)
};

// Remaining handshake duration advertised after a frame of the given kind,
// in the standard 4-way-handshake style extended with propagation and
// window-period allowances so notified neighbors defer for exactly the
// ongoing exchange.
inline SimTime handshake_nav_duration(FrameKind kind, const FrameSizes& sizes,
                                      const ChannelModel& chan,
                                      const MacTiming& timing,
                                      SimTime window_allowance) {
  const SimTime t_cts = chan.transmission_delay(sizes.cts_bytes);
  const SimTime t_data = chan.transmission_delay(sizes.data_bytes);
  const SimTime t_ack = chan.transmission_delay(sizes.ack_bytes);
  const SimTime max_prop = chan.max_propagation_delay();
  switch (kind) {
    case FrameKind::Rts:
    case FrameKind::NRts:
      return 3 * timing.sifs + t_cts + t_data + t_ack + 2 * max_prop + window_allowance;
    case FrameKind::Cts:
    case FrameKind::NCts:
      return 2 * timing.sifs + t_data + t_ack + 2 * max_prop + window_allowance;
    case FrameKind::Data:
      return timing.sifs + t_ack + max_prop;
    case FrameKind::Ack:
      return 0;
  }
  return 0;
}

}  // namespace mbmac

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "mbmac/frame.hpp"
#include "mbmac/time.hpp"

namespace mbmac {

struct NavEntry {
  int neighbor = -1;
  SimTime nav_expiry = 0;
  bool potential_tx = false;
};

// Per-beam NAV table with potential-transmitter flags.
class NavTable {
 public:
  // Extends (never shortens) the NAV held for a neighbor.
  void update(int neighbor, SimTime until) {
    auto& e = entry(neighbor);
    e.nav_expiry = std::max(e.nav_expiry, until);
  }

  void mark_potential_tx(int neighbor) { entry(neighbor).potential_tx = true; }

  void clear_potential_tx(int neighbor) {
    auto it = entries_.find(neighbor);
    if (it != entries_.end()) it->second.potential_tx = false;
  }

  bool has_potential_tx(int neighbor) const {
    auto it = entries_.find(neighbor);
    return it != entries_.end() && it->second.potential_tx;
  }

  std::vector<int> potential_transmitters() const {
    std::vector<int> out;
    for (const auto& [id, e] : entries_) {
      if (e.potential_tx) out.push_back(id);
    }
    return out;
  }

  // Latest NAV expiry across all neighbors on this beam.
  SimTime expiry(SimTime now) const {
    SimTime latest = 0;
    for (const auto& [id, e] : entries_) latest = std::max(latest, e.nav_expiry);
    (void)now;
    return latest;
  }

  bool clear_at(SimTime now) const { return expiry(now) <= now; }

 private:
  NavEntry& entry(int neighbor) {
    auto [it, inserted] = entries_.try_emplace(neighbor);
    if (inserted) it->second.neighbor = neighbor;
    return it->second;
  }

  std::map<int, NavEntry> entries_;  // ordered for deterministic iteration
};

// A payload waiting in a beam queue, with its per-packet retry counters.
struct QueuedPacket {
  int flow_id = -1;
  std::int64_t seq = -1;
  int final_dst = -1;
  int next_hop = -1;
  int route_id = -1;
  int size_bytes = 1500;
  SimTime gen_time = 0;
  int srl_count = 0;  // control (RTS) retries
  int lrl_count = 0;  // data retries
};

struct BeamState {
  NavTable nav;
  std::deque<QueuedPacket> queue;
  SimTime busy_until = 0;  // reception or transmission in progress
};

// Node-based backoff: one contention window shared by all beams.
struct BackoffState {
  int cw = 16;
  int cw_min = 16;
  int cw_max = 1024;

  void reset() { cw = cw_min; }
  void double_cw() { cw = std::min(cw * 2, cw_max); }

  // A transmission cycle concluded: reset to minimum if at least one beam
  // succeeded, otherwise double.
  void on_cycle_result(bool any_beam_succeeded) {
    if (any_beam_succeeded) {
      reset();
    } else {
      double_cw();
    }
  }
};

enum class Classification { Desired, Undesired };

enum class AwaitKind { None, Cts, Ack, Data, Rts };

// A decoded frame is undesired when it is not addressed to this node, or when
// the node is waiting for a specific response kind and this is some other
// kind. Everything else is desired.
inline Classification classify(int self, AwaitKind awaiting, const Frame& f) {
  if (f.dst != self) return Classification::Undesired;
  if (is_notification(f.kind)) return Classification::Undesired;  // NAV update only
  if (awaiting == AwaitKind::Cts && f.kind != FrameKind::Cts) return Classification::Undesired;
  if (awaiting == AwaitKind::Ack && f.kind != FrameKind::Ack) return Classification::Undesired;
  return Classification::Desired;
}

}  // namespace mbmac

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "mbmac/time.hpp"

namespace mbmac {

enum class EventKind : int {
  FrameArrivalStart = 0,
  FrameArrivalEnd,
  TimerExpiry,
  TrafficArrival,
  MobilityUpdate,
  NeighborDiscovery,
  MetricsSample,
  kCount
};

inline const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::FrameArrivalStart: return "frame-arrival-start";
    case EventKind::FrameArrivalEnd: return "frame-arrival-end";
    case EventKind::TimerExpiry: return "timer-expiry";
    case EventKind::TrafficArrival: return "traffic-arrival";
    case EventKind::MobilityUpdate: return "mobility-update";
    case EventKind::NeighborDiscovery: return "neighbor-discovery";
    case EventKind::MetricsSample: return "metrics-sample";
    default: return "unknown";
  }
}

struct EventHandle {
  std::uint64_t seq = 0;
  bool valid() const { return seq != 0; }
};

struct RunStats {
  std::array<std::uint64_t, static_cast<std::size_t>(EventKind::kCount)> processed{};
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : processed) s += c;
    return s;
  }
  std::uint64_t count(EventKind k) const {
    return processed[static_cast<std::size_t>(k)];
  }
};

// Deterministic single-threaded discrete-event scheduler. Events fire in
// nondecreasing time order; ties break by insertion sequence (FIFO), which
// makes "simultaneous" transmissions well-defined.
class EventQueue {
 public:
  EventHandle schedule(SimTime fire_at, EventKind kind, int target,
                       std::function<void()> action) {
    if (fire_at < now_) {
      throw std::logic_error("event scheduled in the past at t=" + format_us(now_) +
                             " for t=" + format_us(fire_at) +
                             " (protocol logic bug)");
    }
    Entry e;
    e.fire_at = fire_at;
    e.seq = ++next_seq_;
    e.kind = kind;
    e.target = target;
    e.action = std::move(action);
    pending_.insert(e.seq);
    heap_.push(std::move(e));
    return EventHandle{next_seq_};
  }

  // Returns true when the event was still pending and is now removed.
  // Cancelling an already-fired or already-cancelled event returns false.
  bool cancel(EventHandle h) {
    if (!h.valid() || !pending_.erase(h.seq)) return false;
    cancelled_.insert(h.seq);
    return true;
  }

  SimTime now() const { return now_; }
  bool empty() const { return pending_.empty(); }

  RunStats run_until(SimTime t_end) {
    RunStats stats;
    while (!heap_.empty()) {
      const Entry& top = heap_.top();
      if (top.fire_at > t_end) break;
      Entry e = std::move(const_cast<Entry&>(top));
      heap_.pop();
      if (cancelled_.erase(e.seq)) continue;
      pending_.erase(e.seq);
      now_ = e.fire_at;
      ++stats.processed[static_cast<std::size_t>(e.kind)];
      e.action();
    }
    if (now_ < t_end) now_ = t_end;
    return stats;
  }

 private:
  struct Entry {
    SimTime fire_at = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::TimerExpiry;
    int target = -1;
    std::function<void()> action;

    bool operator>(const Entry& o) const {
      if (fire_at != o.fire_at) return fire_at > o.fire_at;
      return seq > o.seq;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
  std::unordered_set<std::uint64_t> pending_;
  std::unordered_set<std::uint64_t> cancelled_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
};

}  // namespace mbmac

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mbmac/event_queue.hpp"
#include "mbmac/frame.hpp"
#include "mbmac/mac_common.hpp"
#include "mbmac/medium.hpp"
#include "mbmac/time.hpp"

namespace mbmac {

enum class MacVariant { Basic, Proposed };

inline const char* mac_variant_name(MacVariant v) {
  return v == MacVariant::Basic ? "basic" : "proposed";
}

// What a node is doing right now. A node plays exactly one role at a time:
// it either drives a transmission cycle on one or more beams or serves a
// reception cycle, never both.
enum class NodeMode {
  Idle,         // nothing in progress (may still be deferring initiation)
  Contend,      // DIFS + backoff countdown armed
  TxAwaitResp,  // sent RTS (awaiting CTS) or DATA (awaiting ACK)
  RxCollect,    // collecting the RTS batch of a reception cycle
  RxAwaitData,  // sent CTS, awaiting DATA
};

inline const char* node_mode_name(NodeMode m) {
  switch (m) {
    case NodeMode::Idle: return "idle";
    case NodeMode::Contend: return "contend";
    case NodeMode::TxAwaitResp: return "tx-await";
    case NodeMode::RxCollect: return "rx-collect";
    case NodeMode::RxAwaitData: return "rx-await-data";
  }
  return "?";
}

struct NodeConfig {
  MacVariant variant = MacVariant::Proposed;
  AntennaConfig antenna;
  MacTiming timing;
  FrameSizes sizes;
  int queue_capacity = 50;
  int srl_limit = 7;   // RTS attempts per packet before drop
  int lrl_limit = 4;   // DATA attempts per packet before drop
  int cw_min = 16;
  int cw_max = 1024;

  // Windowed-synchrony parameters (proposed variant).
  SimTime window_period = 9 * kMicrosecond;
  double data_window_multiplier = 1.0;  // scales the window for DATA/ACK phases
  int role_switch_slots = 3;            // post-ACK initiation defer

  // Baseline parameters (basic variant).
  SimTime basic_rx_window = 1000 * kMicrosecond;  // listen-only pause after a tx cycle
  bool basic_rx_window_after_fail = true;
  bool basic_flag_during_rx = true;      // remember late callers seen while receiving
  bool basic_flag_in_collection = true;  // remember late callers during RTS collection

  // Response timeouts measured from our own air end; 0 selects the default
  // SIFS + response airtime + 2*max propagation + 2 slots.
  SimTime cts_timeout = 0;
  SimTime data_timeout = 0;
  SimTime ack_timeout = 0;

  SimTime resolved_timeout(FrameKind response, const ChannelModel& chan) const {
    SimTime configured = 0;
    switch (response) {
      case FrameKind::Cts: configured = cts_timeout; break;
      case FrameKind::Data: configured = data_timeout; break;
      case FrameKind::Ack: configured = ack_timeout; break;
      default: break;
    }
    if (configured > 0) return configured;
    return timing.sifs + chan.transmission_delay(sizes.size_of(response)) +
           2 * chan.max_propagation_delay() + 2 * timing.slot;
  }
};

// Callbacks out of the MAC into the surrounding simulation.
struct NodeHooks {
  // DATA decoded at its final destination.
  std::function<void(int node, const QueuedPacket&)> on_delivered;
  // DATA decoded at an intermediate hop; the owner re-enqueues it.
  std::function<void(int node, QueuedPacket)> on_forward;
  // reason: "overflow" | "retry" | "noroute"
  std::function<void(int node, const QueuedPacket&, const std::string& reason)> on_drop;
  // A packet's RTS-level attempt on a route failed (drives route demotion).
  std::function<void(int node, const QueuedPacket&)> on_route_failure;
  std::function<void(SimTime t, int node, int beam, const std::string& event,
                     const Frame* f)> trace;
  // Direction (azimuth) from this node toward a peer; required for beam
  // selection. Provided by the simulation from current positions.
  std::function<std::optional<double>(int node, int peer)> azimuth_to;
};

// One wireless node running either MAC variant. Both variants share the
// contention machinery, the RTS/CTS/DATA/ACK cycle skeleton, per-beam NAV
// tables and the node-wide contention window; they differ in how incoming
// frames are admitted into a cycle (arrival window vs strict simultaneity)
// and in how unserviceable callers are treated (remember-and-notify vs
// discard).
class Node {
 public:
  Node(int id, NodeConfig cfg, EventQueue& queue, Medium& medium, NodeHooks hooks)
      : id_(id),
        cfg_(cfg),
        queue_(queue),
        medium_(medium),
        hooks_(std::move(hooks)),
        beams_(static_cast<std::size_t>(cfg.antenna.num_beams)) {
    backoff_.cw = cfg.cw_min;
    backoff_.cw_min = cfg.cw_min;
    backoff_.cw_max = cfg.cw_max;
  }

  int id() const { return id_; }
  NodeMode mode() const { return mode_; }
  const NodeConfig& config() const { return cfg_; }
  const BeamState& beam(int b) const { return beams_[static_cast<std::size_t>(b)]; }
  BackoffState& backoff() { return backoff_; }
  SimTime defer_until() const { return defer_until_; }

  // Orientation used by a steerable antenna when it has nothing to do;
  // typically toward the upstream hop so it can hear forwarded traffic.
  void set_idle_steering(double az) {
    idle_steer_az_ = az;
    if (cfg_.antenna.steerable && mode_ == NodeMode::Idle) {
      medium_.set_steering(id_, az);
    }
  }

  int beam_toward(int peer) const {
    if (cfg_.antenna.steerable) return 0;
    auto az = hooks_.azimuth_to(id_, peer);
    if (!az) return -1;
    return beam_for_direction(cfg_.antenna, *az);
  }

  // Accepts a packet into the queue of the beam facing its next hop.
  // Returns false (and counts an overflow drop) when that queue is full.
  bool enqueue(QueuedPacket p) {
    const int b = beam_toward(p.next_hop);
    if (b < 0) {
      if (hooks_.on_drop) hooks_.on_drop(id_, p, "noroute");
      return false;
    }
    auto& q = beams_[b].queue;
    if (static_cast<int>(q.size()) >= cfg_.queue_capacity) {
      if (hooks_.on_drop) hooks_.on_drop(id_, p, "overflow");
      return false;
    }
    q.push_back(std::move(p));
    try_start_contention();
    return true;
  }

  std::size_t queued_packets() const {
    std::size_t n = 0;
    for (const auto& b : beams_) n += b.queue.size();
    return n;
  }

  // Entry point for everything decoded (or sensed to completion) on a beam.
  void on_reception(const Reception& rx) {
    if (!rx.decodable) {
      trace(rx.beam, "rx-err", &rx.frame);
      return;
    }
    trace(rx.beam, "rx", &rx.frame);
    const Frame& f = rx.frame;

    if (f.dst != id_) {
      // Overheard: defer for the advertised remainder of that exchange.
      nav_update(rx.beam, f.src, rx.arr_end + f.nav_duration);
      return;
    }
    if (is_notification(f.kind)) {
      on_notification(rx);
      return;
    }
    if (f.kind == FrameKind::Rts && f.final_dst >= 0 && f.final_dst != id_ &&
        queued_packets() >=
            static_cast<std::size_t>(cfg_.queue_capacity) * num_beams()) {
      // No buffer space for the data this handshake would hand us. Staying
      // silent is cheaper for everyone than receiving a frame just to drop
      // it: the caller backs off while we drain the queue.
      remember_late_caller(rx, cfg_.variant == MacVariant::Proposed);
      return;
    }

    switch (mode_) {
      case NodeMode::Idle:
      case NodeMode::Contend:
        if (f.kind == FrameKind::Rts) {
          begin_rx_cycle(rx);
        } else {
          // A stale response to a cycle we already concluded.
          nav_update(rx.beam, f.src, rx.arr_end + f.nav_duration);
        }
        break;
      case NodeMode::TxAwaitResp:
        on_frame_while_tx_waiting(rx);
        break;
      case NodeMode::RxCollect:
        on_frame_while_collecting(rx);
        break;
      case NodeMode::RxAwaitData:
        on_frame_while_awaiting_data(rx);
        break;
    }
  }

  // Kicks the contention machinery; no-op unless idle with pending traffic.
  void try_start_contention() {
    if (mode_ != NodeMode::Idle) return;
    const SimTime now = queue_.now();
    if (now < defer_until_) {
      arm_kick(defer_until_);
      return;
    }
    remap_queue_heads();
    std::vector<int> candidates;
    for (int b = 0; b < num_beams(); ++b) {
      if (!beams_[b].queue.empty()) candidates.push_back(b);
    }
    if (candidates.empty()) {
      maybe_send_standalone_notification();
      return;
    }
    bool any_clear = false;
    SimTime wake = 0;
    for (int b : candidates) {
      const SimTime blocked = beam_blocked_until(b);
      if (blocked <= now) {
        any_clear = true;
      } else {
        wake = (wake == 0) ? blocked : std::min(wake, blocked);
      }
    }
    if (!any_clear) {
      arm_kick(wake);
      return;
    }
    mode_ = NodeMode::Contend;
    const SimTime fire = now + cfg_.timing.difs +
                         static_cast<SimTime>(backoff_.cw) * cfg_.timing.slot;
    contend_h_ = queue_.schedule(fire, EventKind::TimerExpiry, id_,
                                 [this] { on_contention_fire(); });
  }

 private:
  int num_beams() const { return cfg_.antenna.num_beams; }

  void trace(int beam, const std::string& event, const Frame* f) {
    if (hooks_.trace) hooks_.trace(queue_.now(), id_, beam, event, f);
  }

  void nav_update(int beam, int neighbor, SimTime until) {
    if (until > queue_.now()) beams_[beam].nav.update(neighbor, until);
  }

  SimTime beam_blocked_until(int b) const {
    return std::max(beams_[b].nav.expiry(queue_.now()), medium_.busy_until(id_, b));
  }

  void arm_kick(SimTime at) {
    const SimTime t = std::max(at, queue_.now()) + 1;  // strictly after the blocker
    if (kick_h_.valid() && kick_at_ <= t && kick_at_ > queue_.now()) return;
    queue_.cancel(kick_h_);
    kick_at_ = t;
    kick_h_ = queue_.schedule(t, EventKind::TimerExpiry, id_, [this] {
      kick_h_ = EventHandle{};
      try_start_contention();
    });
  }

  void cancel_contention() {
    queue_.cancel(contend_h_);
    contend_h_ = EventHandle{};
  }

  // Heads of beam queues follow their next hop's current direction; a packet
  // whose next hop drifted into another sector migrates at dequeue time.
  void remap_queue_heads() {
    if (cfg_.antenna.steerable) return;
    for (int b = 0; b < num_beams(); ++b) {
      int guard = static_cast<int>(beams_[b].queue.size());
      while (guard-- > 0 && !beams_[b].queue.empty()) {
        const int want = beam_toward(beams_[b].queue.front().next_hop);
        if (want == b) break;
        QueuedPacket p = std::move(beams_[b].queue.front());
        beams_[b].queue.pop_front();
        if (want < 0) {
          if (hooks_.on_drop) hooks_.on_drop(id_, p, "noroute");
          continue;
        }
        auto& q = beams_[want].queue;
        if (static_cast<int>(q.size()) >= cfg_.queue_capacity) {
          if (hooks_.on_drop) hooks_.on_drop(id_, p, "overflow");
        } else {
          q.push_back(std::move(p));
        }
      }
    }
  }

  // ---- transmission cycle ----------------------------------------------

  void on_contention_fire() {
    contend_h_ = EventHandle{};
    if (mode_ != NodeMode::Contend) return;
    mode_ = NodeMode::Idle;
    remap_queue_heads();
    const SimTime now = queue_.now();
    std::vector<int> tx_beams;
    for (int b = 0; b < num_beams(); ++b) {
      if (beams_[b].queue.empty()) continue;
      if (beam_blocked_until(b) > now) continue;
      if (medium_.carrier_busy(id_, b)) continue;
      tx_beams.push_back(b);
    }
    if (tx_beams.empty()) {
      try_start_contention();
      return;
    }
    start_tx_cycle(tx_beams);
  }

  void start_tx_cycle(const std::vector<int>& tx_beams) {
    reset_cycle_state();
    mode_ = NodeMode::TxAwaitResp;
    awaiting_ = AwaitKind::Cts;
    SimTime air_end = 0;
    for (int b : tx_beams) {
      const QueuedPacket& p = beams_[b].queue.front();
      Frame f;
      f.kind = FrameKind::Rts;
      f.src = id_;
      f.dst = p.next_hop;
      f.size_bytes = cfg_.sizes.rts_bytes;
      f.nav_duration = nav_for(FrameKind::Rts);
      f.flow_id = p.flow_id;
      f.seq = p.seq;
      f.gen_time = p.gen_time;
      f.final_dst = p.final_dst;
      f.route_id = p.route_id;
      steer_toward(f.dst);
      air_end = std::max(air_end, medium_.transmit(id_, b, f));
      note_own_tx(air_end);
      trace(b, "tx", &f);
      pending_[b] = p.next_hop;
    }
    send_notifications(FrameKind::NRts, nav_for(FrameKind::Rts), tx_beams);
    window_total_ = static_cast<int>(pending_.size());
    arm_response_timeout(FrameKind::Cts, air_end);
  }

  void arm_response_timeout(FrameKind response, SimTime air_end) {
    queue_.cancel(timeout_h_);
    const SimTime at = air_end + cfg_.resolved_timeout(response, medium_.channel());
    timeout_h_ = queue_.schedule(at, EventKind::TimerExpiry, id_,
                                 [this] { on_response_timeout(); });
  }

  void on_frame_while_tx_waiting(const Reception& rx) {
    const Frame& f = rx.frame;
    const FrameKind want = awaiting_ == AwaitKind::Cts ? FrameKind::Cts : FrameKind::Ack;
    auto it = pending_.find(rx.beam);
    const bool from_awaited_beam = it != pending_.end() && it->second == f.src;

    if (f.kind == want && from_awaited_beam && accepted_.count(rx.beam) == 0) {
      admit_or_reject(rx, /*total=*/window_total_);
      return;
    }
    // Not the awaited response. A fresh RTS aimed at us is the interesting
    // case; the two variants diverge here.
    if (f.kind == FrameKind::Rts) {
      if (cfg_.variant == MacVariant::Proposed) {
        // Awaited beams keep their timers; the caller is remembered and
        // notified with the node's next transmission.
        beams_[rx.beam].nav.mark_potential_tx(f.src);
        trace(rx.beam, "flag", &f);
      } else if (accepted_.empty() && awaiting_ == AwaitKind::Cts) {
        // The whole cycle is still unanswered: abandon it and serve the
        // caller, treating the abandoned attempts as failures.
        abort_tx_cycle_as_failure();
        begin_rx_cycle(rx);
      }
      // else: discarded without a trace of it anywhere (baseline behavior).
      return;
    }
    // Late or mismatched response (e.g. CTS after the window closed).
    if (f.kind == want && from_awaited_beam) return;  // duplicate, ignore
    nav_update(rx.beam, f.src, rx.arr_end + f.nav_duration);
  }

  // A notification addressed to us: the peer heard our RTS but cannot serve
  // it now. The attempt is parked without penalty; its NAV tells us when to
  // come back. (Proposed variant only; the baseline never addresses one.)
  void on_notification(const Reception& rx) {
    const Frame& f = rx.frame;
    nav_update(rx.beam, f.src, rx.arr_end + f.nav_duration);
    if (cfg_.variant != MacVariant::Proposed) return;
    if (mode_ != NodeMode::TxAwaitResp || awaiting_ != AwaitKind::Cts) return;
    auto it = pending_.find(rx.beam);
    if (it == pending_.end() || it->second != f.src) return;
    pending_.erase(it);
    window_total_ = static_cast<int>(pending_.size());
    trace(rx.beam, "deferred", &f);
    if (pending_.empty() && accepted_.empty()) {
      // Every attempt was parked: wind the cycle down with no penalty.
      queue_.cancel(timeout_h_);
      queue_.cancel(sifs_h_);
      queue_.cancel(wp_h_);
      reset_cycle_state();
      mode_ = NodeMode::Idle;
      try_start_contention();
    } else if (window_open_ && static_cast<int>(accepted_.size()) >= window_total_) {
      close_window();
    }
  }

  // ---- reception cycle ---------------------------------------------------

  void begin_rx_cycle(const Reception& rx) {
    cancel_contention();
    queue_.cancel(kick_h_);
    kick_h_ = EventHandle{};
    reset_cycle_state();
    mode_ = NodeMode::RxCollect;
    awaiting_ = AwaitKind::Rts;
    int capacity = 0;
    for (int b = 0; b < num_beams(); ++b) {
      if (beams_[b].nav.clear_at(queue_.now())) ++capacity;
    }
    admit_or_reject(rx, std::max(capacity, 1));
  }

  void on_frame_while_collecting(const Reception& rx) {
    const Frame& f = rx.frame;
    if (f.kind != FrameKind::Rts) {
      nav_update(rx.beam, f.src, rx.arr_end + f.nav_duration);
      return;
    }
    if (accepted_.count(rx.beam)) return;  // duplicate on an admitted beam
    admit_or_reject(rx, window_total_);
  }

  void on_frame_while_awaiting_data(const Reception& rx) {
    const Frame& f = rx.frame;
    auto it = pending_.find(rx.beam);
    const bool awaited = it != pending_.end() && it->second == f.src;
    if (f.kind == FrameKind::Data && awaited && accepted_.count(rx.beam) == 0) {
      admit_or_reject(rx, window_total_);
      return;
    }
    if (f.kind == FrameKind::Rts) {
      remember_late_caller(rx, cfg_.variant == MacVariant::Proposed
                                   ? true
                                   : cfg_.basic_flag_during_rx);
      return;
    }
    nav_update(rx.beam, f.src, rx.arr_end + f.nav_duration);
  }

  void remember_late_caller(const Reception& rx, bool flag) {
    if (flag) {
      beams_[rx.beam].nav.mark_potential_tx(rx.frame.src);
      trace(rx.beam, "flag", &rx.frame);
    } else {
      trace(rx.beam, "discard", &rx.frame);
    }
  }

  // ---- windowed / strict admission ---------------------------------------

  // Admits a desired frame into the current phase batch. The proposed
  // variant accepts everything landing inside the arrival window opened by
  // the first frame; the baseline accepts only frames whose arrival started
  // at the exact same instant as the first one.
  void admit_or_reject(const Reception& rx, int total) {
    const SimTime now = queue_.now();
    if (accepted_.empty()) {
      window_total_ = total;
      commit_start_ = rx.arr_start;
      accepted_[rx.beam] = rx;
      trace(rx.beam, "admit", &rx.frame);
      const SimTime anchor = rx.arr_end;
      sifs_h_ = queue_.schedule(anchor + cfg_.timing.sifs, EventKind::TimerExpiry,
                                id_, [this] { on_sifs_expiry(); });
      queue_.cancel(timeout_h_);
      if (cfg_.variant == MacVariant::Proposed) {
        window_open_ = true;
        SimTime wp = cfg_.window_period;
        if (awaiting_ == AwaitKind::Data || awaiting_ == AwaitKind::Ack) {
          wp = static_cast<SimTime>(
              static_cast<double>(wp) * cfg_.data_window_multiplier);
        }
        wp_h_ = queue_.schedule(anchor + wp, EventKind::TimerExpiry, id_,
                                [this] { close_window(); });
      } else {
        window_open_ = true;  // closes with the same-instant batch below
      }
      if (static_cast<int>(accepted_.size()) >= window_total_) close_window();
      return;
    }
    const bool admit = cfg_.variant == MacVariant::Proposed
                           ? window_open_
                           : (window_open_ && rx.arr_start == commit_start_);
    if (admit) {
      accepted_[rx.beam] = rx;
      trace(rx.beam, "admit", &rx.frame);
      if (static_cast<int>(accepted_.size()) >= window_total_) close_window();
      return;
    }
    // Landed after the batch closed (or, for the baseline, not perfectly
    // simultaneous with it): this frame cannot join the ongoing phase.
    if (rx.frame.kind == FrameKind::Rts && mode_ == NodeMode::RxCollect) {
      remember_late_caller(rx, cfg_.variant == MacVariant::Proposed
                                   ? true
                                   : cfg_.basic_flag_in_collection);
    } else {
      trace(rx.beam, "discard", &rx.frame);
    }
    (void)now;
  }

  void close_window() {
    if (!window_open_) return;
    window_open_ = false;
    queue_.cancel(wp_h_);
    wp_h_ = EventHandle{};
  }

  // ---- phase advance -------------------------------------------------------

  void on_sifs_expiry() {
    sifs_h_ = EventHandle{};
    close_window();
    queue_.cancel(timeout_h_);
    timeout_h_ = EventHandle{};
    switch (awaiting_) {
      case AwaitKind::Rts: send_cts_batch(); break;
      case AwaitKind::Cts: send_data_batch(); break;
      case AwaitKind::Data: send_ack_batch(); break;
      case AwaitKind::Ack: conclude_tx_cycle(); break;
      case AwaitKind::None: break;
    }
  }

  void send_cts_batch() {
    std::vector<int> batch;
    std::map<int, int> next_pending;
    for (auto& [b, rx] : accepted_) {
      Frame f;
      f.kind = FrameKind::Cts;
      f.src = id_;
      f.dst = rx.frame.src;
      f.size_bytes = cfg_.sizes.cts_bytes;
      f.nav_duration = nav_for(FrameKind::Cts);
      f.flow_id = rx.frame.flow_id;
      f.seq = rx.frame.seq;
      steer_toward(f.dst);
      note_own_tx(medium_.transmit(id_, b, f));
      trace(b, "tx", &f);
      next_pending[b] = rx.frame.src;
      batch.push_back(b);
    }
    send_notifications(FrameKind::NCts, nav_for(FrameKind::Cts), batch);
    pending_ = std::move(next_pending);
    accepted_.clear();
    awaiting_ = AwaitKind::Data;
    mode_ = NodeMode::RxAwaitData;
    window_total_ = static_cast<int>(pending_.size());
    const SimTime air_end =
        queue_.now() + medium_.channel().transmission_delay(cfg_.sizes.cts_bytes);
    arm_response_timeout(FrameKind::Data, air_end);
  }

  void send_data_batch() {
    // Beams whose RTS drew no CTS are failures of this cycle.
    for (auto it = pending_.begin(); it != pending_.end();) {
      if (accepted_.count(it->first) == 0) {
        fail_head(it->first, /*data_phase=*/false);
        it = pending_.erase(it);
      } else {
        ++it;
      }
    }
    if (pending_.empty()) {
      conclude_tx_cycle();
      return;
    }
    SimTime air_end = 0;
    std::vector<int> batch;
    for (auto& [b, peer] : pending_) {
      const QueuedPacket& p = beams_[b].queue.front();
      Frame f;
      f.kind = FrameKind::Data;
      f.src = id_;
      f.dst = peer;
      f.size_bytes = p.size_bytes;
      f.nav_duration = nav_for(FrameKind::Data);
      f.flow_id = p.flow_id;
      f.seq = p.seq;
      f.gen_time = p.gen_time;
      f.final_dst = p.final_dst;
      f.route_id = p.route_id;
      steer_toward(peer);
      air_end = std::max(air_end, medium_.transmit(id_, b, f));
      note_own_tx(air_end);
      trace(b, "tx", &f);
      batch.push_back(b);
    }
    send_notifications(FrameKind::NRts, nav_for(FrameKind::Data), batch);
    accepted_.clear();
    awaiting_ = AwaitKind::Ack;
    window_total_ = static_cast<int>(pending_.size());
    arm_response_timeout(FrameKind::Ack, air_end);
  }

  void send_ack_batch() {
    std::vector<int> batch;
    for (auto& [b, rx] : accepted_) {
      Frame f;
      f.kind = FrameKind::Ack;
      f.src = id_;
      f.dst = rx.frame.src;
      f.size_bytes = cfg_.sizes.ack_bytes;
      f.nav_duration = 0;
      f.flow_id = rx.frame.flow_id;
      f.seq = rx.frame.seq;
      steer_toward(f.dst);
      note_own_tx(medium_.transmit(id_, b, f));
      trace(b, "tx", &f);
      batch.push_back(b);
    }
    send_notifications(FrameKind::NCts, 0, batch);
    // Hand the payloads up once the ACKs are on the air.
    for (auto& [b, rx] : accepted_) {
      QueuedPacket p;
      p.flow_id = rx.frame.flow_id;
      p.seq = rx.frame.seq;
      p.final_dst = rx.frame.final_dst;
      p.route_id = rx.frame.route_id;
      p.next_hop = -1;  // owner resolves the next hop when forwarding
      p.size_bytes = rx.frame.size_bytes;
      p.gen_time = rx.frame.gen_time;
      if (p.final_dst == id_) {
        if (hooks_.on_delivered) hooks_.on_delivered(id_, p);
      } else if (hooks_.on_forward) {
        hooks_.on_forward(id_, std::move(p));
      }
    }
    conclude_rx_cycle();
  }

  // ---- cycle conclusion ---------------------------------------------------

  void conclude_tx_cycle() {
    bool any_success = false;
    for (auto& [b, peer] : pending_) {
      if (awaiting_ == AwaitKind::Ack && accepted_.count(b)) {
        any_success = true;
        if (!beams_[b].queue.empty()) {
          trace(b, "delivered-hop", nullptr);
          beams_[b].queue.pop_front();
        }
      } else {
        fail_head(b, /*data_phase=*/awaiting_ == AwaitKind::Ack);
      }
    }
    backoff_.on_cycle_result(any_success);
    const bool went_through = any_success;
    reset_cycle_state();
    mode_ = NodeMode::Idle;
    if (cfg_.variant == MacVariant::Proposed) {
      if (went_through) {
        defer_until_ = queue_.now() +
                       static_cast<SimTime>(cfg_.role_switch_slots) * cfg_.timing.slot;
      }
    } else if (went_through || cfg_.basic_rx_window_after_fail) {
      defer_until_ = queue_.now() + cfg_.basic_rx_window;
    }
    restore_idle_steering();
    try_start_contention();
  }

  void abort_tx_cycle_as_failure() {
    queue_.cancel(timeout_h_);
    queue_.cancel(sifs_h_);
    queue_.cancel(wp_h_);
    for (auto& [b, peer] : pending_) fail_head(b, false);
    backoff_.on_cycle_result(false);
    reset_cycle_state();
    mode_ = NodeMode::Idle;
  }

  void conclude_rx_cycle() {
    if (cfg_.variant == MacVariant::Basic) {
      // The baseline only notifies while the cycle runs; stale flags must
      // not leak into later cycles.
      for (auto& b : beams_) {
        for (int n : b.nav.potential_transmitters()) b.nav.clear_potential_tx(n);
      }
    }
    reset_cycle_state();
    mode_ = NodeMode::Idle;
    restore_idle_steering();
    try_start_contention();
  }

  void on_response_timeout() {
    timeout_h_ = EventHandle{};
    if (mode_ == NodeMode::TxAwaitResp) {
      // Nothing answered at all.
      for (auto& [b, peer] : pending_) {
        fail_head(b, /*data_phase=*/awaiting_ == AwaitKind::Ack);
      }
      backoff_.on_cycle_result(false);
      reset_cycle_state();
      mode_ = NodeMode::Idle;
      if (cfg_.variant == MacVariant::Basic && cfg_.basic_rx_window_after_fail) {
        defer_until_ = queue_.now() + cfg_.basic_rx_window;
      }
      restore_idle_steering();
      try_start_contention();
    } else if (mode_ == NodeMode::RxAwaitData) {
      // Our CTS drew no DATA; give the channel back.
      conclude_rx_cycle();
    }
  }

  void fail_head(int b, bool data_phase) {
    auto& q = beams_[b].queue;
    if (q.empty()) return;
    QueuedPacket& p = q.front();
    const int count = data_phase ? ++p.lrl_count : ++p.srl_count;
    const int limit = data_phase ? cfg_.lrl_limit : cfg_.srl_limit;
    trace(b, data_phase ? "fail-data" : "fail-rts", nullptr);
    if (count >= limit) {
      QueuedPacket dropped = std::move(p);
      q.pop_front();
      if (hooks_.on_route_failure) hooks_.on_route_failure(id_, dropped);
      if (hooks_.on_drop) hooks_.on_drop(id_, dropped, "retry");
    }
  }

  void reset_cycle_state() {
    pending_.clear();
    accepted_.clear();
    window_total_ = 0;
    window_open_ = false;
    commit_start_ = -1;
    awaiting_ = AwaitKind::None;
    queue_.cancel(sifs_h_);
    queue_.cancel(wp_h_);
    queue_.cancel(timeout_h_);
    sifs_h_ = wp_h_ = timeout_h_ = EventHandle{};
  }

  // ---- notifications -------------------------------------------------------

  // Tells remembered callers (potential transmitters) that we are busy, on
  // every flagged beam not already carrying a frame of this batch. Sent at
  // our own transmission instants so they ride along with the cycle. Both
  // variants emit these; they differ in how the recipient reacts (see
  // on_notification) and in when callers get remembered at all.
  void send_notifications(FrameKind kind, SimTime nav, const std::vector<int>& busy) {
    for (int b = 0; b < num_beams(); ++b) {
      if (std::find(busy.begin(), busy.end(), b) != busy.end()) continue;
      auto flagged = beams_[b].nav.potential_transmitters();
      if (flagged.empty()) continue;
      // Own concurrent frames do not block the beam, incoming energy or a
      // third party's reservation does; the flag then keeps until later.
      if (medium_.incoming_busy(id_, b)) continue;
      if (!beams_[b].nav.clear_at(queue_.now())) continue;
      Frame f;
      f.kind = kind;
      f.src = id_;
      f.dst = flagged.front();
      f.size_bytes = cfg_.sizes.size_of(kind);
      f.nav_duration = nav;
      note_own_tx(medium_.transmit(id_, b, f));
      trace(b, "tx", &f);
      for (int n : flagged) beams_[b].nav.clear_potential_tx(n);
    }
  }

  // Remembers when our latest frame leaves the air, so asynchronous sends
  // (the standalone notification below) never start a new frame while an
  // earlier one of ours is still airing.
  void note_own_tx(SimTime air_end) {
    own_tx_end_ = std::max(own_tx_end_, air_end);
  }

  // A node going idle with callers still remembered answers them with a
  // zero-length reservation so they stop deferring.
  void maybe_send_standalone_notification() {
    if (cfg_.variant != MacVariant::Proposed) return;
    bool any = false;
    for (int b = 0; b < num_beams(); ++b) {
      if (!beams_[b].nav.potential_transmitters().empty()) any = true;
    }
    if (!any) return;
    const SimTime at =
        std::max(queue_.now(), own_tx_end_) + cfg_.timing.sifs;
    queue_.schedule(at, EventKind::TimerExpiry, id_, [this] {
      if (mode_ != NodeMode::Idle) return;
      send_notifications(FrameKind::NCts, 0, {});
    });
  }

  // ---- misc ---------------------------------------------------------------

  SimTime nav_for(FrameKind k) const {
    return handshake_nav_duration(k, cfg_.sizes, medium_.channel(), cfg_.timing,
                                  cfg_.window_period);
  }

  void steer_toward(int peer) {
    if (!cfg_.antenna.steerable) return;
    auto az = hooks_.azimuth_to(id_, peer);
    if (az) medium_.set_steering(id_, *az);
  }

  void restore_idle_steering() {
    if (cfg_.antenna.steerable) medium_.set_steering(id_, idle_steer_az_);
  }

  const int id_;
  NodeConfig cfg_;
  EventQueue& queue_;
  Medium& medium_;
  NodeHooks hooks_;

  NodeMode mode_ = NodeMode::Idle;
  std::vector<BeamState> beams_;
  BackoffState backoff_;
  SimTime defer_until_ = 0;
  SimTime own_tx_end_ = 0;
  double idle_steer_az_ = 0.0;

  AwaitKind awaiting_ = AwaitKind::None;
  std::map<int, int> pending_;         // beam -> peer this phase still expects
  std::map<int, Reception> accepted_;  // beam -> admitted frame of this phase
  int window_total_ = 0;
  bool window_open_ = false;
  SimTime commit_start_ = -1;

  EventHandle contend_h_{};
  EventHandle sifs_h_{};
  EventHandle wp_h_{};
  EventHandle timeout_h_{};
  EventHandle kick_h_{};
  SimTime kick_at_ = 0;
};

}  // namespace mbmac

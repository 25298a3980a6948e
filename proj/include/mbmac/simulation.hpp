#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mbmac/event_queue.hpp"
#include "mbmac/medium.hpp"
#include "mbmac/metrics.hpp"
#include "mbmac/mobility.hpp"
#include "mbmac/node.hpp"
#include "mbmac/rng.hpp"
#include "mbmac/routing.hpp"
#include "mbmac/scenario.hpp"

namespace mbmac {

struct TraceRecord {
  SimTime t = 0;
  int node = -1;
  int beam = -1;
  std::string event;
  std::string frame_kind;  // empty when no frame is involved
  int src = -1;
  int dst = -1;
};

struct RunResult {
  std::string scenario;
  MacVariant variant = MacVariant::Proposed;
  std::uint64_t seed = 0;
  SimTime duration = 0;
  std::map<int, FlowStats> flows;
  std::map<int, double> extra_route_fraction;  // per flow
  std::map<int, int> flow_packet_bytes;
  std::map<int, double> flow_rate_bps;
  RunStats events;
};

// One end-to-end simulation run: nodes, medium, routing, traffic and
// metrics wired together, driven by a single event queue. Identical
// (scenario, seed) pairs produce identical results.
class Simulation {
 public:
  Simulation(Scenario scenario, std::uint64_t seed,
             std::optional<MacVariant> variant_override = std::nullopt)
      : scen_(std::move(scenario)), seed_(seed) {
    if (variant_override) scen_.mac.variant = *variant_override;
    scen_.mac.role_switch_slots = scen_.resolved_role_switch_slots();
    log_enabled_ = [] {
      const char* v = std::getenv("SIM_LOG");
      return v != nullptr && *v != '\0' && std::string(v) != "0";
    }();
  }

  void set_trace_sink(std::function<void(const TraceRecord&)> sink) {
    trace_sink_ = std::move(sink);
  }

  EventQueue& queue() { return queue_; }
  Medium& medium() { return *medium_; }
  Node& node(int id) { return *nodes_[static_cast<std::size_t>(id)]; }
  Router& router() { return router_; }
  MetricsCollector& metrics() { return metrics_; }
  const Scenario& scenario() const { return scen_; }

  RunResult run() {
    build();
    const RunStats stats = queue_.run_until(scen_.duration);
    RunResult out;
    out.scenario = scen_.name;
    out.variant = scen_.mac.variant;
    out.seed = seed_;
    out.duration = scen_.duration;
    out.events = stats;
    for (const auto& f : scen_.flows) {
      out.flows[f.id] = flow_stats(f.id);
      out.extra_route_fraction[f.id] = metrics_.extra_route_fraction(f.id);
      out.flow_packet_bytes[f.id] = f.packet_bytes;
      out.flow_rate_bps[f.id] = f.rate_bps;
    }
    return out;
  }

  // Builds the world without running; tests drive the queue manually.
  void build() {
    if (built_) return;
    built_ = true;
    RngStream placement_rng(seed_, "placement");
    positions_.resize(scen_.nodes.size());
    for (std::size_t i = 0; i < scen_.nodes.size(); ++i) {
      const auto& spec = scen_.nodes[i];
      positions_[i] = spec.placed
                          ? spec.pos
                          : Position{placement_rng.uniform(0.0, scen_.mobility.params.field_width_m),
                                     placement_rng.uniform(0.0, scen_.mobility.params.field_height_m)};
    }
    medium_ = std::make_unique<Medium>(queue_, scen_.channel);
    for (std::size_t i = 0; i < scen_.nodes.size(); ++i) {
      medium_->add_radio(positions_[i], scen_.nodes[i].antenna);
    }
    medium_->set_receiver([this](int node, const Reception& rx) {
      nodes_[static_cast<std::size_t>(node)]->on_reception(rx);
    });

    NodeHooks hooks;
    hooks.azimuth_to = [this](int node, int peer) -> std::optional<double> {
      if (peer < 0 || peer >= static_cast<int>(positions_.size())) return std::nullopt;
      const Position& a = medium_->radio(node).pos;
      const Position& b = medium_->radio(peer).pos;
      if (a.x == b.x && a.y == b.y) return std::nullopt;
      return azimuth_deg(a, b);
    };
    hooks.on_delivered = [this](int node, const QueuedPacket& p) {
      const Route* r = router_.route(p.route_id);
      metrics_.on_delivered(p.flow_id, p.seq, p.gen_time, queue_.now(), p.route_id,
                            r ? r->rank : 0);
      (void)node;
    };
    hooks.on_forward = [this](int node, QueuedPacket p) {
      p.next_hop = router_.next_hop(p.route_id, node);
      if (p.next_hop < 0) {
        metrics_.on_drop(p.flow_id, "noroute");
        return;
      }
      nodes_[static_cast<std::size_t>(node)]->enqueue(std::move(p));
    };
    hooks.on_drop = [this](int node, const QueuedPacket& p, const std::string& reason) {
      metrics_.on_drop(p.flow_id, reason);
      (void)node;
    };
    hooks.on_route_failure = [this](int node, const QueuedPacket& p) {
      router_.demote(p.route_id);
      (void)node;
    };
    hooks.trace = [this](SimTime t, int node, int beam, const std::string& event,
                         const Frame* f) {
      if (f && f->kind == FrameKind::Data && event == "tx") {
        auto it = flow_src_.find(f->flow_id);
        if (it != flow_src_.end() && it->second == node) {
          const Route* r = router_.route(f->route_id);
          metrics_.on_source_tx(f->flow_id, r ? r->rank : 0, t);
        }
      }
      if (!trace_sink_ && !log_enabled_) return;
      TraceRecord rec;
      rec.t = t;
      rec.node = node;
      rec.beam = beam;
      rec.event = event;
      if (f) {
        rec.frame_kind = frame_kind_name(f->kind);
        rec.src = f->src;
        rec.dst = f->dst;
      }
      if (trace_sink_) trace_sink_(rec);
      if (log_enabled_) {
        std::cerr << format_us(t) << " n" << node << " b" << beam << ' ' << event;
        if (f) {
          std::cerr << ' ' << rec.frame_kind << ' ' << f->src << "->" << f->dst;
        }
        std::cerr << '\n';
      }
    };

    for (std::size_t i = 0; i < scen_.nodes.size(); ++i) {
      NodeConfig cfg = scen_.mac;
      cfg.antenna = scen_.nodes[i].antenna;
      nodes_.push_back(std::make_unique<Node>(static_cast<int>(i), cfg, queue_,
                                              *medium_, hooks));
    }

    refresh_routes();
    schedule_route_refresh();  // reactivates demoted routes that still exist
    if (scen_.mobility.enabled) {
      mobility_rng_ = std::make_unique<RngStream>(seed_, "mobility");
      mobility_ = std::make_unique<GaussMarkovModel>(scen_.mobility.params,
                                                     positions_, *mobility_rng_);
      schedule_mobility_step();
    }

    traffic_rng_ = std::make_unique<RngStream>(seed_, "traffic-jitter");
    for (const auto& f : scen_.flows) {
      flow_src_[f.id] = f.src;
      schedule_traffic(f, 0);
    }
  }

 private:
  FlowStats flow_stats(int flow_id) const {
    const auto& all = metrics_.flows();
    auto it = all.find(flow_id);
    return it == all.end() ? FlowStats{} : it->second;
  }

  void schedule_traffic(const FlowSpec& f, std::int64_t k) {
    SimTime at = f.start + k * f.interarrival();
    if (f.jitter_fraction > 0.0) {
      at += static_cast<SimTime>(traffic_rng_->uniform(
          0.0, f.jitter_fraction * static_cast<double>(f.interarrival())));
    }
    if (at > scen_.duration) return;
    at = std::max(at, queue_.now());
    queue_.schedule(at, EventKind::TrafficArrival, f.src, [this, f, k] {
      generate_packet(f, k);
      schedule_traffic(f, k + 1);
    });
  }

  void generate_packet(const FlowSpec& f, std::int64_t seq) {
    metrics_.on_generated(f.id);
    const int route_id = router_.assign_route(f.id);
    if (route_id < 0) {
      metrics_.on_drop(f.id, "noroute");
      return;
    }
    QueuedPacket p;
    p.flow_id = f.id;
    p.seq = seq;
    p.final_dst = f.dst;
    p.route_id = route_id;
    p.next_hop = router_.next_hop(route_id, f.src);
    p.size_bytes = f.packet_bytes;
    p.gen_time = queue_.now();
    if (p.next_hop < 0) {
      metrics_.on_drop(f.id, "noroute");
      return;
    }
    nodes_[static_cast<std::size_t>(f.src)]->enqueue(std::move(p));
  }

  void refresh_routes() {
    std::vector<Position> pos;
    pos.reserve(nodes_.size());
    for (int i = 0; i < medium_->num_radios(); ++i) pos.push_back(medium_->radio(i).pos);
    const auto adj = build_adjacency(pos, scen_.channel.comm_radius_m);
    for (const auto& f : scen_.flows) {
      router_.refresh_flow(f.id, f.src, f.dst, adj, scen_.routing.k);
    }
    update_idle_steering();
  }

  // A steerable node parks its beam facing the hop it expects traffic from
  // (its predecessor on the lowest-rank route through it), so forwarded
  // packets find it listening. Sources park facing their first hop.
  void update_idle_steering() {
    for (const auto& f : scen_.flows) {
      for (int rid : router_.active_routes(f.id)) {
        const Route* r = router_.route(rid);
        if (!r) continue;
        for (std::size_t i = 0; i < r->hops.size(); ++i) {
          const int node = r->hops[i];
          if (!scen_.nodes[static_cast<std::size_t>(node)].antenna.steerable) continue;
          const int face = i == 0 ? r->hops[1] : r->hops[i - 1];
          const Position& a = medium_->radio(node).pos;
          const Position& b = medium_->radio(face).pos;
          if (a.x == b.x && a.y == b.y) continue;
          nodes_[static_cast<std::size_t>(node)]->set_idle_steering(azimuth_deg(a, b));
        }
      }
    }
  }

  void schedule_mobility_step() {
    const SimTime at = queue_.now() + scen_.mobility.params.update_interval;
    if (at > scen_.duration) return;
    queue_.schedule(at, EventKind::MobilityUpdate, -1, [this] {
      mobility_->step(*mobility_rng_);
      const auto& pos = mobility_->positions();
      for (std::size_t i = 0; i < pos.size(); ++i) {
        medium_->set_position(static_cast<int>(i), pos[i]);
      }
      schedule_mobility_step();
    });
  }

  void schedule_route_refresh() {
    const SimTime at = queue_.now() + scen_.routing.refresh;
    if (at > scen_.duration) return;
    queue_.schedule(at, EventKind::NeighborDiscovery, -1, [this] {
      refresh_routes();
      schedule_route_refresh();
    });
  }

  Scenario scen_;
  std::uint64_t seed_;
  bool built_ = false;
  bool log_enabled_ = false;

  EventQueue queue_;
  std::unique_ptr<Medium> medium_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<Position> positions_;
  Router router_;
  MetricsCollector metrics_;
  std::map<int, int> flow_src_;
  std::unique_ptr<GaussMarkovModel> mobility_;
  std::unique_ptr<RngStream> mobility_rng_;
  std::unique_ptr<RngStream> traffic_rng_;
  std::function<void(const TraceRecord&)> trace_sink_;
};

}  // namespace mbmac

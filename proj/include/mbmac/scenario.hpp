#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mbmac/frame.hpp"
#include "mbmac/geometry.hpp"
#include "mbmac/mobility.hpp"
#include "mbmac/node.hpp"
#include "mbmac/window.hpp"

namespace mbmac {

using json = nlohmann::json;

struct NodeSpec {
  int id = 0;
  Position pos;
  AntennaConfig antenna;
  bool placed = true;  // false: drawn uniformly at run time from the seed
};

struct FlowSpec {
  int id = 0;
  int src = 0;
  int dst = 0;
  double rate_bps = 3e6;
  int packet_bytes = 1500;
  SimTime start = 0;
  double jitter_fraction = 0.0;  // uniform jitter on each interarrival

  SimTime interarrival() const {
    return static_cast<SimTime>(
        std::llround(static_cast<double>(packet_bytes) * 8.0 / rate_bps * 1e9));
  }
};

struct MobilitySpec {
  bool enabled = false;
  GaussMarkovParams params;
};

struct RoutingSpec {
  int k = 4;
  SimTime refresh = 1 * kSecond;
};

struct Scenario {
  std::string name = "unnamed";
  SimTime duration = 180 * kSecond;
  ChannelModel channel;
  NodeConfig mac;                 // shared by all nodes; variant may be overridden
  bool role_switch_auto = false;  // derive role_switch_slots from the channel
  std::vector<NodeSpec> nodes;
  std::vector<FlowSpec> flows;
  MobilitySpec mobility;
  RoutingSpec routing;

  int resolved_role_switch_slots() const {
    if (!role_switch_auto) return mac.role_switch_slots;
    const SimTime worst = channel.transmission_delay(mac.sizes.rts_bytes) +
                          channel.max_propagation_delay();
    return required_role_switch_slots(worst, mac.timing.slot);
  }
};

namespace detail {

inline SimTime get_us(const json& j, const char* key, SimTime fallback) {
  return j.contains(key) ? from_us(j.at(key).get<double>()) : fallback;
}

inline MacVariant parse_variant(const std::string& s) {
  if (s == "basic") return MacVariant::Basic;
  if (s == "proposed") return MacVariant::Proposed;
  throw std::invalid_argument("unknown mac variant '" + s + "'");
}

}  // namespace detail

inline Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.name = j.value("name", std::string("unnamed"));
  s.duration = static_cast<SimTime>(
      std::llround(j.value("duration_s", 180.0) * static_cast<double>(kSecond)));

  if (j.contains("channel")) {
    const auto& c = j.at("channel");
    s.channel.bit_rate_bps = c.value("bit_rate_bps", 5e6);
    s.channel.comm_radius_m = c.value("comm_radius_m", 3000.0);
    s.channel.propagation_speed_mps = c.value("propagation_speed_mps", 3e8);
  }

  if (j.contains("mac")) {
    const auto& m = j.at("mac");
    if (m.contains("variant")) {
      s.mac.variant = detail::parse_variant(m.at("variant").get<std::string>());
    }
    s.mac.timing.slot = detail::get_us(m, "slot_us", s.mac.timing.slot);
    s.mac.timing.sifs = detail::get_us(m, "sifs_us", s.mac.timing.sifs);
    s.mac.timing.difs = detail::get_us(m, "difs_us", s.mac.timing.difs);
    s.mac.cw_min = m.value("cw_min", s.mac.cw_min);
    s.mac.cw_max = m.value("cw_max", s.mac.cw_max);
    s.mac.srl_limit = m.value("srl_limit", s.mac.srl_limit);
    s.mac.lrl_limit = m.value("lrl_limit", s.mac.lrl_limit);
    s.mac.queue_capacity = m.value("queue_capacity", s.mac.queue_capacity);
    s.mac.window_period = detail::get_us(m, "window_period_us", s.mac.window_period);
    s.mac.data_window_multiplier =
        m.value("data_window_multiplier", s.mac.data_window_multiplier);
    if (m.contains("role_switch_slots")) {
      if (m.at("role_switch_slots").is_string()) {
        if (m.at("role_switch_slots").get<std::string>() != "auto") {
          throw std::invalid_argument("role_switch_slots must be an integer or \"auto\"");
        }
        s.role_switch_auto = true;
      } else {
        s.mac.role_switch_slots = m.at("role_switch_slots").get<int>();
      }
    }
    s.mac.basic_rx_window = detail::get_us(m, "basic_rx_window_us", s.mac.basic_rx_window);
    s.mac.basic_rx_window_after_fail =
        m.value("basic_rx_window_after_fail", s.mac.basic_rx_window_after_fail);
    s.mac.basic_flag_during_rx =
        m.value("basic_flag_during_rx", s.mac.basic_flag_during_rx);
    s.mac.basic_flag_in_collection =
        m.value("basic_flag_in_collection", s.mac.basic_flag_in_collection);
    s.mac.cts_timeout = detail::get_us(m, "cts_timeout_us", 0);
    s.mac.data_timeout = detail::get_us(m, "data_timeout_us", 0);
    s.mac.ack_timeout = detail::get_us(m, "ack_timeout_us", 0);
    s.mac.sizes.rts_bytes = m.value("rts_bytes", s.mac.sizes.rts_bytes);
    s.mac.sizes.cts_bytes = m.value("cts_bytes", s.mac.sizes.cts_bytes);
    s.mac.sizes.ack_bytes = m.value("ack_bytes", s.mac.sizes.ack_bytes);
  }

  if (j.contains("nodes")) {
    for (const auto& n : j.at("nodes")) {
      NodeSpec spec;
      spec.id = n.at("id").get<int>();
      spec.pos = {n.value("x", 0.0), n.value("y", 0.0)};
      spec.antenna.num_beams = n.value("beams", 1);
      spec.antenna.boresight_offset_deg = n.value("boresight_deg", 0.0);
      spec.antenna.steerable = n.value("steerable", false);
      spec.antenna.beamwidth_deg = n.value("beamwidth_deg", 45.0);
      s.nodes.push_back(spec);
    }
  }
  if (j.contains("nodes_auto")) {
    const auto& a = j.at("nodes_auto");
    const int count = a.at("count").get<int>();
    // Heterogeneous population: the listed ids (typically flow endpoints)
    // get a fixed multi-beam antenna, everyone else the default antenna.
    std::vector<int> multi_ids;
    if (a.contains("multi_beam_ids")) {
      multi_ids = a.at("multi_beam_ids").get<std::vector<int>>();
    }
    for (int i = 0; i < count; ++i) {
      NodeSpec spec;
      spec.id = static_cast<int>(s.nodes.size());
      spec.placed = false;  // position drawn from the run seed
      if (std::find(multi_ids.begin(), multi_ids.end(), spec.id) != multi_ids.end()) {
        spec.antenna.num_beams = a.value("multi_beam_beams", 4);
        spec.antenna.steerable = false;
      } else {
        spec.antenna.num_beams = a.value("beams", 1);
        spec.antenna.steerable = a.value("steerable", true);
        spec.antenna.beamwidth_deg = a.value("beamwidth_deg", 45.0);
      }
      s.nodes.push_back(spec);
    }
  }

  if (j.contains("flows")) {
    for (const auto& f : j.at("flows")) {
      FlowSpec flow;
      flow.id = f.at("id").get<int>();
      flow.src = f.at("src").get<int>();
      flow.dst = f.at("dst").get<int>();
      flow.rate_bps = f.at("rate_bps").get<double>();
      flow.packet_bytes = f.value("packet_bytes", 1500);
      flow.start = detail::get_us(f, "start_us", 0);
      flow.jitter_fraction = f.value("jitter_fraction", 0.0);
      s.flows.push_back(flow);
    }
  }

  if (j.contains("mobility")) {
    const auto& m = j.at("mobility");
    const std::string model = m.value("model", std::string("none"));
    if (model == "gauss-markov") {
      s.mobility.enabled = true;
      auto& p = s.mobility.params;
      p.alpha = m.value("alpha", p.alpha);
      p.mean_speed_mps = m.value("mean_speed_mps", p.mean_speed_mps);
      p.speed_sigma_mps = m.value("speed_sigma_mps", p.speed_sigma_mps);
      p.direction_sigma_rad = m.value("direction_sigma_rad", p.direction_sigma_rad);
      p.update_interval = static_cast<SimTime>(std::llround(
          m.value("update_interval_s", 1.0) * static_cast<double>(kSecond)));
      p.field_width_m = m.value("field_width_m", p.field_width_m);
      p.field_height_m = m.value("field_height_m", p.field_height_m);
    } else if (model != "none") {
      throw std::invalid_argument("unknown mobility model '" + model + "'");
    }
  }

  if (j.contains("routing")) {
    const auto& r = j.at("routing");
    s.routing.k = r.value("k", s.routing.k);
    s.routing.refresh = static_cast<SimTime>(
        std::llround(r.value("refresh_s", 1.0) * static_cast<double>(kSecond)));
  }
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  json j = json::parse(in);
  return scenario_from_json(j);
}

// Stable fingerprint of the effective configuration (FNV-1a over the
// canonical JSON dump), stamped into every output row.
inline std::string config_hash(const json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

// Structural and protocol-parameter checks a scenario must pass before a
// run is meaningful.
inline ValidationReport validate_scenario(const Scenario& s) {
  ValidationReport rep;
  auto err = [&](const std::string& m) { rep.errors.push_back(m); };
  auto warn = [&](const std::string& m) { rep.warnings.push_back(m); };

  if (s.nodes.empty()) err("scenario has no nodes");
  if (s.duration <= 0) err("duration must be positive");
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const auto& n = s.nodes[i];
    if (n.id != static_cast<int>(i)) {
      err("node ids must be 0..n-1 in order (node " + std::to_string(n.id) + ")");
    }
    if (n.antenna.num_beams < 1) err("node has no beams");
    if (n.antenna.steerable && n.antenna.num_beams != 1) {
      err("steerable antennas are single-beam");
    }
  }
  const int n = static_cast<int>(s.nodes.size());
  for (const auto& f : s.flows) {
    if (f.src < 0 || f.src >= n || f.dst < 0 || f.dst >= n || f.src == f.dst) {
      err("flow " + std::to_string(f.id) + " has invalid endpoints");
    }
    if (f.rate_bps <= 0) err("flow " + std::to_string(f.id) + " rate must be positive");
  }
  if (s.mac.cw_min < 1 || s.mac.cw_max < s.mac.cw_min) err("invalid contention window range");
  if ((s.mac.cw_min & (s.mac.cw_min - 1)) != 0) warn("cw_min is not a power of two");

  // Arrival window feasibility: the window must cover twice the worst
  // propagation spread among transmitters synchronized at a shared
  // receiver, and stay under SIFS.
  if (s.mac.variant == MacVariant::Proposed && !s.mobility.enabled) {
    std::vector<SynchronizedPair> pairs;
    for (std::size_t a = 0; a < s.flows.size(); ++a) {
      for (std::size_t b = a + 1; b < s.flows.size(); ++b) {
        const auto& fa = s.flows[a];
        const auto& fb = s.flows[b];
        if (fa.dst != fb.dst) continue;
        pairs.push_back({s.channel.propagation_delay(
                             distance(s.nodes[fa.src].pos, s.nodes[fa.dst].pos)),
                         s.channel.propagation_delay(
                             distance(s.nodes[fb.src].pos, s.nodes[fb.dst].pos))});
      }
    }
    const auto check =
        compute_window_period(pairs, s.mac.timing.sifs, s.mac.window_period);
    if (!check.valid) err(check.message);
  } else if (s.mac.variant == MacVariant::Proposed) {
    if (s.mac.window_period >= s.mac.timing.sifs) {
      err("window period must be strictly less than SIFS");
    }
  }
  if (s.mobility.enabled) {
    for (const auto& nd : s.nodes) {
      if (nd.placed &&
          (nd.pos.x < 0 || nd.pos.x > s.mobility.params.field_width_m ||
           nd.pos.y < 0 || nd.pos.y > s.mobility.params.field_height_m)) {
        err("node " + std::to_string(nd.id) + " placed outside the field");
      }
    }
  }
  if (s.routing.k < 1) err("routing.k must be at least 1");
  return rep;
}

}  // namespace mbmac

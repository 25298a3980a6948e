#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "mbmac/time.hpp"

namespace mbmac {

struct FlowStats {
  std::int64_t generated = 0;
  std::int64_t delivered = 0;   // unique sequence numbers at the destination
  std::int64_t duplicates = 0;  // redeliveries of an already-counted packet
  std::int64_t drops_overflow = 0;
  std::int64_t drops_retry = 0;
  std::int64_t drops_noroute = 0;
  SimTime delay_sum = 0;        // over counted deliveries

  double pdr() const {
    return generated == 0 ? 0.0
                          : static_cast<double>(delivered) /
                                static_cast<double>(generated);
  }
  double mean_delay_us(SimTime /*unused*/ = 0) const {
    return delivered == 0 ? 0.0
                          : to_us(delay_sum) / static_cast<double>(delivered);
  }
  double throughput_bps(SimTime duration, int packet_bytes) const {
    const double secs = to_seconds(duration);
    return secs <= 0.0 ? 0.0
                       : static_cast<double>(delivered) * packet_bytes * 8.0 / secs;
  }
  std::int64_t drops_total() const {
    return drops_overflow + drops_retry + drops_noroute;
  }
};

// Per-flow counters plus route usage, with duplicate suppression so a
// retransmission whose first copy already arrived is not double counted.
class MetricsCollector {
 public:
  void on_generated(int flow) { flows_[flow].generated++; }

  void on_delivered(int flow, std::int64_t seq, SimTime gen_time, SimTime now,
                    int route_id, int route_rank) {
    auto& f = flows_[flow];
    if (!seen_[flow].insert(seq).second) {
      f.duplicates++;
      return;
    }
    f.delivered++;
    f.delay_sum += now - gen_time;
    route_delivered_[{flow, route_rank}]++;
    routes_in_bucket_[{flow, now / kSecond}].insert(route_rank);
    (void)route_id;
  }

  void on_drop(int flow, const std::string& reason) {
    auto& f = flows_[flow];
    if (reason == "overflow") {
      f.drops_overflow++;
    } else if (reason == "retry") {
      f.drops_retry++;
    } else {
      f.drops_noroute++;
    }
  }

  const FlowStats& flow(int id) const { return flows_.at(id); }
  const std::map<int, FlowStats>& flows() const { return flows_; }

  // Fraction of a flow's counted deliveries that traveled a route other
  // than the fewest-hop one of its refresh.
  double extra_route_fraction(int flow) const {
    std::int64_t primary = 0, extra = 0;
    for (const auto& [key, n] : route_delivered_) {
      if (key.first != flow) continue;
      if (key.second == 0) {
        primary += n;
      } else {
        extra += n;
      }
    }
    const std::int64_t total = primary + extra;
    return total == 0 ? 0.0
                      : static_cast<double>(extra) / static_cast<double>(total);
  }

  std::int64_t deliveries_on_rank(int flow, int rank) const {
    auto it = route_delivered_.find({flow, rank});
    return it == route_delivered_.end() ? 0 : it->second;
  }

  // A DATA transmission leaving the flow's source node (first attempt or
  // retry). Feeds the concurrent multi-route usage measure.
  void on_source_tx(int flow, int route_rank, SimTime now) {
    src_ranks_in_bucket_[{flow, now / kSecond}].insert(route_rank);
  }

  // Distinct route ranks the source transmitted on in each one-second
  // bucket. A bucket with >= 2 ranks means the flow pushed traffic over an
  // extra route beyond the fewest-hop one within that second.
  std::map<std::int64_t, int> source_routes_per_second(int flow) const {
    std::map<std::int64_t, int> out;
    for (const auto& [key, ranks] : src_ranks_in_bucket_) {
      if (key.first == flow) out[key.second] = static_cast<int>(ranks.size());
    }
    return out;
  }

  // Distinct route ranks a flow delivered over in each one-second bucket;
  // the raw series behind "how often is load spread beyond the fewest-hop
  // route". Ranks (not route ids) so a mid-second route refresh does not
  // count the same position twice.
  std::map<std::int64_t, int> routes_used_per_second(int flow) const {
    std::map<std::int64_t, int> out;
    for (const auto& [key, ranks] : routes_in_bucket_) {
      if (key.first == flow) out[key.second] = static_cast<int>(ranks.size());
    }
    return out;
  }

 private:
  std::map<int, FlowStats> flows_;
  std::map<int, std::set<std::int64_t>> seen_;
  std::map<std::pair<int, int>, std::int64_t> route_delivered_;  // (flow, rank)
  // (flow, second) -> distinct route ranks delivered on in that second
  std::map<std::pair<int, std::int64_t>, std::set<int>> routes_in_bucket_;
  // (flow, second) -> distinct route ranks the source transmitted on
  std::map<std::pair<int, std::int64_t>, std::set<int>> src_ranks_in_bucket_;
};

}  // namespace mbmac

#pragma once

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <vector>

#include "mbmac/geometry.hpp"

namespace mbmac {

struct Route {
  int id = -1;
  int flow_id = -1;
  std::vector<int> hops;  // src ... dst inclusive
  int rank = 0;           // 0 = shortest route of its refresh
  bool active = true;
};

// Oracle adjacency from current positions: symmetric links inside the
// communication radius.
inline std::vector<std::vector<int>> build_adjacency(
    const std::vector<Position>& pos, double radius_m) {
  const int n = static_cast<int>(pos.size());
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (distance(pos[i], pos[j]) <= radius_m) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  return adj;
}

// Fewest-hop path from src to dst by BFS; ties resolve toward lower node
// ids because neighbors are scanned in ascending order. Empty when
// unreachable. `banned` nodes may not appear as intermediates.
inline std::vector<int> shortest_path(const std::vector<std::vector<int>>& adj,
                                      int src, int dst,
                                      const std::set<int>& banned) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> parent(n, -1);
  std::vector<bool> seen(n, false);
  std::queue<int> q;
  q.push(src);
  seen[src] = true;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    if (u == dst) break;
    std::vector<int> nbrs = adj[u];
    std::sort(nbrs.begin(), nbrs.end());
    for (int v : nbrs) {
      if (seen[v]) continue;
      if (v != dst && banned.count(v)) continue;
      seen[v] = true;
      parent[v] = u;
      q.push(v);
    }
  }
  if (!seen[dst]) return {};
  std::vector<int> path;
  for (int v = dst; v != -1; v = parent[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

// Up to k node-disjoint src->dst paths found by unit-capacity max-flow on
// the split graph (node v becomes v_in -> v_out, capacity 1 except at the
// endpoints). Unlike a greedy "shortest path then ban" sweep, augmenting
// paths may reroute earlier flow, so a disjoint pair is found whenever one
// exists. Deterministic: neighbors are explored in ascending id order.
inline std::vector<std::vector<int>> disjoint_paths(
    const std::vector<std::vector<int>>& adj, int src, int dst, int k) {
  const int n = static_cast<int>(adj.size());
  if (src == dst || src < 0 || dst < 0 || src >= n || dst >= n) return {};

  struct Arc {
    int to;
    int cap;
    int rev;   // index of the reverse arc in graph[to]
    bool fwd;  // true for original arcs, false for residual twins
  };
  // Split node v into v_in = 2v and v_out = 2v + 1.
  std::vector<std::vector<Arc>> g(2 * n);
  auto add_arc = [&](int u, int v, int cap) {
    g[u].push_back({v, cap, static_cast<int>(g[v].size()), true});
    g[v].push_back({u, 0, static_cast<int>(g[u].size()) - 1, false});
  };
  for (int v = 0; v < n; ++v) {
    add_arc(2 * v, 2 * v + 1, (v == src || v == dst) ? k : 1);
  }
  for (int u = 0; u < n; ++u) {
    std::vector<int> nbrs = adj[u];
    std::sort(nbrs.begin(), nbrs.end());
    for (int v : nbrs) add_arc(2 * u + 1, 2 * v, 1);
  }

  const int source = 2 * src + 1;  // src_out
  const int sink = 2 * dst;        // dst_in
  int flow = 0;
  while (flow < k) {
    // BFS for a shortest augmenting path in the residual graph.
    std::vector<int> prev_node(2 * n, -1);
    std::vector<int> prev_arc(2 * n, -1);
    std::queue<int> q;
    q.push(source);
    prev_node[source] = source;
    while (!q.empty() && prev_node[sink] == -1) {
      int u = q.front();
      q.pop();
      for (std::size_t i = 0; i < g[u].size(); ++i) {
        const Arc& a = g[u][i];
        if (a.cap <= 0 || prev_node[a.to] != -1) continue;
        prev_node[a.to] = u;
        prev_arc[a.to] = static_cast<int>(i);
        q.push(a.to);
      }
    }
    if (prev_node[sink] == -1) break;
    for (int v = sink; v != source; v = prev_node[v]) {
      Arc& a = g[prev_node[v]][prev_arc[v]];
      a.cap -= 1;
      g[v][a.rev].cap += 1;
    }
    ++flow;
  }
  if (flow == 0) return {};

  // Decompose the flow into node-disjoint paths by walking saturated arcs.
  std::vector<std::vector<int>> out;
  for (int p = 0; p < flow; ++p) {
    std::vector<int> path{src};
    int u = source;
    int steps = 0;
    while (u != sink && ++steps <= 2 * n) {
      bool advanced = false;
      for (Arc& a : g[u]) {
        // Unit forward arcs carry flow exactly when saturated.
        if (!a.fwd || a.cap != 0) continue;
        a.cap = -1;  // consume so the next decomposition skips it
        u = a.to;
        if (u % 2 == 0) path.push_back(u / 2);
        advanced = true;
        break;
      }
      if (!advanced) {
        path.clear();
        break;
      }
    }
    if (u != sink) path.clear();
    if (!path.empty()) out.push_back(path);
  }
  std::sort(out.begin(), out.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              if (a.size() != b.size()) return a.size() < b.size();
              return a < b;
            });
  return out;
}

// Keeps every flow's current multipath route set plus an append-only
// registry so packets already traveling on a superseded route can still be
// forwarded along it.
class Router {
 public:
  // Recomputes the active route set of a flow from fresh adjacency.
  void refresh_flow(int flow_id, int src, int dst,
                    const std::vector<std::vector<int>>& adj, int k) {
    std::vector<int> ids;
    auto paths = disjoint_paths(adj, src, dst, k);
    for (std::size_t r = 0; r < paths.size(); ++r) {
      Route route;
      route.id = next_id_++;
      route.flow_id = flow_id;
      route.hops = paths[r];
      route.rank = static_cast<int>(r);
      registry_[route.id] = route;
      ids.push_back(route.id);
    }
    active_[flow_id] = std::move(ids);
    rr_cursor_[flow_id] = 0;
  }

  // Round-robin pick over the flow's active routes; -1 when none exist.
  int assign_route(int flow_id) {
    auto it = active_.find(flow_id);
    if (it == active_.end()) return -1;
    auto& ids = it->second;
    const int n = static_cast<int>(ids.size());
    std::size_t& cur = rr_cursor_[flow_id];
    for (int tries = 0; tries < n; ++tries) {
      const int id = ids[cur % ids.size()];
      cur = (cur + 1) % ids.size();
      if (registry_[id].active) return id;
    }
    return -1;
  }

  // Next hop after `node` on the route; -1 when the node is not on it.
  int next_hop(int route_id, int node) const {
    auto it = registry_.find(route_id);
    if (it == registry_.end()) return -1;
    const auto& hops = it->second.hops;
    for (std::size_t i = 0; i + 1 < hops.size(); ++i) {
      if (hops[i] == node) return hops[static_cast<int>(i) + 1];
    }
    return -1;
  }

  int prev_hop(int route_id, int node) const {
    auto it = registry_.find(route_id);
    if (it == registry_.end()) return -1;
    const auto& hops = it->second.hops;
    for (std::size_t i = 1; i < hops.size(); ++i) {
      if (hops[i] == node) return hops[i - 1];
    }
    return -1;
  }

  const Route* route(int route_id) const {
    auto it = registry_.find(route_id);
    return it == registry_.end() ? nullptr : &it->second;
  }

  // A packet exhausted its retries on this route: stop assigning new
  // packets to it until the next refresh rebuilds the set.
  void demote(int route_id) {
    auto it = registry_.find(route_id);
    if (it != registry_.end()) it->second.active = false;
  }

  std::vector<int> active_routes(int flow_id) const {
    std::vector<int> out;
    auto it = active_.find(flow_id);
    if (it == active_.end()) return out;
    for (int id : it->second) {
      if (registry_.at(id).active) out.push_back(id);
    }
    return out;
  }

 private:
  int next_id_ = 0;
  std::map<int, Route> registry_;
  std::map<int, std::vector<int>> active_;   // flow -> route ids of last refresh
  std::map<int, std::size_t> rr_cursor_;
};

}  // namespace mbmac

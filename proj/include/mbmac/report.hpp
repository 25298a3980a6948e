#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbmac/simulation.hpp"

namespace mbmac {

inline std::string metrics_csv_header() {
  return "scenario,variant,seed,config_hash,flow_id,rate_bps,generated,delivered,"
         "drops_overflow,drops_retry,drops_noroute,throughput_bps,pdr,"
         "e2e_delay_us,extra_route_fraction";
}

inline void write_metrics_rows(std::ostream& os, const RunResult& r,
                               const std::string& hash) {
  for (const auto& [flow_id, st] : r.flows) {
    const int bytes = r.flow_packet_bytes.at(flow_id);
    os << r.scenario << ',' << mac_variant_name(r.variant) << ',' << r.seed << ','
       << hash << ',' << flow_id << ',' << r.flow_rate_bps.at(flow_id) << ','
       << st.generated << ',' << st.delivered << ',' << st.drops_overflow << ','
       << st.drops_retry << ',' << st.drops_noroute << ','
       << st.throughput_bps(r.duration, bytes) << ',' << st.pdr() << ','
       << st.mean_delay_us() << ',' << r.extra_route_fraction.at(flow_id) << '\n';
  }
}

inline std::string trace_csv_header() {
  return "t_ns,node,beam,event,frame_kind,src,dst,scenario,variant,seed,config_hash";
}

inline void write_trace_row(std::ostream& os, const TraceRecord& rec,
                            const std::string& scenario, MacVariant variant,
                            std::uint64_t seed, const std::string& hash) {
  os << rec.t << ',' << rec.node << ',' << rec.beam << ',' << rec.event << ','
     << rec.frame_kind << ',' << rec.src << ',' << rec.dst << ',' << scenario
     << ',' << mac_variant_name(variant) << ',' << seed << ',' << hash << '\n';
}

// One parsed metrics.csv row; only the fields compare needs.
struct MetricsRow {
  std::string scenario;
  std::string variant;
  std::uint64_t seed = 0;
  int flow_id = 0;
  double rate_bps = 0;
  double throughput_bps = 0;
  double pdr = 0;
  double e2e_delay_us = 0;
  double extra_route_fraction = 0;
};

inline std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics csv: " + path);
  std::vector<MetricsRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() < 15) throw std::runtime_error("malformed metrics row: " + line);
    MetricsRow r;
    r.scenario = f[0];
    r.variant = f[1];
    r.seed = std::stoull(f[2]);
    r.flow_id = std::stoi(f[4]);
    r.rate_bps = std::stod(f[5]);
    r.throughput_bps = std::stod(f[11]);
    r.pdr = std::stod(f[12]);
    r.e2e_delay_us = std::stod(f[13]);
    r.extra_route_fraction = std::stod(f[14]);
    rows.push_back(r);
  }
  return rows;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double quartile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double idx = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

// Side-by-side comparison of two result sets over the seeds they share.
// One output row per (flow, metric): medians, quartiles, delta.
inline std::string compare_report(const std::vector<MetricsRow>& a,
                                  const std::vector<MetricsRow>& b) {
  auto group = [](const std::vector<MetricsRow>& rows) {
    std::map<int, std::map<std::uint64_t, MetricsRow>> byflow;
    for (const auto& r : rows) byflow[r.flow_id][r.seed] = r;
    return byflow;
  };
  const auto ga = group(a);
  const auto gb = group(b);

  std::ostringstream os;
  os << "flow_id,metric,a_median,a_q1,a_q3,b_median,b_q1,b_q3,delta_median,paired_seeds\n";
  struct Metric {
    const char* name;
    double MetricsRow::*field;
  };
  const Metric metrics[] = {
      {"throughput_bps", &MetricsRow::throughput_bps},
      {"pdr", &MetricsRow::pdr},
      {"e2e_delay_us", &MetricsRow::e2e_delay_us},
      {"extra_route_fraction", &MetricsRow::extra_route_fraction},
  };
  for (const auto& [flow, seeds_a] : ga) {
    auto itb = gb.find(flow);
    if (itb == gb.end()) continue;
    std::vector<std::uint64_t> shared;
    for (const auto& [seed, row] : seeds_a) {
      if (itb->second.count(seed)) shared.push_back(seed);
    }
    if (shared.empty()) continue;
    for (const auto& m : metrics) {
      std::vector<double> va, vb;
      for (auto seed : shared) {
        va.push_back(seeds_a.at(seed).*(m.field));
        vb.push_back(itb->second.at(seed).*(m.field));
      }
      const double ma = median(va), mb = median(vb);
      os << flow << ',' << m.name << ',' << ma << ',' << quartile(va, 0.25) << ','
         << quartile(va, 0.75) << ',' << mb << ',' << quartile(vb, 0.25) << ','
         << quartile(vb, 0.75) << ',' << (mb - ma) << ',' << shared.size() << '\n';
    }
  }
  return os.str();
}

}  // namespace mbmac

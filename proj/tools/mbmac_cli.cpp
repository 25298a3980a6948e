// Command line front end: run scenarios, validate them, and compare result
// sets. See README.md for the scenario format.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mbmac/report.hpp"
#include "mbmac/scenario.hpp"
#include "mbmac/simulation.hpp"

namespace fs = std::filesystem;
using namespace mbmac;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  return json::parse(in);
}

int cmd_run(const std::string& scenario_path, std::uint64_t seed, int replications,
            const std::string& mac, const std::string& out_dir, bool trace) {
  json j = load_json(scenario_path);
  std::optional<MacVariant> variant;
  if (!mac.empty()) {
    variant = detail::parse_variant(mac);
    j["mac"]["variant"] = mac;  // the hash reflects the effective config
  }
  const std::string hash = config_hash(j);
  Scenario base = scenario_from_json(j);
  if (variant) base.mac.variant = *variant;

  const auto report = validate_scenario(base);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  if (!report.ok()) {
    for (const auto& e : report.errors) std::cerr << "error: " << e << '\n';
    return 2;
  }

  fs::create_directories(out_dir);
  std::ofstream metrics(fs::path(out_dir) / "metrics.csv");
  metrics << metrics_csv_header() << '\n';
  std::ofstream trace_file;
  if (trace) {
    trace_file.open(fs::path(out_dir) / "trace.csv");
    trace_file << trace_csv_header() << '\n';
  }

  for (int r = 0; r < replications; ++r) {
    const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(r);
    Simulation sim(base, run_seed, variant);
    if (trace) {
      sim.set_trace_sink([&](const TraceRecord& rec) {
        write_trace_row(trace_file, rec, base.name, sim.scenario().mac.variant,
                        run_seed, hash);
      });
    }
    const RunResult result = sim.run();
    write_metrics_rows(metrics, result, hash);
    std::cout << base.name << " seed=" << run_seed << " variant="
              << mac_variant_name(result.variant) << ":";
    for (const auto& [flow, st] : result.flows) {
      std::cout << " flow" << flow << " pdr=" << st.pdr() << " thr="
                << st.throughput_bps(result.duration,
                                     result.flow_packet_bytes.at(flow))
                << "bps";
    }
    std::cout << '\n';
  }
  std::cout << "wrote " << (fs::path(out_dir) / "metrics.csv").string() << '\n';
  return 0;
}

int cmd_validate(const std::string& scenario_path) {
  Scenario s = load_scenario(scenario_path);
  const auto report = validate_scenario(s);
  for (const auto& w : report.warnings) std::cout << "warning: " << w << '\n';
  for (const auto& e : report.errors) std::cout << "error: " << e << '\n';
  if (report.ok()) {
    std::cout << "ok: " << s.name << " (" << s.nodes.size() << " nodes, "
              << s.flows.size() << " flows, variant "
              << mac_variant_name(s.mac.variant) << ")\n";
    return 0;
  }
  return 2;
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b,
                const std::string& out_path) {
  const auto a = read_metrics_csv((fs::path(dir_a) / "metrics.csv").string());
  const auto b = read_metrics_csv((fs::path(dir_b) / "metrics.csv").string());
  const std::string report = compare_report(a, b);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << report;
  std::cout << report;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-beam directional MAC simulator"};
  app.require_subcommand(1);

  std::string scenario_path, mac, out_dir = "out";
  std::uint64_t seed = 1;
  int replications = 1;
  bool trace = false;

  auto* run = app.add_subcommand("run", "simulate a scenario");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--seed", seed, "base RNG seed");
  run->add_option("--replications", replications, "number of seeds to run")
      ->check(CLI::PositiveNumber);
  run->add_option("--mac", mac, "override MAC variant")
      ->check(CLI::IsMember({"basic", "proposed"}));
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--trace", trace, "also write a per-frame trace.csv");

  std::string val_path;
  auto* val = app.add_subcommand("validate", "check a scenario file");
  val->add_option("scenario", val_path, "scenario JSON file")->required();

  std::string dir_a, dir_b, report_path = "report.csv";
  auto* cmp = app.add_subcommand("compare", "compare two result directories");
  cmp->add_option("dirA", dir_a)->required();
  cmp->add_option("dirB", dir_b)->required();
  cmp->add_option("--out", report_path, "report CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(scenario_path, seed, replications, mac, out_dir, trace);
    if (val->parsed()) return cmd_validate(val_path);
    if (cmp->parsed()) return cmd_compare(dir_a, dir_b, report_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

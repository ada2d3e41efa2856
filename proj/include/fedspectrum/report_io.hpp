#pragma once

// File renderings of run results: metrics CSV, run summary JSON, comparison
// JSON and the aligned comparison table.

#include <cstdio>
#include <iomanip>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedspectrum/engine.hpp"

namespace fedspectrum {

inline constexpr const char* kMetricsHeader =
    "run_id,topology,seed,node_id,pd,pfa,accuracy,tx_bytes,rx_bytes,train_macs,param_bytes";

inline std::string run_id(const RunResult& r) { return std::string(to_string(r.topology)) + "-" + std::to_string(r.seed); }

namespace detail {
inline std::string rate_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline nlohmann::ordered_json rate_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}
}  // namespace detail

/// One row per sensor followed by a "global" row per run. Undefined rates are
/// empty fields.
inline void write_metrics_csv(std::ostream& os, std::span<const RunResult> runs) {
  os << kMetricsHeader << '\n';
  for (const auto& r : runs) {
    const std::string prefix = run_id(r) + "," + std::string(to_string(r.topology)) + "," + std::to_string(r.seed) + ",";
    for (const auto& node : r.nodes) {
      os << prefix << node.node_id << ',' << detail::rate_field(node.metrics.pd) << ','
         << detail::rate_field(node.metrics.pfa) << ',' << format_double(node.metrics.accuracy) << ','
         << node.traffic.tx_bytes << ',' << node.traffic.rx_bytes << ',' << node.train_macs << ','
         << r.cost_totals.model_bytes << '\n';
    }
    os << prefix << "global," << detail::rate_field(r.global.pd) << ',' << detail::rate_field(r.global.pfa) << ','
       << format_double(r.global.accuracy) << ',' << r.traffic.total_bytes << ',' << r.traffic.total_bytes << ','
       << r.cost_totals.train_macs_accumulated << ','
       << r.cost_totals.model_bytes * static_cast<std::int64_t>(r.nodes.size()) << '\n';
  }
}

inline nlohmann::ordered_json metrics_json(const DetectionMetrics& m) {
  return {{"tp", m.tp},
          {"fp", m.fp},
          {"tn", m.tn},
          {"fn", m.fn},
          {"pd", detail::rate_json(m.pd)},
          {"pfa", detail::rate_json(m.pfa)},
          {"accuracy", m.accuracy}};
}

inline nlohmann::ordered_json run_summary_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["run_id"] = run_id(r);
  j["scenario_digest"] = r.scenario_digest;
  j["topology"] = to_string(r.topology);
  j["seed"] = r.seed;
  j["model"] = to_string(r.model_kind);
  j["federation_rounds"] = r.federation_rounds;
  j["global"] = metrics_json(r.global);
  j["traffic"] = {{"total_bytes", r.traffic.total_bytes},
                  {"central_bytes", r.traffic.central_bytes},
                  {"busiest_node_bytes", r.traffic.busiest_node_bytes(r.central_id)},
                  {"messages", r.traffic.messages}};
  j["cost"] = {{"macs_per_inference", r.cost_totals.macs_per_inference},
               {"param_count", r.cost_totals.param_count},
               {"model_bytes", r.cost_totals.model_bytes},
               {"train_macs_total", r.cost_totals.train_macs_accumulated},
               {"central_aggregation_macs", r.central_aggregation_macs},
               {"max_node_aggregation_macs", r.max_node_aggregation_macs}};
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

inline nlohmann::ordered_json comparison_json(const ComparisonReport& rep) {
  nlohmann::ordered_json j;
  j["scenario_digest"] = rep.scenario_digest;
  j["seeds"] = rep.seeds;
  j["n_sensors"] = rep.n_sensors;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"topology", to_string(r.topology)},
                    {"needs_neighbor_comm", r.needs_neighbor_comm},
                    {"busiest_node_bytes", r.busiest_node_bytes},
                    {"total_bytes", r.total_bytes},
                    {"central_bytes", r.central_bytes},
                    {"aggregation_macs_central", r.aggregation_macs_central},
                    {"max_node_aggregation_macs", r.max_node_aggregation_macs},
                    {"mean_accuracy", r.mean_accuracy},
                    {"mean_pd", detail::rate_json(r.mean_pd)},
                    {"mean_pfa", detail::rate_json(r.mean_pfa)},
                    {"pd_undefined_runs", r.pd_undefined_runs},
                    {"pfa_undefined_runs", r.pfa_undefined_runs},
                    {"train_macs_per_node", r.train_macs_per_node},
                    {"model_bytes", r.model_bytes},
                    {"macs_per_inference", r.macs_per_inference},
                    {"mean_degree", r.mean_degree},
                    {"max_degree", r.max_degree},
                    {"graph_components", r.graph_components},
                    {"nodes_without_neighbors", r.nodes_without_neighbors},
                    {"max_distance_to_central_m", r.max_distance_to_central_m}});
  }
  j["rows"] = rows;
  return j;
}

inline const std::vector<std::string>& comparison_aspects() {
  static const std::vector<std::string> aspects = {
      "Communication with neighboring nodes",
      "Flexibility with respect to topology",
      "Data sent to/from a single place",
      "Complexity of building the shared model",
      "Detection effectiveness",
  };
  return aspects;
}

namespace detail {
inline std::string fmt(const char* pattern, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

inline std::string rate_text(const std::optional<double>& v) { return v ? fmt("%.3f", *v) : std::string("n/a"); }

inline std::vector<std::string> aspect_cells(const TopologyRow& r) {
  std::vector<std::string> c(5);
  switch (r.topology) {
    case Topology::isolated:
      c[0] = "none";
      c[1] = "any (no exchange)";
      c[2] = "0 B";
      c[3] = "0 MACs";
      break;
    case Topology::gossip:
      c[0] = "required (mean degree " + fmt("%.2f", r.mean_degree) + ")";
      c[1] = std::to_string(r.graph_components) + " component(s), " + std::to_string(r.nodes_without_neighbors) +
             " unlinked";
      c[2] = "busiest node " + fmt("%.0f", r.busiest_node_bytes) + " B";
      c[3] = "busiest node " + fmt("%.0f", r.max_node_aggregation_macs) + " MACs";
      break;
    case Topology::central:
      c[0] = "optional (uplink only)";
      c[1] = "max range to center " + fmt("%.0f", r.max_distance_to_central_m) + " m";
      c[2] = "central " + fmt("%.0f", r.central_bytes) + " B";
      c[3] = "central " + fmt("%.0f", r.aggregation_macs_central) + " MACs";
      break;
  }
  c[4] = "acc " + fmt("%.3f", r.mean_accuracy) + " pd " + rate_text(r.mean_pd) + " pfa " + rate_text(r.mean_pfa);
  return c;
}
}  // namespace detail

/// Aligned text table: one row per aspect, one column per topology.
inline std::string comparison_table(const ComparisonReport& rep) {
  const auto& aspects = comparison_aspects();
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"Aspect"});
  for (const auto& a : aspects) grid.push_back({a});
  for (const auto& r : rep.rows) {
    grid[0].push_back(std::string(to_string(r.topology)));
    const auto cells = detail::aspect_cells(r);
    for (std::size_t i = 0; i < cells.size(); ++i) grid[i + 1].push_back(cells[i]);
  }
  std::vector<std::size_t> width(grid[0].size(), 0);
  for (const auto& row : grid)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::ostringstream os;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      os << std::left << std::setw(static_cast<int>(width[c])) << grid[r][c];
      if (c + 1 < grid[r].size()) os << " | ";
    }
    os << '\n';
    if (r == 0) {
      for (std::size_t c = 0; c < width.size(); ++c) os << std::string(width[c], '-') << (c + 1 < width.size() ? "-+-" : "");
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace fedspectrum

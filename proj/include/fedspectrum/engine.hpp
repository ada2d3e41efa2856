#pragma once

// Slot-driven simulation loop, detection evaluation and topology comparison.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedspectrum/error.hpp"
#include "fedspectrum/federation.hpp"
#include "fedspectrum/radio_env.hpp"
#include "fedspectrum/rng.hpp"
#include "fedspectrum/scenario.hpp"
#include "fedspectrum/sensing.hpp"

namespace fedspectrum {

/// Confusion counts and derived rates. A rate whose denominator is zero is
/// left empty instead of being reported as 0.
struct DetectionMetrics {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::optional<double> pd;
  std::optional<double> pfa;
  double accuracy = 0.0;

  void record(bool predicted, bool truth) {
    if (truth) {
      (predicted ? tp : fn) += 1;
    } else {
      (predicted ? fp : tn) += 1;
    }
  }

  std::int64_t total() const { return tp + fp + tn + fn; }

  /// Recomputes the rates from the counts.
  DetectionMetrics& finalize() {
    pd = tp + fn > 0 ? std::optional(static_cast<double>(tp) / static_cast<double>(tp + fn)) : std::nullopt;
    pfa = fp + tn > 0 ? std::optional(static_cast<double>(fp) / static_cast<double>(fp + tn)) : std::nullopt;
    accuracy = total() > 0 ? static_cast<double>(tp + tn) / static_cast<double>(total()) : 0.0;
    return *this;
  }

  DetectionMetrics& operator+=(const DetectionMetrics& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return finalize();
  }

  friend bool operator==(const DetectionMetrics&, const DetectionMetrics&) = default;
};

struct Decision {
  bool predicted = false;
  bool truth = false;
};

inline DetectionMetrics evaluate_detection(std::span<const Decision> decisions) {
  if (decisions.empty()) throw EmptyInput("no decisions to evaluate");
  DetectionMetrics m;
  for (const auto& d : decisions) m.record(d.predicted, d.truth);
  return m.finalize();
}

struct RocPoint {
  double threshold = 0.0;
  std::optional<double> pd;
  std::optional<double> pfa;
};

/// Thresholds evenly spaced over [0, 1] inclusive; occupied iff p >= threshold.
inline std::vector<RocPoint> roc_sweep(const ModelParams& model, std::span<const Observation> eval_set,
                                       int n_points) {
  if (eval_set.empty()) throw EmptyInput("ROC sweep needs a nonempty evaluation set");
  if (n_points < 2) throw EmptyInput("ROC sweep needs at least two points");
  std::vector<double> probs;
  probs.reserve(eval_set.size());
  for (const auto& o : eval_set) probs.push_back(predict(model, o.features));

  std::vector<RocPoint> out;
  for (int k = 0; k < n_points; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n_points - 1);
    DetectionMetrics m;
    for (std::size_t i = 0; i < probs.size(); ++i) m.record(probs[i] >= t, eval_set[i].truth_occupied);
    m.finalize();
    out.push_back({t, m.pd, m.pfa});
  }
  return out;
}

struct NodeResult {
  int node_id = 0;
  DetectionMetrics metrics;
  NodeTraffic traffic;
  std::int64_t train_macs = 0;
  std::int64_t aggregation_macs = 0;

  friend bool operator==(const NodeResult&, const NodeResult&) = default;
};

struct RunResult {
  std::string scenario_digest;
  std::uint64_t seed = 0;
  Topology topology = Topology::isolated;
  ModelKind model_kind = ModelKind::logistic;
  int central_id = 0;

  std::vector<NodeResult> nodes;
  DetectionMetrics global;
  TrafficStats traffic;
  std::int64_t federation_rounds = 0;

  /// Per-model figures plus train MACs summed over all nodes.
  CostReport cost_totals;
  std::int64_t central_aggregation_macs = 0;
  std::int64_t max_node_aggregation_macs = 0;

  // Geometry of the deployment.
  double mean_degree = 0.0;
  std::size_t max_degree = 0;
  std::size_t graph_components = 0;
  std::size_t nodes_without_neighbors = 0;
  double max_distance_to_central_m = 0.0;

  std::vector<ModelParams> trained_models;  // as frozen after the training phase
  std::vector<ModelParams> final_models;    // after the evaluation phase
  double wall_seconds = 0.0;                // informational, not reproducible
};

/// Test hooks for symmetry checks.
struct RunOptions {
  /// Every sensor receives sensor 0's observation stream, initial model and
  /// shuffle order.
  bool replicate_first_sensor = false;
};

/// Runs one simulation.
///
/// Training phase, per slot: step every PU chain, synthesize one observation
/// per sensor into its buffer; every local_train_period_slots each sensor
/// trains on its buffer and clears it; every federation_period_slots the
/// topology's exchange runs (after training in the same slot). Observations
/// left in a buffer when the phase ends are discarded. Evaluation phase: the
/// models are frozen and every sensor classifies one observation per slot.
inline RunResult run_simulation(const Scenario& s, Topology topology, std::uint64_t seed, const RunOptions& opts = {}) {
  require_valid(s);
  const auto started = std::chrono::steady_clock::now();

  auto placement_rng = Rng::derived(seed, "placement");
  const NodeLayout layout = place_nodes(s, placement_rng);
  const auto n = static_cast<std::size_t>(s.n_sensors);
  const int central_id = layout.central.node_id;

  std::vector<int> sensor_ids;
  for (const auto& p : layout.sensors) sensor_ids.push_back(p.node_id);

  auto stream_index = [&](std::size_t i) -> std::uint64_t { return opts.replicate_first_sensor ? 0 : i; };

  auto traffic_rng = Rng::derived(seed, "pu_traffic");
  std::vector<PrimaryUser> pus;
  for (const auto& p : layout.primary_users)
    pus.push_back({p, pu_stationary_state(p.node_id, s.pu_traffic, traffic_rng)});

  std::vector<Rng> obs_rng, shuffle_rng;
  std::vector<ModelParams> models;
  for (std::size_t i = 0; i < n; ++i) {
    obs_rng.push_back(Rng::derived(seed, "observation", stream_index(i)));
    shuffle_rng.push_back(Rng::derived(seed, "shuffle", stream_index(i)));
    auto init_rng = Rng::derived(seed, "init", stream_index(i));
    models.push_back(init_model(s.training.model, s.training, init_rng));
  }

  const NeighborGraph graph = build_neighbor_graph(layout.sensors, s.federation.neighbor_radius_m);

  RunResult result;
  result.scenario_digest = scenario_digest(s);
  result.seed = seed;
  result.topology = topology;
  result.model_kind = s.training.model;
  result.central_id = central_id;
  result.cost_totals = model_cost(s.training.model);
  result.mean_degree = graph.mean_degree();
  result.max_degree = graph.max_degree();
  result.graph_components = graph.component_count();
  result.nodes_without_neighbors =
      static_cast<std::size_t>(std::count_if(graph.adjacency.begin(), graph.adjacency.end(), [](const auto& a) { return a.empty(); }));
  for (const auto& p : layout.sensors)
    result.max_distance_to_central_m = std::max(result.max_distance_to_central_m, distance_m(p, layout.central));

  result.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.nodes[i].node_id = sensor_ids[i];
  const auto params = static_cast<std::int64_t>(param_count(s.training.model));

  auto observe = [&](std::int64_t slot, std::vector<Observation>& out) {
    for (auto& pu : pus) pu.state = pu_activity_step(pu.state, s.pu_traffic, traffic_rng);
    out.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (opts.replicate_first_sensor && i > 0) {
        Observation copy = out.front();
        copy.node_id = sensor_ids[i];
        out.push_back(copy);
        continue;
      }
      out.push_back(synthesize_observation(layout.sensors[i], pus, s.channel, s.pu_traffic,
                                           s.schedule.window_samples, slot, obs_rng[i]));
    }
  };

  std::vector<std::vector<Observation>> buffers(n);
  std::vector<Observation> slot_obs;
  int round = 0;
  for (std::int64_t slot = 0; slot < s.schedule.n_training_slots; ++slot) {
    observe(slot, slot_obs);
    for (std::size_t i = 0; i < n; ++i) buffers[i].push_back(slot_obs[i]);

    if ((slot + 1) % s.schedule.local_train_period_slots == 0) {
      for (std::size_t i = 0; i < n; ++i) {
        if (buffers[i].empty()) continue;
        auto trained = train_local(std::move(models[i]), buffers[i], s.training, shuffle_rng[i]);
        models[i] = std::move(trained.model);
        result.nodes[i].train_macs += trained.cost_delta.train_macs_accumulated;
        buffers[i].clear();
      }
    }

    if (topology != Topology::isolated && (slot + 1) % s.schedule.federation_period_slots == 0) {
      if (topology == Topology::gossip) {
        auto out = gossip_round(models, graph, s.federation, round);
        models = std::move(out.states);
        result.traffic += traffic_of_round(out.messages, std::nullopt);
        for (std::size_t i = 0; i < n; ++i)
          result.nodes[i].aggregation_macs += static_cast<std::int64_t>(graph.degree(i)) * params;
      } else {
        auto out = central_round(models, sensor_ids, central_id, round);
        models = std::move(out.states);
        result.traffic += out.traffic;
        result.central_aggregation_macs += static_cast<std::int64_t>(n) * params;
      }
      ++round;
    }
  }
  result.federation_rounds = round;
  result.trained_models = models;

  const std::vector<ModelParams>& frozen = models;
  for (std::int64_t k = 0; k < s.schedule.n_eval_slots; ++k) {
    observe(s.schedule.n_training_slots + k, slot_obs);
    for (std::size_t i = 0; i < n; ++i)
      result.nodes[i].metrics.record(decide(frozen[i], slot_obs[i].features), slot_obs[i].truth_occupied);
  }

  for (auto& node : result.nodes) {
    node.metrics.finalize();
    node.traffic = result.traffic.of(node.node_id);
    result.global += node.metrics;
    result.cost_totals.train_macs_accumulated += node.train_macs;
    result.max_node_aggregation_macs = std::max(result.max_node_aggregation_macs, node.aggregation_macs);
  }
  result.global.finalize();
  result.final_models = frozen;
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

/// One Tab.-1-style row per topology, averaged over seeds.
struct TopologyRow {
  Topology topology = Topology::isolated;
  bool needs_neighbor_comm = false;
  double busiest_node_bytes = 0.0;
  double total_bytes = 0.0;
  double central_bytes = 0.0;
  double aggregation_macs_central = 0.0;
  double max_node_aggregation_macs = 0.0;
  double mean_accuracy = 0.0;
  std::optional<double> mean_pd;
  std::optional<double> mean_pfa;
  int pd_undefined_runs = 0;
  int pfa_undefined_runs = 0;
  double train_macs_per_node = 0.0;
  std::int64_t model_bytes = 0;
  std::int64_t macs_per_inference = 0;
  double mean_degree = 0.0;
  std::size_t max_degree = 0;
  std::size_t graph_components = 0;
  std::size_t nodes_without_neighbors = 0;
  double max_distance_to_central_m = 0.0;
};

struct ComparisonReport {
  std::string scenario_digest;
  std::vector<std::uint64_t> seeds;
  int n_sensors = 0;
  std::vector<TopologyRow> rows;  // isolated, gossip, central

  const TopologyRow& row(Topology t) const {
    return *std::find_if(rows.begin(), rows.end(), [t](const auto& r) { return r.topology == t; });
  }
};

struct Comparison {
  ComparisonReport report;
  std::vector<RunResult> runs;  // topology-major, then seed order
};

inline constexpr Topology kAllTopologies[] = {Topology::isolated, Topology::gossip, Topology::central};

/// Means of per-run figures; undefined rates are skipped and counted.
inline TopologyRow summarize_topology(Topology t, std::span<const RunResult> runs) {
  TopologyRow row;
  row.topology = t;
  row.needs_neighbor_comm = t == Topology::gossip;
  const double k = static_cast<double>(runs.size());
  double pd_sum = 0.0, pfa_sum = 0.0;
  for (const auto& r : runs) {
    row.busiest_node_bytes += static_cast<double>(r.traffic.busiest_node_bytes(r.central_id)) / k;
    row.total_bytes += static_cast<double>(r.traffic.total_bytes) / k;
    row.central_bytes += static_cast<double>(r.traffic.central_bytes) / k;
    row.aggregation_macs_central += static_cast<double>(r.central_aggregation_macs) / k;
    row.max_node_aggregation_macs += static_cast<double>(r.max_node_aggregation_macs) / k;
    row.mean_accuracy += r.global.accuracy / k;
    row.train_macs_per_node +=
        static_cast<double>(r.cost_totals.train_macs_accumulated) / static_cast<double>(r.nodes.size()) / k;
    if (r.global.pd) pd_sum += *r.global.pd; else ++row.pd_undefined_runs;
    if (r.global.pfa) pfa_sum += *r.global.pfa; else ++row.pfa_undefined_runs;
  }
  const int pd_n = static_cast<int>(runs.size()) - row.pd_undefined_runs;
  const int pfa_n = static_cast<int>(runs.size()) - row.pfa_undefined_runs;
  if (pd_n > 0) row.mean_pd = pd_sum / pd_n;
  if (pfa_n > 0) row.mean_pfa = pfa_sum / pfa_n;
  if (!runs.empty()) {
    const auto& r0 = runs.front();
    row.model_bytes = r0.cost_totals.model_bytes;
    row.macs_per_inference = r0.cost_totals.macs_per_inference;
    row.mean_degree = r0.mean_degree;
    row.max_degree = r0.max_degree;
    row.graph_components = r0.graph_components;
    row.nodes_without_neighbors = r0.nodes_without_neighbors;
    row.max_distance_to_central_m = r0.max_distance_to_central_m;
  }
  return row;
}

/// Runs isolated, gossip and central for every seed (in parallel when
/// `parallel`) and averages across seeds. Results are assembled in a fixed
/// order, so the report does not depend on scheduling.
inline Comparison compare_topologies(const Scenario& s, std::span<const std::uint64_t> seeds, bool parallel = true) {
  if (seeds.empty()) throw EmptyInput("compare needs at least one seed");
  require_valid(s);

  std::vector<std::pair<Topology, std::uint64_t>> jobs;
  for (Topology t : kAllTopologies)
    for (auto seed : seeds) jobs.emplace_back(t, seed);

  Comparison out;
  if (parallel) {
    std::vector<std::future<RunResult>> futures;
    for (const auto& [t, seed] : jobs)
      futures.push_back(std::async(std::launch::async, [&s, t = t, seed = seed] { return run_simulation(s, t, seed); }));
    for (auto& f : futures) out.runs.push_back(f.get());
  } else {
    for (const auto& [t, seed] : jobs) out.runs.push_back(run_simulation(s, t, seed));
  }

  out.report.scenario_digest = scenario_digest(s);
  out.report.seeds.assign(seeds.begin(), seeds.end());
  out.report.n_sensors = s.n_sensors;
  for (std::size_t ti = 0; ti < std::size(kAllTopologies); ++ti) {
    std::span<const RunResult> slice(out.runs.data() + ti * seeds.size(), seeds.size());
    out.report.rows.push_back(summarize_topology(kAllTopologies[ti], slice));
  }
  return out;
}

}  // namespace fedspectrum

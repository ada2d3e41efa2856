#pragma once

// Model exchange protocols and byte-exact traffic accounting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fedspectrum/error.hpp"
#include "fedspectrum/placement.hpp"
#include "fedspectrum/sensing.hpp"

namespace fedspectrum {

enum class Topology { isolated, gossip, central };
enum class Weighting { uniform, samples, inverse_distance };

constexpr std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::isolated: return "isolated";
    case Topology::gossip: return "gossip";
    case Topology::central: return "central";
  }
  return "?";
}

constexpr std::string_view to_string(Weighting w) {
  switch (w) {
    case Weighting::uniform: return "uniform";
    case Weighting::samples: return "samples";
    case Weighting::inverse_distance: return "inverse_distance";
  }
  return "?";
}

inline std::optional<Topology> parse_topology(std::string_view s) {
  if (s == "isolated") return Topology::isolated;
  if (s == "gossip") return Topology::gossip;
  if (s == "central") return Topology::central;
  return std::nullopt;
}

inline std::optional<Weighting> parse_weighting(std::string_view s) {
  if (s == "uniform") return Weighting::uniform;
  if (s == "samples") return Weighting::samples;
  if (s == "inverse_distance") return Weighting::inverse_distance;
  return std::nullopt;
}

struct FederationConfig {
  Topology topology = Topology::gossip;
  double neighbor_radius_m = 260.0;
  Weighting weighting = Weighting::uniform;
  bool include_self_weight = true;
};

inline void validate(const FederationConfig& fc, std::vector<Violation>& out) {
  if (!(fc.neighbor_radius_m >= 0.0)) out.push_back({"federation.neighbor_radius_m", "must be >= 0"});
}

/// Undirected radius graph over sensors. Row i belongs to node_ids[i]; neighbor
/// lists hold node ids in ascending order with the matching distances.
struct NeighborGraph {
  std::vector<int> node_ids;
  std::vector<std::vector<int>> adjacency;
  std::vector<std::vector<double>> distances;

  std::size_t degree(std::size_t row) const { return adjacency[row].size(); }

  std::size_t degree_sum() const {
    std::size_t s = 0;
    for (const auto& a : adjacency) s += a.size();
    return s;
  }

  std::size_t max_degree() const {
    std::size_t m = 0;
    for (const auto& a : adjacency) m = std::max(m, a.size());
    return m;
  }

  double mean_degree() const {
    return node_ids.empty() ? 0.0 : static_cast<double>(degree_sum()) / static_cast<double>(node_ids.size());
  }

  std::size_t row_of(int node_id) const {
    return static_cast<std::size_t>(std::find(node_ids.begin(), node_ids.end(), node_id) - node_ids.begin());
  }

  /// Number of connected components (isolated nodes count as one each).
  std::size_t component_count() const {
    std::vector<int> seen(node_ids.size(), 0);
    std::size_t comps = 0;
    for (std::size_t s = 0; s < node_ids.size(); ++s) {
      if (seen[s]) continue;
      ++comps;
      std::vector<std::size_t> stack{s};
      seen[s] = 1;
      while (!stack.empty()) {
        const auto r = stack.back();
        stack.pop_back();
        for (int nb : adjacency[r]) {
          const auto c = row_of(nb);
          if (!seen[c]) {
            seen[c] = 1;
            stack.push_back(c);
          }
        }
      }
    }
    return comps;
  }
};

/// Edge (i, j) iff i != j and their distance is at most `radius_m`.
inline NeighborGraph build_neighbor_graph(std::span<const Placement> sensors, double radius_m) {
  std::vector<std::size_t> order(sensors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return sensors[a].node_id < sensors[b].node_id; });

  NeighborGraph g;
  g.adjacency.resize(sensors.size());
  g.distances.resize(sensors.size());
  for (std::size_t row = 0; row < order.size(); ++row) {
    const auto& self = sensors[order[row]];
    g.node_ids.push_back(self.node_id);
    for (std::size_t col = 0; col < order.size(); ++col) {
      if (col == row) continue;
      const double d = distance_m(self, sensors[order[col]]);
      if (d <= radius_m) {
        g.adjacency[row].push_back(sensors[order[col]].node_id);
        g.distances[row].push_back(d);
      }
    }
  }
  return g;
}

struct ReceivedModel {
  const ModelParams* model = nullptr;
  double distance_m = 0.0;
};

/// Convex combination of `own` and the received models.
///
/// Unnormalized weights: uniform gives 1 each; samples gives max(n_train_samples, 1);
/// inverse_distance gives 1 to `own` and 1/distance to each received model.
/// Without self weight, `own` contributes nothing (unless nothing was received).
/// The result's sample count is the maximum over contributors.
inline ModelParams merge_models(const ModelParams& own, std::span<const ReceivedModel> received,
                                const FederationConfig& cfg) {
  if (received.empty()) return own;
  for (const auto& r : received) {
    if (r.model->kind != own.kind || r.model->theta.size() != own.theta.size()) throw KindMismatch();
    if (cfg.weighting == Weighting::inverse_distance && !(r.distance_m > 0.0)) throw NonpositiveDistance(r.distance_m);
  }

  auto weight_of = [&](const ModelParams& m, std::optional<double> distance) {
    switch (cfg.weighting) {
      case Weighting::uniform: return 1.0;
      case Weighting::samples: return static_cast<double>(std::max<std::uint64_t>(m.n_train_samples, 1));
      case Weighting::inverse_distance: return distance ? 1.0 / *distance : 1.0;
    }
    return 1.0;
  };

  std::vector<std::pair<const ModelParams*, double>> parts;
  if (cfg.include_self_weight) parts.emplace_back(&own, weight_of(own, std::nullopt));
  for (const auto& r : received) parts.emplace_back(r.model, weight_of(*r.model, r.distance_m));

  double total = 0.0;
  for (const auto& [m, w] : parts) total += w;

  ModelParams out{own.kind, std::vector<double>(own.theta.size(), 0.0), 0};
  for (const auto& [m, w] : parts) {
    const double alpha = w / total;
    for (std::size_t i = 0; i < out.theta.size(); ++i) out.theta[i] += alpha * m->theta[i];
    out.n_train_samples = std::max(out.n_train_samples, m->n_train_samples);
  }
  if (!cfg.include_self_weight) out.n_train_samples = std::max(out.n_train_samples, own.n_train_samples);
  return out;
}

inline constexpr std::int64_t kMessageHeaderBytes = 16;  // sender 4, round 4, n_train_samples 8

inline std::int64_t payload_bytes(ModelKind kind) {
  return kMessageHeaderBytes + 8 * static_cast<std::int64_t>(param_count(kind));
}

struct FederationMessage {
  int sender_id = 0;
  int receiver_id = 0;
  int round = 0;
  std::int64_t payload_bytes = 0;

  friend bool operator==(const FederationMessage&, const FederationMessage&) = default;
};

struct NodeTraffic {
  std::int64_t tx_bytes = 0;
  std::int64_t rx_bytes = 0;

  std::int64_t total() const { return tx_bytes + rx_bytes; }
  friend bool operator==(const NodeTraffic&, const NodeTraffic&) = default;
};

struct TrafficStats {
  std::map<int, NodeTraffic> per_node;
  std::int64_t central_bytes = 0;
  std::int64_t total_bytes = 0;
  std::int64_t messages = 0;

  TrafficStats& operator+=(const TrafficStats& o) {
    for (const auto& [id, t] : o.per_node) {
      per_node[id].tx_bytes += t.tx_bytes;
      per_node[id].rx_bytes += t.rx_bytes;
    }
    central_bytes += o.central_bytes;
    total_bytes += o.total_bytes;
    messages += o.messages;
    return *this;
  }

  NodeTraffic of(int node_id) const {
    auto it = per_node.find(node_id);
    return it == per_node.end() ? NodeTraffic{} : it->second;
  }

  /// Largest tx+rx over all nodes except `excluded` (typically the central node).
  std::int64_t busiest_node_bytes(std::optional<int> excluded = std::nullopt) const {
    std::int64_t best = 0;
    for (const auto& [id, t] : per_node)
      if (id != excluded) best = std::max(best, t.total());
    return best;
  }

  friend bool operator==(const TrafficStats&, const TrafficStats&) = default;
};

inline TrafficStats traffic_of_round(std::span<const FederationMessage> messages, std::optional<int> central_id) {
  TrafficStats s;
  for (const auto& m : messages) {
    s.per_node[m.sender_id].tx_bytes += m.payload_bytes;
    s.per_node[m.receiver_id].rx_bytes += m.payload_bytes;
    s.total_bytes += m.payload_bytes;
    ++s.messages;
  }
  if (central_id) s.central_bytes = s.of(*central_id).total();
  return s;
}

struct GossipOutcome {
  std::vector<ModelParams> states;
  std::vector<FederationMessage> messages;
};

/// One synchronous gossip round: each node sends its model to every neighbor
/// and merges what it received. All merges read the pre-round snapshot, and
/// every sample counter is reset afterwards. `states` is indexed like the
/// graph rows.
inline GossipOutcome gossip_round(std::span<const ModelParams> states, const NeighborGraph& graph,
                                  const FederationConfig& cfg, int round) {
  GossipOutcome out;
  out.states.reserve(states.size());
  for (std::size_t row = 0; row < graph.node_ids.size(); ++row) {
    const auto& nbrs = graph.adjacency[row];
    std::vector<ReceivedModel> received;
    received.reserve(nbrs.size());
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      received.push_back({&states[graph.row_of(nbrs[k])], graph.distances[row][k]});
      out.messages.push_back({graph.node_ids[row], nbrs[k], round, payload_bytes(states[row].kind)});
    }
    out.states.push_back(merge_models(states[row], received, cfg));
    out.states.back().n_train_samples = 0;
  }
  std::sort(out.messages.begin(), out.messages.end(), [](const auto& a, const auto& b) {
    return std::pair(a.sender_id, a.receiver_id) < std::pair(b.sender_id, b.receiver_id);
  });
  return out;
}

/// Sample-count weighted average (FedAvg). Counts are floored at 1; the
/// result carries the total count.
inline ModelParams fedavg_aggregate(std::span<const ModelParams> updates) {
  if (updates.empty()) throw EmptyUpdates();
  const auto& first = updates.front();
  std::uint64_t n = 0;
  for (const auto& u : updates) {
    if (u.kind != first.kind || u.theta.size() != first.theta.size()) throw KindMismatch();
    n += std::max<std::uint64_t>(u.n_train_samples, 1);
  }
  if (updates.size() == 1) return {first.kind, first.theta, n};

  ModelParams global{first.kind, std::vector<double>(first.theta.size(), 0.0), n};
  for (const auto& u : updates) {
    const double alpha = static_cast<double>(std::max<std::uint64_t>(u.n_train_samples, 1)) / static_cast<double>(n);
    for (std::size_t i = 0; i < global.theta.size(); ++i) global.theta[i] += alpha * u.theta[i];
  }
  return global;
}

struct CentralOutcome {
  std::vector<ModelParams> states;
  ModelParams global;
  std::vector<FederationMessage> messages;
  TrafficStats traffic;
};

/// Collect every node's model at the central node, aggregate with FedAvg and
/// send the same global model back to every node (full participation).
inline CentralOutcome central_round(std::span<const ModelParams> states, std::span<const int> node_ids,
                                    int central_id, int round) {
  CentralOutcome out;
  out.global = fedavg_aggregate(states);
  const auto bytes = payload_bytes(out.global.kind);
  for (int id : node_ids) out.messages.push_back({id, central_id, round, bytes});
  for (int id : node_ids) out.messages.push_back({central_id, id, round, bytes});
  std::sort(out.messages.begin(), out.messages.end(), [](const auto& a, const auto& b) {
    return std::pair(a.sender_id, a.receiver_id) < std::pair(b.sender_id, b.receiver_id);
  });

  ModelParams local = out.global;
  local.n_train_samples = 0;
  out.states.assign(states.size(), local);
  out.traffic = traffic_of_round(out.messages, central_id);
  return out;
}

}  // namespace fedspectrum

#pragma once

// Reference dataset files: one sensor's labeled observation stream as CSV.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fedspectrum/error.hpp"
#include "fedspectrum/radio_env.hpp"
#include "fedspectrum/scenario.hpp"

namespace fedspectrum {

inline constexpr const char* kDatasetHeader = "slot,f1,f2,f3,label";

struct DatasetSummary {
  std::int64_t rows_written = 0;
  double positive_fraction = 0.0;
};

/// Writes `n_slots` observations of sensor `sensor_id`, stepping primary-user
/// activity once per slot. Geometry comes from the scenario seed; activity and
/// observations are drawn from `rng`.
inline DatasetSummary generate_dataset(const Scenario& s, int sensor_id, std::int64_t n_slots, Rng& rng,
                                       const std::filesystem::path& path) {
  require_valid(s);
  auto placement_rng = Rng::derived(s.seed, "placement");
  const NodeLayout layout = place_nodes(s, placement_rng);
  if (sensor_id < 0 || sensor_id >= static_cast<int>(layout.sensors.size())) throw UnknownSensor(sensor_id);
  const Placement& sensor = layout.sensors[static_cast<std::size_t>(sensor_id)];

  std::vector<PrimaryUser> pus;
  for (const auto& p : layout.primary_users) pus.push_back({p, pu_stationary_state(p.node_id, s.pu_traffic, rng)});

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << kDatasetHeader << '\n';

  DatasetSummary summary;
  std::int64_t positives = 0;
  for (std::int64_t slot = 0; slot < n_slots; ++slot) {
    for (auto& pu : pus) pu.state = pu_activity_step(pu.state, s.pu_traffic, rng);
    const Observation o =
        synthesize_observation(sensor, pus, s.channel, s.pu_traffic, s.schedule.window_samples, slot, rng);
    out << slot << ',' << format_double(o.features[0]) << ',' << format_double(o.features[1]) << ','
        << format_double(o.features[2]) << ',' << (o.truth_occupied ? 1 : 0) << '\n';
    positives += o.truth_occupied ? 1 : 0;
    ++summary.rows_written;
  }
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
  summary.positive_fraction =
      n_slots > 0 ? static_cast<double>(positives) / static_cast<double>(n_slots) : 0.0;
  return summary;
}

/// Reads a file written by generate_dataset back into observations.
inline std::vector<Observation> read_dataset(const std::filesystem::path& path, int node_id = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound(path.string());
  std::string line;
  if (!std::getline(in, line) || line != kDatasetHeader) throw IoError("bad dataset header in '" + path.string() + "'");
  std::vector<Observation> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Observation o;
    o.node_id = node_id;
    int label = 0;
    long long slot = 0;
    if (std::sscanf(line.c_str(), "%lld,%lf,%lf,%lf,%d", &slot, &o.features[0], &o.features[1], &o.features[2],
                    &label) != 5 ||
        (label != 0 && label != 1))
      throw IoError("malformed dataset row: " + line);
    o.slot = slot;
    o.truth_occupied = label == 1;
    rows.push_back(o);
  }
  return rows;
}

}  // namespace fedspectrum

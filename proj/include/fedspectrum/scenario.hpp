#pragma once

// Experiment description: loading, strict-schema parsing, validation and
// node placement.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedspectrum/error.hpp"
#include "fedspectrum/federation.hpp"
#include "fedspectrum/placement.hpp"
#include "fedspectrum/radio_env.hpp"
#include "fedspectrum/rng.hpp"
#include "fedspectrum/sensing.hpp"

namespace fedspectrum {

enum class SensorLayout { grid, uniform_random };

constexpr std::string_view to_string(SensorLayout l) { return l == SensorLayout::grid ? "grid" : "uniform_random"; }

struct SlotSchedule {
  std::int64_t n_training_slots = 2000;
  std::int64_t n_eval_slots = 2000;
  std::int64_t local_train_period_slots = 50;
  std::int64_t federation_period_slots = 50;
  int window_samples = 64;
};

struct Scenario {
  std::uint64_t seed = 1;
  double area_size_m = 1000.0;
  int n_sensors = 14;
  int n_primary_users = 3;
  SensorLayout sensor_placement = SensorLayout::grid;
  std::array<double, 2> carrier_band_mhz{3550.0, 3700.0};
  std::optional<std::array<double, 2>> central_xy_m;
  ChannelModel channel;
  PuTrafficModel pu_traffic;
  TrainingConfig training;
  FederationConfig federation;
  SlotSchedule schedule;
};

inline std::vector<Violation> validate_scenario(const Scenario& s) {
  std::vector<Violation> v;
  if (!(s.area_size_m > 0.0) || !std::isfinite(s.area_size_m)) v.push_back({"area_size_m", "must be > 0"});
  if (s.n_sensors < 1) v.push_back({"n_sensors", "must be >= 1"});
  if (s.n_primary_users < 0) v.push_back({"n_primary_users", "must be >= 0"});
  if (!(s.carrier_band_mhz[0] < s.carrier_band_mhz[1])) v.push_back({"carrier_band_mhz", "low must be < high"});
  if (s.central_xy_m) {
    for (double c : *s.central_xy_m)
      if (!(c >= 0.0 && c <= s.area_size_m)) v.push_back({"central_xy_m", "must lie inside the area"});
  }
  validate(s.channel, v);
  validate(s.pu_traffic, v);
  validate(s.training, v);
  validate(s.federation, v);

  const auto& sc = s.schedule;
  if (sc.n_training_slots < 0) v.push_back({"schedule.n_training_slots", "must be >= 0"});
  if (sc.n_eval_slots < 1) v.push_back({"schedule.n_eval_slots", "must be >= 1"});
  if (sc.local_train_period_slots < 1) v.push_back({"schedule.local_train_period_slots", "must be >= 1"});
  if (sc.federation_period_slots < 1) v.push_back({"schedule.federation_period_slots", "must be >= 1"});
  if (sc.window_samples < 2) v.push_back({"schedule.window_samples", "must be >= 2"});
  return v;
}

inline void require_valid(const Scenario& s) {
  const auto violations = validate_scenario(s);
  if (violations.empty()) return;
  std::string msg = "invalid scenario:";
  for (const auto& v : violations) msg += "\n  " + v.describe();
  throw ValidationError(violations.front().field, msg);
}

namespace detail {

using nlohmann::json;

class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) throw SchemaError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* j = find(key);
    if (!j) throw SchemaError(path(key), "required key is missing");
    return *j;
  }

  void number(const std::string& key, double& out) {
    if (const json* j = find(key)) out = as_number(*j, path(key));
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const json* j = find(key)) out = as_integer<Int>(*j, path(key));
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* j = find(key)) {
      if (!j->is_boolean()) throw SchemaError(path(key), "expected a boolean");
      out = j->get<bool>();
    }
  }

  template <typename Enum, typename Parse>
  void tag(const std::string& key, Enum& out, Parse parse) {
    if (const json* j = find(key)) {
      if (!j->is_string()) throw SchemaError(path(key), "expected a string");
      auto parsed = parse(j->get<std::string>());
      if (!parsed) throw SchemaError(path(key), "unknown value '" + j->get<std::string>() + "'");
      out = *parsed;
    }
  }

  void pair(const std::string& key, std::array<double, 2>& out) {
    if (const json* j = find(key)) out = as_pair(*j, path(key));
  }

  /// Rejects any key that was never looked up.
  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw SchemaError(path(it.key()), "unknown key");
  }

  static double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw SchemaError(where, "expected a number");
    return j.get<double>();
  }

  template <typename Int>
  static Int as_integer(const json& j, const std::string& where) {
    if (j.is_number_unsigned()) return static_cast<Int>(j.get<std::uint64_t>());
    if (j.is_number_integer()) {
      const auto v = j.get<std::int64_t>();
      if constexpr (std::is_unsigned_v<Int>) {
        if (v < 0) throw SchemaError(where, "expected a nonnegative integer");
      }
      return static_cast<Int>(v);
    }
    throw SchemaError(where, "expected an integer");
  }

  static std::array<double, 2> as_pair(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) throw SchemaError(where, "expected an array of two numbers");
    return {as_number(j[0], where + "[0]"), as_number(j[1], where + "[1]")};
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

/// Builds a scenario from a parsed JSON document. Keys other than seed,
/// n_sensors and n_primary_users are optional; unknown keys are rejected.
/// Does not validate invariants.
inline Scenario scenario_from_json(const nlohmann::json& doc) {
  using detail::ObjectReader;
  Scenario s;
  ObjectReader root(doc, "");
  s.seed = ObjectReader::as_integer<std::uint64_t>(root.require("seed"), "seed");
  s.n_sensors = ObjectReader::as_integer<int>(root.require("n_sensors"), "n_sensors");
  s.n_primary_users = ObjectReader::as_integer<int>(root.require("n_primary_users"), "n_primary_users");
  root.number("area_size_m", s.area_size_m);
  root.tag("sensor_placement", s.sensor_placement, [](const std::string& v) -> std::optional<SensorLayout> {
    if (v == "grid") return SensorLayout::grid;
    if (v == "uniform_random") return SensorLayout::uniform_random;
    return std::nullopt;
  });
  root.pair("carrier_band_mhz", s.carrier_band_mhz);
  if (const auto* c = root.find("central_xy_m")) s.central_xy_m = ObjectReader::as_pair(*c, "central_xy_m");

  if (const auto* j = root.find("channel")) {
    ObjectReader r(*j, "channel");
    r.number("pl0_db", s.channel.pl0_db);
    r.number("d0_m", s.channel.d0_m);
    r.number("n_exp", s.channel.n_exp);
    r.number("shadowing_sigma_db", s.channel.shadowing_sigma_db);
    r.number("noise_floor_dbm", s.channel.noise_floor_dbm);
    r.finish();
  }
  if (const auto* j = root.find("pu_traffic")) {
    ObjectReader r(*j, "pu_traffic");
    r.number("tx_power_dbm", s.pu_traffic.tx_power_dbm);
    r.number("mean_burst_slots", s.pu_traffic.mean_burst_slots);
    r.number("mean_gap_slots", s.pu_traffic.mean_gap_slots);
    r.finish();
  }
  if (const auto* j = root.find("training")) {
    ObjectReader r(*j, "training");
    r.tag("model", s.training.model, parse_model_kind);
    r.number("learning_rate", s.training.learning_rate);
    r.integer("epochs_per_round", s.training.epochs_per_round);
    r.integer("batch_size", s.training.batch_size);
    r.number("init_scale", s.training.init_scale);
    r.finish();
  }
  if (const auto* j = root.find("federation")) {
    ObjectReader r(*j, "federation");
    r.tag("topology", s.federation.topology, parse_topology);
    r.number("neighbor_radius_m", s.federation.neighbor_radius_m);
    r.tag("weighting", s.federation.weighting, parse_weighting);
    r.boolean("include_self_weight", s.federation.include_self_weight);
    r.finish();
  }
  if (const auto* j = root.find("schedule")) {
    ObjectReader r(*j, "schedule");
    r.integer("n_training_slots", s.schedule.n_training_slots);
    r.integer("n_eval_slots", s.schedule.n_eval_slots);
    r.integer("local_train_period_slots", s.schedule.local_train_period_slots);
    r.integer("federation_period_slots", s.schedule.federation_period_slots);
    r.integer("window_samples", s.schedule.window_samples);
    r.finish();
  }
  root.finish();
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = detail::line_column(text, offset);
    throw ParseError(e.what(), line, col, offset);
  }
  return scenario_from_json(doc);
}

/// Reads, parses and validates a scenario file.
inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound(path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str());
  require_valid(s);
  return s;
}

/// Full document with every field present; parses back to the same scenario.
inline nlohmann::ordered_json scenario_to_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["seed"] = s.seed;
  j["area_size_m"] = s.area_size_m;
  j["n_sensors"] = s.n_sensors;
  j["n_primary_users"] = s.n_primary_users;
  j["sensor_placement"] = to_string(s.sensor_placement);
  j["carrier_band_mhz"] = {s.carrier_band_mhz[0], s.carrier_band_mhz[1]};
  if (s.central_xy_m) j["central_xy_m"] = {(*s.central_xy_m)[0], (*s.central_xy_m)[1]};
  j["channel"] = {{"pl0_db", s.channel.pl0_db},
                  {"d0_m", s.channel.d0_m},
                  {"n_exp", s.channel.n_exp},
                  {"shadowing_sigma_db", s.channel.shadowing_sigma_db},
                  {"noise_floor_dbm", s.channel.noise_floor_dbm}};
  j["pu_traffic"] = {{"tx_power_dbm", s.pu_traffic.tx_power_dbm},
                     {"mean_burst_slots", s.pu_traffic.mean_burst_slots},
                     {"mean_gap_slots", s.pu_traffic.mean_gap_slots}};
  j["training"] = {{"model", to_string(s.training.model)},
                   {"learning_rate", s.training.learning_rate},
                   {"epochs_per_round", s.training.epochs_per_round},
                   {"batch_size", s.training.batch_size},
                   {"init_scale", s.training.init_scale}};
  j["federation"] = {{"topology", to_string(s.federation.topology)},
                     {"neighbor_radius_m", s.federation.neighbor_radius_m},
                     {"weighting", to_string(s.federation.weighting)},
                     {"include_self_weight", s.federation.include_self_weight}};
  j["schedule"] = {{"n_training_slots", s.schedule.n_training_slots},
                   {"n_eval_slots", s.schedule.n_eval_slots},
                   {"local_train_period_slots", s.schedule.local_train_period_slots},
                   {"federation_period_slots", s.schedule.federation_period_slots},
                   {"window_samples", s.schedule.window_samples}};
  return j;
}

/// Stable 16-hex-digit fingerprint of the canonical scenario document.
inline std::string scenario_digest(const Scenario& s) {
  const auto h = hash_label(scenario_to_json(s).dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Node ids: sensors 0..N-1, primary users N..N+P-1, central node N+P.
struct NodeLayout {
  std::vector<Placement> sensors;
  std::vector<Placement> primary_users;
  Placement central;

  std::vector<Placement> all() const {
    std::vector<Placement> out = sensors;
    out.insert(out.end(), primary_users.begin(), primary_users.end());
    out.push_back(central);
    return out;
  }
};

/// Places sensors (grid: ceil(sqrt(N)) columns with equal margins, row-major;
/// or i.i.d. uniform), primary users i.i.d. uniform, and the central node at
/// the area center unless overridden. Grid mode draws nothing from `rng`.
inline NodeLayout place_nodes(const Scenario& s, Rng& rng) {
  NodeLayout layout;
  const double a = s.area_size_m;
  int next_id = 0;
  if (s.sensor_placement == SensorLayout::grid) {
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(s.n_sensors))));
    const int rows = (s.n_sensors + cols - 1) / cols;
    const double dx = a / cols, dy = a / rows;
    for (int i = 0; i < s.n_sensors; ++i) {
      const int r = i / cols, c = i % cols;
      layout.sensors.push_back({next_id++, NodeKind::sensor, dx * (c + 0.5), dy * (r + 0.5)});
    }
  } else {
    for (int i = 0; i < s.n_sensors; ++i) {
      const double x = rng.uniform(0.0, a);
      const double y = rng.uniform(0.0, a);
      layout.sensors.push_back({next_id++, NodeKind::sensor, x, y});
    }
  }
  for (int i = 0; i < s.n_primary_users; ++i) {
    const double x = rng.uniform(0.0, a);
    const double y = rng.uniform(0.0, a);
    layout.primary_users.push_back({next_id++, NodeKind::primary_user, x, y});
  }
  const auto c = s.central_xy_m.value_or(std::array<double, 2>{a / 2.0, a / 2.0});
  layout.central = {next_id, NodeKind::central, c[0], c[1]};
  return layout;
}

}  // namespace fedspectrum

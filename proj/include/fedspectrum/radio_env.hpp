#pragma once

// Primary-user activity, propagation and per-window energy observations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedspectrum/placement.hpp"
#include "fedspectrum/rng.hpp"

namespace fedspectrum {

/// Field-level invariant violation.
struct Violation {
  std::string field;
  std::string reason;

  std::string describe() const { return field + ": " + reason; }
};

/// Log-distance path loss with optional log-normal shadowing.
struct ChannelModel {
  double pl0_db = 40.0;
  double d0_m = 1.0;
  double n_exp = 3.0;
  double shadowing_sigma_db = 6.0;
  double noise_floor_dbm = -100.0;
};

/// Two-state on/off transmitter. Burst and gap lengths are geometric with the
/// given means (in slots).
struct PuTrafficModel {
  double tx_power_dbm = 20.0;
  double mean_burst_slots = 20.0;
  double mean_gap_slots = 40.0;
};

/// Long bursts and rare gaps, approximating an always-on broadcast transmitter.
inline PuTrafficModel broadcast_tv_preset() { return {.tx_power_dbm = 40.0, .mean_burst_slots = 1000.0, .mean_gap_slots = 10.0}; }

struct PuState {
  int pu_id = 0;
  bool on = false;

  friend bool operator==(const PuState&, const PuState&) = default;
};

struct PrimaryUser {
  Placement where;
  PuState state;
};

/// Standardized [mean power, power std, max power].
using FeatureVector = std::array<double, 3>;

struct Observation {
  int node_id = 0;
  std::int64_t slot = 0;
  FeatureVector features{};
  bool truth_occupied = false;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

inline void validate(const ChannelModel& ch, std::vector<Violation>& out) {
  if (!(ch.d0_m > 0.0)) out.push_back({"channel.d0_m", "must be > 0"});
  if (!(ch.n_exp >= 0.0)) out.push_back({"channel.n_exp", "must be >= 0"});
  if (!(ch.shadowing_sigma_db >= 0.0)) out.push_back({"channel.shadowing_sigma_db", "must be >= 0"});
  if (!std::isfinite(ch.pl0_db)) out.push_back({"channel.pl0_db", "must be finite"});
  if (!std::isfinite(ch.noise_floor_dbm)) out.push_back({"channel.noise_floor_dbm", "must be finite"});
}

inline void validate(const PuTrafficModel& tm, std::vector<Violation>& out) {
  if (!(tm.mean_burst_slots > 0.0)) out.push_back({"pu_traffic.mean_burst_slots", "must be > 0"});
  if (!(tm.mean_gap_slots > 0.0)) out.push_back({"pu_traffic.mean_gap_slots", "must be > 0"});
  if (!std::isfinite(tm.tx_power_dbm)) out.push_back({"pu_traffic.tx_power_dbm", "must be finite"});
}

/// Distances below the reference distance are clamped to it.
inline double path_loss_db(const ChannelModel& ch, double d_m) {
  return ch.pl0_db + 10.0 * ch.n_exp * std::log10(std::max(d_m, ch.d0_m) / ch.d0_m);
}

/// With zero shadowing no random draw is consumed.
inline double received_power_dbm(const ChannelModel& ch, double tx_dbm, double d_m, Rng& rng) {
  const double mean = tx_dbm - path_loss_db(ch, d_m);
  if (ch.shadowing_sigma_db == 0.0) return mean;
  return mean + rng.normal(0.0, ch.shadowing_sigma_db);
}

inline PuState pu_activity_step(PuState state, const PuTrafficModel& tm, Rng& rng) {
  const double switch_p = state.on ? 1.0 / tm.mean_burst_slots : 1.0 / tm.mean_gap_slots;
  if (rng.bernoulli(switch_p)) state.on = !state.on;
  return state;
}

/// Draws an initial state from the chain's stationary distribution.
inline PuState pu_stationary_state(int pu_id, const PuTrafficModel& tm, Rng& rng) {
  const double p_on = (1.0 / tm.mean_gap_slots) / (1.0 / tm.mean_gap_slots + 1.0 / tm.mean_burst_slots);
  return {pu_id, rng.bernoulli(p_on)};
}

/// Emulates one sensing window of `window_samples` received power samples.
///
/// Each sample is exponential noise power plus an exponential contribution per
/// transmitting PU (noncoherent energy receiver). Statistics are taken on the
/// linear samples, converted to dBm and mapped through (dBm - noise_floor)/10.
/// The label is the global truth: occupied iff any PU is on, whether or not the
/// sensor can hear it.
inline Observation synthesize_observation(const Placement& sensor, std::span<const PrimaryUser> pus,
                                          const ChannelModel& ch, const PuTrafficModel& tm,
                                          int window_samples, std::int64_t slot, Rng& rng) {
  Observation obs;
  obs.node_id = sensor.node_id;
  obs.slot = slot;

  std::vector<double> active_mw;
  for (const auto& pu : pus) {
    if (!pu.state.on) continue;
    obs.truth_occupied = true;
    active_mw.push_back(dbm_to_mw(received_power_dbm(ch, tm.tx_power_dbm, distance_m(sensor, pu.where), rng)));
  }

  const double noise_mw = dbm_to_mw(ch.noise_floor_dbm);
  // Welford running mean/variance.
  double mean = 0.0, m2 = 0.0, peak = 0.0;
  for (int k = 0; k < window_samples; ++k) {
    double p = rng.exponential(noise_mw);
    for (double a : active_mw) p += rng.exponential(a);
    const double delta = p - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (p - mean);
    peak = std::max(peak, p);
  }
  const double var = m2 / static_cast<double>(window_samples - 1);
  // Floors keep the features finite for degenerate windows.
  constexpr double kFloorMw = 1e-30;
  const double stats[3] = {std::max(mean, kFloorMw), std::max(std::sqrt(var), kFloorMw), std::max(peak, kFloorMw)};
  for (int i = 0; i < 3; ++i) obs.features[i] = (mw_to_dbm(stats[i]) - ch.noise_floor_dbm) / 10.0;
  return obs;
}

}  // namespace fedspectrum

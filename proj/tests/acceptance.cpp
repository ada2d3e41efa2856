// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fedspectrum/cli.hpp"
#include "fedspectrum/fedspectrum.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace fedspectrum;
using fedspectrum::testing::TempDir;
using fedspectrum::testing::read_file;
using fedspectrum::testing::scenario_file;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"fedspectrum"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Scenario load(const std::string& name) { return load_scenario(scenario_file(name)); }

Verdict determinism() {
  TempDir tmp("acc_det");
  const std::string scn = scenario_file("default.json").string();
  for (const char* d : {"a", "b"})
    if (cli({"compare", "--scenario", scn, "--seeds", "7", "--out-dir", (tmp / d).string()}) != 0)
      return {false, "compare exited nonzero"};
  const bool csv = read_file(tmp / "a" / "metrics.csv") == read_file(tmp / "b" / "metrics.csv");
  const bool json = read_file(tmp / "a" / "comparison.json") == read_file(tmp / "b" / "comparison.json");
  return {csv && json, std::string("metrics.csv ") + (csv ? "identical" : "differs") + ", comparison.json " +
                           (json ? "identical" : "differs")};
}

Verdict fedavg_symmetry() {
  Scenario s = load("default.json");
  s.training.model = ModelKind::logistic;
  s.schedule.n_training_slots = 10 * s.schedule.federation_period_slots;
  s.schedule.n_eval_slots = 10;
  const RunOptions hook{.replicate_first_sensor = true};
  const auto alone = run_simulation(s, Topology::isolated, 11, hook);
  const auto fed = run_simulation(s, Topology::central, 11, hook);
  double worst = 0.0;
  for (const auto& m : fed.final_models)
    for (std::size_t k = 0; k < m.theta.size(); ++k)
      worst = std::max(worst, std::abs(m.theta[k] - alone.final_models.front().theta[k]));
  return {fed.federation_rounds == 10 && fed.final_models.size() == 14 && worst <= 1e-9,
          "rounds " + std::to_string(fed.federation_rounds) + ", max |diff| " + num(worst)};
}

Verdict gradient_check() {
  Rng rng(2024);
  double worst = 0.0;
  for (ModelKind kind : {ModelKind::logistic, ModelKind::mlp}) {
    for (int i = 0; i < 100; ++i) {
      const auto m = oracle::random_model(kind, rng);
      const auto batch = oracle::random_batch(rng, 1 + rng.below(20));
      worst = std::max(worst, oracle::relative_error(loss_gradient(m, batch), oracle::finite_difference_gradient(m, batch)));
    }
  }
  return {worst < 1e-4, "200 instances, max relative error " + num(worst)};
}

Verdict message_accounting() {
  const Scenario s = load("default.json");
  Rng unused(0);
  const auto layout = place_nodes(s, unused);
  std::vector<ModelParams> states(layout.sensors.size(), ModelParams{ModelKind::logistic, std::vector<double>(4, 0.0), 1});
  std::vector<int> ids;
  for (const auto& p : layout.sensors) ids.push_back(p.node_id);

  const auto c = central_round(states, ids, layout.central.node_id, 0);
  const auto graph = build_neighbor_graph(layout.sensors, s.federation.neighbor_radius_m);
  const auto g = gossip_round(states, graph, s.federation, 0);
  const auto gt = traffic_of_round(g.messages, std::nullopt);
  const auto expected_gossip = 48 * static_cast<std::int64_t>(graph.degree_sum());
  return {c.traffic.total_bytes == 1344 && gt.total_bytes == expected_gossip,
          "central round " + std::to_string(c.traffic.total_bytes) + " B, gossip round " +
              std::to_string(gt.total_bytes) + " B (expected " + std::to_string(expected_gossip) + ")"};
}

Verdict concentration() {
  const Scenario s = load("default.json");
  const std::vector<std::uint64_t> seeds = {7};
  const auto c = compare_topologies(s, seeds);
  const double central = c.report.row(Topology::central).central_bytes;
  const double busiest = c.report.row(Topology::gossip).busiest_node_bytes;
  return {busiest > 0 && central >= 3.0 * busiest,
          "central " + num(central) + " B, busiest gossip node " + num(busiest) + " B, ratio " + num(central / busiest)};
}

Verdict federation_benefit() {
  const Scenario s = load("data_scarce.json");
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 1; i <= 20; ++i) seeds.push_back(i);
  const auto c = compare_topologies(s, seeds);
  std::vector<double> iso, gos, cen;
  for (const auto& r : c.runs) {
    auto& dst = r.topology == Topology::isolated ? iso : r.topology == Topology::gossip ? gos : cen;
    dst.push_back(r.global.accuracy);
  }
  const auto tg = oracle::paired_t_test(gos, iso);
  const auto tc = oracle::paired_t_test(cen, iso);
  auto mean = [](const std::vector<double>& v) {
    double a = 0;
    for (double x : v) a += x;
    return a / static_cast<double>(v.size());
  };
  const bool ok = tg.p_one_sided < 0.05 && tc.p_one_sided < 0.05 && tg.mean_diff > 0 && tc.mean_diff > 0;
  return {ok, "accuracy isolated " + num(mean(iso)) + ", gossip " + num(mean(gos)) + " (p " + num(tg.p_one_sided) +
                  "), central " + num(mean(cen)) + " (p " + num(tc.p_one_sided) + ")"};
}

Verdict energy_calibration() {
  Rng cal(101), test(102);
  std::vector<double> f1;
  for (int i = 0; i < 10000; ++i) f1.push_back(oracle::noise_only_f1(cal, 64));
  const double threshold = oracle::quantile(f1, 0.99);
  const Placement sensor{0, NodeKind::sensor, 0, 0};
  const ChannelModel ch{};
  int alarms = 0;
  constexpr int windows = 20000;
  for (int i = 0; i < windows; ++i)
    alarms += energy_baseline_decide(synthesize_observation(sensor, {}, ch, {}, 64, i, test).features, threshold);
  const double pfa = static_cast<double>(alarms) / windows;
  return {std::abs(pfa - 0.01) <= 0.005, "pfa " + num(pfa) + " over " + std::to_string(windows) + " windows"};
}

Verdict roc_monotonic() {
  const Scenario s = load("default.json");
  const auto run = run_simulation(s, Topology::gossip, 3);
  Rng unused(0);
  const auto layout = place_nodes(s, unused);
  auto rng = Rng::derived(3, "acceptance_roc");
  std::vector<PrimaryUser> pus;
  for (const auto& p : layout.primary_users) pus.push_back({p, pu_stationary_state(p.node_id, s.pu_traffic, rng)});

  int violations = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    std::vector<Observation> eval;
    for (std::int64_t slot = 0; slot < 500; ++slot) {
      for (auto& pu : pus) pu.state = pu_activity_step(pu.state, s.pu_traffic, rng);
      eval.push_back(synthesize_observation(layout.sensors[i], pus, s.channel, s.pu_traffic, s.schedule.window_samples,
                                            slot, rng));
    }
    const auto roc = roc_sweep(run.final_models[i], eval, 101);
    for (std::size_t k = 1; k < roc.size(); ++k) {
      if (roc[k].pd && roc[k - 1].pd && *roc[k].pd > *roc[k - 1].pd) ++violations;
      if (roc[k].pfa && roc[k - 1].pfa && *roc[k].pfa > *roc[k - 1].pfa) ++violations;
    }
  }
  return {violations == 0, "10 models x 101 thresholds, " + std::to_string(violations) + " monotonicity violations"};
}

Verdict consensus() {
  std::vector<Placement> line;
  for (int i = 0; i < 5; ++i) line.push_back({i, NodeKind::sensor, 100.0 * i, 0.0});
  const auto graph = build_neighbor_graph(line, 100.0);
  FederationConfig cfg;
  cfg.weighting = Weighting::uniform;
  Rng rng(909);
  std::vector<ModelParams> states;
  for (int i = 0; i < 5; ++i) states.push_back(oracle::random_model(ModelKind::logistic, rng));

  auto spread = [](const std::vector<ModelParams>& st, std::size_t k) {
    double lo = st[0].theta[k], hi = lo;
    for (const auto& m : st) lo = std::min(lo, m.theta[k]), hi = std::max(hi, m.theta[k]);
    return hi - lo;
  };
  std::vector<double> initial, prev;
  for (std::size_t k = 0; k < 4; ++k) initial.push_back(spread(states, k));
  prev = initial;
  bool strictly = true;
  for (int round = 0; round < 50; ++round) {
    states = gossip_round(states, graph, cfg, round).states;
    for (std::size_t k = 0; k < 4; ++k) {
      const double now = spread(states, k);
      strictly = strictly && now < prev[k];
      prev[k] = now;
    }
  }
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k < 4; ++k) worst_ratio = std::max(worst_ratio, prev[k] / initial[k]);
  return {strictly && worst_ratio < 1e-6, std::string("strictly decreasing ") + (strictly ? "yes" : "no") +
                                              ", final/initial spread " + num(worst_ratio)};
}

Verdict cost_ordering() {
  const auto lc = model_cost(ModelKind::logistic);
  const auto mc = model_cost(ModelKind::mlp);
  Scenario s = load("default.json");
  s.schedule.n_training_slots = 100;
  s.schedule.n_eval_slots = 20;
  auto param_bytes = [&](ModelKind kind) {
    s.training.model = kind;
    const auto r = run_simulation(s, Topology::isolated, 1);
    std::ostringstream os;
    write_metrics_csv(os, std::span<const RunResult>(&r, 1));
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    return std::stoll(line.substr(line.rfind(',') + 1));
  };
  const auto lb = param_bytes(ModelKind::logistic);
  const auto mb = param_bytes(ModelKind::mlp);
  const bool ok = mc.macs_per_inference > lc.macs_per_inference && mc.model_bytes > lc.model_bytes && mb > lb &&
                  mb == mc.model_bytes && lb == lc.model_bytes;
  return {ok, "MACs " + std::to_string(mc.macs_per_inference) + " vs " + std::to_string(lc.macs_per_inference) +
                  ", bytes " + std::to_string(mc.model_bytes) + " vs " + std::to_string(lc.model_bytes) +
                  ", param_bytes column " + std::to_string(mb) + " vs " + std::to_string(lb)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"determinism", determinism},
      {"fedavg symmetry", fedavg_symmetry},
      {"gradient check", gradient_check},
      {"message accounting", message_accounting},
      {"central traffic concentration", concentration},
      {"federation benefit when data is scarce", federation_benefit},
      {"energy baseline calibration", energy_calibration},
      {"ROC monotonicity", roc_monotonic},
      {"consensus contraction", consensus},
      {"model cost ordering", cost_ordering},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("[%s] %2zu. %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}

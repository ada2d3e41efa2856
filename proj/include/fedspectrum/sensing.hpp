#pragma once

// Per-node occupancy classifiers: energy threshold baseline, logistic model
// and a 3-8-1 MLP reference, with mini-batch training and cost accounting.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fedspectrum/error.hpp"
#include "fedspectrum/radio_env.hpp"
#include "fedspectrum/rng.hpp"

namespace fedspectrum {

enum class ModelKind { logistic, mlp };

constexpr std::string_view to_string(ModelKind k) { return k == ModelKind::logistic ? "logistic" : "mlp"; }

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
  if (s == "logistic") return ModelKind::logistic;
  if (s == "mlp") return ModelKind::mlp;
  return std::nullopt;
}

namespace mlp_layout {
inline constexpr std::size_t kInputs = 3;
inline constexpr std::size_t kHidden = 8;
// theta = [hidden weights (row-major, kHidden x kInputs) | hidden biases | output weights | output bias]
inline constexpr std::size_t kHiddenW = 0;
inline constexpr std::size_t kHiddenB = kHiddenW + kHidden * kInputs;
inline constexpr std::size_t kOutW = kHiddenB + kHidden;
inline constexpr std::size_t kOutB = kOutW + kHidden;
inline constexpr std::size_t kSize = kOutB + 1;
}  // namespace mlp_layout

constexpr std::size_t param_count(ModelKind k) { return k == ModelKind::logistic ? 4 : mlp_layout::kSize; }

/// The parameter set exchanged between nodes. Logistic theta is [w1, w2, w3, b].
struct ModelParams {
  ModelKind kind = ModelKind::logistic;
  std::vector<double> theta;
  std::uint64_t n_train_samples = 0;  // since the last federation round

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct TrainingConfig {
  ModelKind model = ModelKind::logistic;
  double learning_rate = 0.5;
  int epochs_per_round = 5;
  int batch_size = 10;
  double init_scale = 0.5;
};

inline void validate(const TrainingConfig& tc, std::vector<Violation>& out) {
  if (!(tc.learning_rate > 0.0) || !std::isfinite(tc.learning_rate)) out.push_back({"training.learning_rate", "must be > 0"});
  if (tc.epochs_per_round < 1) out.push_back({"training.epochs_per_round", "must be >= 1"});
  if (tc.batch_size < 1) out.push_back({"training.batch_size", "must be >= 1"});
  if (!(tc.init_scale >= 0.0)) out.push_back({"training.init_scale", "must be >= 0"});
}

/// Deterministic compute/memory accounting; model_bytes is always 8 * param_count.
struct CostReport {
  std::int64_t macs_per_inference = 0;
  std::int64_t param_count = 0;
  std::int64_t model_bytes = 0;
  std::int64_t train_macs_accumulated = 0;

  friend bool operator==(const CostReport&, const CostReport&) = default;
};

inline CostReport model_cost(ModelKind kind) {
  const auto params = static_cast<std::int64_t>(param_count(kind));
  const std::int64_t macs =
      kind == ModelKind::logistic ? 3 : static_cast<std::int64_t>(mlp_layout::kInputs * mlp_layout::kHidden + mlp_layout::kHidden);
  return {macs, params, 8 * params, 0};
}

inline CostReport model_cost(const ModelParams& m) { return model_cost(m.kind); }

inline bool is_well_formed(const ModelParams& m) {
  if (m.theta.size() != param_count(m.kind)) return false;
  for (double v : m.theta)
    if (!std::isfinite(v)) return false;
  return true;
}

inline ModelParams init_model(ModelKind kind, const TrainingConfig& tc, Rng& rng) {
  ModelParams m{kind, std::vector<double>(param_count(kind), 0.0), 0};
  if (kind == ModelKind::mlp && tc.init_scale > 0.0) {
    using namespace mlp_layout;
    for (std::size_t i = kHiddenW; i < kHiddenB; ++i) m.theta[i] = rng.uniform(-tc.init_scale, tc.init_scale);
    for (std::size_t i = kOutW; i < kOutB; ++i) m.theta[i] = rng.uniform(-tc.init_scale, tc.init_scale);
  }
  return m;
}

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

struct MlpForward {
  std::array<double, mlp_layout::kHidden> hidden{};
  double logit = 0.0;
};

inline MlpForward mlp_forward(std::span<const double> theta, const FeatureVector& x) {
  using namespace mlp_layout;
  MlpForward f;
  f.logit = theta[kOutB];
  for (std::size_t j = 0; j < kHidden; ++j) {
    double a = theta[kHiddenB + j];
    for (std::size_t i = 0; i < kInputs; ++i) a += theta[kHiddenW + j * kInputs + i] * x[i];
    f.hidden[j] = std::tanh(a);
    f.logit += theta[kOutW + j] * f.hidden[j];
  }
  return f;
}

inline double logit(const ModelParams& m, const FeatureVector& x) {
  if (m.kind == ModelKind::logistic) return m.theta[0] * x[0] + m.theta[1] * x[1] + m.theta[2] * x[2] + m.theta[3];
  return mlp_forward(m.theta, x).logit;
}

// Adds d(loss)/d(theta) * scale for one sample to grad.
inline void accumulate_gradient(const ModelParams& m, const FeatureVector& x, bool label, double scale,
                                std::span<double> grad) {
  const double y = label ? 1.0 : 0.0;
  if (m.kind == ModelKind::logistic) {
    const double dz = (sigmoid(logit(m, x)) - y) * scale;
    for (int i = 0; i < 3; ++i) grad[i] += dz * x[i];
    grad[3] += dz;
    return;
  }
  using namespace mlp_layout;
  const auto f = mlp_forward(m.theta, x);
  const double dz = (sigmoid(f.logit) - y) * scale;
  grad[kOutB] += dz;
  for (std::size_t j = 0; j < kHidden; ++j) {
    grad[kOutW + j] += dz * f.hidden[j];
    const double da = dz * m.theta[kOutW + j] * (1.0 - f.hidden[j] * f.hidden[j]);
    grad[kHiddenB + j] += da;
    for (std::size_t i = 0; i < kInputs; ++i) grad[kHiddenW + j * kInputs + i] += da * x[i];
  }
}

}  // namespace detail

/// Probability that the band is occupied.
inline double predict(const ModelParams& m, const FeatureVector& features) {
  return detail::sigmoid(detail::logit(m, features));
}

/// Occupied iff the predicted probability reaches the threshold (0.5 by default).
inline bool decide(const ModelParams& m, const FeatureVector& features, double threshold = 0.5) {
  return predict(m, features) >= threshold;
}

/// Mean binary cross-entropy over `data`.
inline double cross_entropy(const ModelParams& m, std::span<const Observation> data) {
  double total = 0.0;
  for (const auto& o : data) {
    const double z = detail::logit(m, o.features);
    total += detail::softplus(z) - (o.truth_occupied ? z : 0.0);
  }
  return total / static_cast<double>(data.size());
}

/// Analytic gradient of the mean cross-entropy over `data`.
inline std::vector<double> loss_gradient(const ModelParams& m, std::span<const Observation> data) {
  std::vector<double> grad(m.theta.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (const auto& o : data) detail::accumulate_gradient(m, o.features, o.truth_occupied, scale, grad);
  return grad;
}

struct TrainOutcome {
  ModelParams model;
  CostReport cost_delta;
};

/// Mini-batch gradient descent on mean cross-entropy. Each epoch visits the
/// data in a fresh shuffled order; the last batch of an epoch may be short.
/// Training cost is counted as epochs * |data| * macs_per_inference * 3
/// (forward, backward, update).
inline TrainOutcome train_local(ModelParams m, std::span<const Observation> data, const TrainingConfig& tc,
                                Rng& rng) {
  if (data.empty()) throw EmptyData();
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(m.theta.size());
  const auto batch = static_cast<std::size_t>(tc.batch_size);

  for (int epoch = 0; epoch < tc.epochs_per_round; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const auto& o = data[order[k]];
        detail::accumulate_gradient(m, o.features, o.truth_occupied, scale, grad);
      }
      for (std::size_t i = 0; i < grad.size(); ++i) m.theta[i] -= tc.learning_rate * grad[i];
    }
  }
  m.n_train_samples += data.size();

  CostReport delta = model_cost(m);
  delta.train_macs_accumulated =
      static_cast<std::int64_t>(tc.epochs_per_round) * static_cast<std::int64_t>(data.size()) * delta.macs_per_inference * 3;
  return {std::move(m), delta};
}

/// Single-node energy detector: occupied iff the standardized mean power
/// exceeds the threshold. Has no trainable parameters and never federates.
inline bool energy_baseline_decide(const FeatureVector& features, double threshold_std) {
  return features[0] > threshold_std;
}

/// JSON snapshot {"kind":..,"theta":[..],"n_train_samples":..} with
/// 17-significant-digit values.
inline std::string model_snapshot_json(const ModelParams& m) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"kind\":\"" << to_string(m.kind) << "\",\"theta\":[";
  for (std::size_t i = 0; i < m.theta.size(); ++i) os << (i ? "," : "") << m.theta[i];
  os << "],\"n_train_samples\":" << m.n_train_samples << "}";
  return os.str();
}

}  // namespace fedspectrum

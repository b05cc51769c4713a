#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <string>

#include "pickopt/features.hpp"
#include "pickopt/pick.hpp"
#include "pickopt/rng.hpp"

namespace pickopt {

// Logistic-linear success model. Weights are keyed by feature name; the one
// derived term, "edge_deficit", is max(0, 0.05 - dist_boundary) so picks
// hugging a segment edge are penalized without a raw-feature sign flip.
struct TrueSuccessModel {
  std::map<std::string, double> weights;
  double bias = 0.0;
  std::map<std::string, double> kind_penalties;  // keys: box/polybag/envelope
};

inline constexpr double kEdgeDeficitThreshold = 0.05;  // meters

inline TrueSuccessModel default_true_model() {
  TrueSuccessModel m;
  m.weights = {{"n_active_cups", 0.9}, {"plane_rmse", -120.0},
               {"align_mean", -2.0},   {"pkg_height", -1.5},
               {"edge_deficit", -3.0}};
  m.bias = -2.2;
  m.kind_penalties = {{"box", 0.0}, {"polybag", -0.4}, {"envelope", -0.2}};
  return m;
}

inline double true_logit(const TrueSuccessModel& model,
                         const FeatureVector& phi) {
  double logit = model.bias;
  for (const auto& [name, w] : model.weights) {
    double v;
    if (name == "edge_deficit")
      v = std::max(0.0, kEdgeDeficitThreshold - phi[7]);
    else
      v = phi[feature_index(name)];
    logit += w * v;
  }
  if (!model.kind_penalties.empty()) {
    logit += model.kind_penalties.at("box") * phi[75];
    logit += model.kind_penalties.at("polybag") * phi[76];
    logit += model.kind_penalties.at("envelope") * phi[77];
  }
  return logit;
}

inline double true_prob(const TrueSuccessModel& model,
                        const FeatureVector& phi) {
  return 1.0 / (1.0 + std::exp(-true_logit(model, phi)));
}

// The ranking/optimization surrogate: the true model plus a deterministic
// hash-based pseudo-noise and output quantization, so the surrogate is a
// degraded view of the truth rather than the truth itself.
struct PspModel {
  TrueSuccessModel base;
  double noise_amplitude = 0.03;
  double smoothing = 0.01;  // quantization step, 0 disables
};

inline PspModel default_psp_model() {
  PspModel m;
  m.base = default_true_model();
  return m;
}

// Fixed pseudo-noise in [-1, 1] as a pure function of the feature bytes.
inline double feature_noise(const FeatureVector& phi) {
  unsigned char bytes[sizeof(phi.values)];
  std::memcpy(bytes, phi.values.data(), sizeof(phi.values));
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  const double u = static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

inline double psp_prob(const PspModel& model, const FeatureVector& phi) {
  double v = true_prob(model.base, phi);
  if (model.noise_amplitude > 0.0)
    v += model.noise_amplitude * feature_noise(phi);
  v = std::clamp(v, 0.0, 1.0);
  if (model.smoothing > 0.0)
    v = std::clamp(std::round(v / model.smoothing) * model.smoothing, 0.0, 1.0);
  return v;
}

// Samples a pick outcome against the hidden-world oracle. Infeasible picks
// return without touching the stream; feasible picks consume exactly one
// uniform draw.
inline PickOutcome simulate_execute(const SensorFrame& frame,
                                    const std::map<int, AdjacencyInfo>& adjacency,
                                    const PickAction& action,
                                    const TrueSuccessModel& oracle,
                                    RngStream& rng,
                                    const EoatModel& eoat = {},
                                    const WorkspaceConfig& workspace = {}) {
  PickOutcome out;
  if (!check_feasible(action, workspace)) {
    out.result = PickResult::Infeasible;
    return out;
  }
  const FeatureVector phi = compute_features(frame, adjacency, action, eoat);
  out.p_true = true_prob(oracle, phi);
  out.result = rng.uniform() < out.p_true ? PickResult::Success
                                          : PickResult::Missed;
  out.multipick = detect_multipick(frame, eoat, action);
  return out;
}

inline PickOutcome simulate_execute(const SensorFrame& frame,
                                    const FrameContext& ctx,
                                    const PickAction& action,
                                    const TrueSuccessModel& oracle,
                                    RngStream& rng,
                                    const EoatModel& eoat = {},
                                    const WorkspaceConfig& workspace = {}) {
  PickOutcome out;
  if (!check_feasible(action, workspace)) {
    out.result = PickResult::Infeasible;
    return out;
  }
  const FeatureVector phi = compute_features(frame, ctx, action, eoat);
  out.p_true = true_prob(oracle, phi);
  out.result = rng.uniform() < out.p_true ? PickResult::Success
                                          : PickResult::Missed;
  out.multipick = detect_multipick(frame, eoat, action);
  return out;
}

}  // namespace pickopt

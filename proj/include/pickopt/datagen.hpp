#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "pickopt/features.hpp"
#include "pickopt/pick.hpp"
#include "pickopt/rng.hpp"
#include "pickopt/success.hpp"

namespace pickopt {

struct NoiseConfig {
  double sigma_pos = 0.04;  // meters, applied to x and y; 2x cup radius so
                            // perturbations regularly cross cup-seal edges
  double sigma_rot = 0.30;  // radians
  int n_perturb = 30;
};

inline void validate(const NoiseConfig& c) {
  if (c.sigma_pos <= 0.0) throw ConfigError("noise config: sigma_pos <= 0");
  if (c.sigma_rot <= 0.0) throw ConfigError("noise config: sigma_rot <= 0");
  if (c.n_perturb < 1) throw ConfigError("noise config: n_perturb < 1");
}

struct Provenance {
  uint64_t scene_seed = 0;
  int pick_index = 0;
  int perturb_index = 0;

  bool operator==(const Provenance&) const = default;
};

// One (phi, delta) supervision pair: phi describes the lower-probability
// action and delta is the exact step from it to the higher-probability one.
// Both endpoints are kept so the labeling arithmetic can be re-verified
// without re-running perturbation.
struct TrainingPair {
  FeatureVector phi;
  double dx = 0.0, dy = 0.0, dr = 0.0;
  double p_low = 0.0, p_high = 0.0;
  Provenance provenance;
  double low_x = 0.0, low_y = 0.0, low_r = 0.0;
  double high_x = 0.0, high_y = 0.0, high_r = 0.0;
};

struct Dataset {
  std::vector<TrainingPair> train;
  std::vector<TrainingPair> test;
  NoiseConfig noise;
  int feature_dim = kFeatureDim;
  uint64_t seed = 0;
};

// delta such that from + delta == to exactly in double arithmetic (not just
// within rounding): the labeled step must reproduce the winning pose
// bit-for-bit or downstream equality checks on recomputed features break.
inline double exact_delta(double from, double to) {
  double d = to - from;
  for (int i = 0; i < 64 && from + d != to; ++i) d += to - (from + d);
  for (int i = 0; i < 4 && from + d != to; ++i)
    d = std::nextafter(d, from + d < to
                              ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity());
  if (from + d != to) throw PipelineError("exact_delta failed to converge");
  return d;
}

// Same contract under angle wrapping: wrap_angle(from + delta) == to.
inline double exact_delta_angle(double from, double to) {
  double d = wrap_angle(to - from);
  for (int i = 0; i < 64; ++i) {
    const double got = wrap_angle(from + d);
    if (got == to) break;
    d += to - got;
  }
  if (wrap_angle(from + d) != to)
    throw PipelineError("exact_delta_angle failed to converge");
  if (std::abs(d) > std::numbers::pi) {
    const double alt = d - std::copysign(2.0 * std::numbers::pi, d);
    if (wrap_angle(from + alt) == to) d = alt;
  }
  if (std::abs(d) > std::numbers::pi)
    throw PipelineError("exact_delta_angle: no short-way step");
  return d;
}

// Gaussian perturbation of an executed pick: always consumes exactly three
// Gaussian draws; draws landing off the target segment reject the sample
// (nullopt) rather than resampling.
inline std::optional<PickAction> perturb(const SensorFrame& frame,
                                         const EoatModel& eoat,
                                         const PickAction& action,
                                         const NoiseConfig& noise,
                                         RngStream& rng) {
  const double nx = action.x + rng.gaussian(0.0, noise.sigma_pos);
  const double ny = action.y + rng.gaussian(0.0, noise.sigma_pos);
  const double nr = wrap_angle(action.r + rng.gaussian(0.0, noise.sigma_rot));
  if (!frame.bounds().contains(nx, ny)) return std::nullopt;
  const auto& sg = frame.segmentgrid;
  if (sg.at(sg.cell_x(nx), sg.cell_y(ny)) != action.target_segment)
    return std::nullopt;
  return make_action(frame, eoat, nx, ny, nr);
}

// Orders the two actions by surrogate score and emits (phi of the loser,
// exact step to the winner). A tie keeps the (a_i -> a_j) direction.
template <class Context>
inline TrainingPair label_pair(const PspModel& psp, const SensorFrame& frame,
                               const Context& ctx, const PickAction& a_i,
                               const PickAction& a_j,
                               const EoatModel& eoat = {}) {
  if (a_i.target_segment != a_j.target_segment)
    throw PipelineError("label_pair: actions target different segments");
  const FeatureVector phi_i = compute_features(frame, ctx, a_i, eoat);
  const FeatureVector phi_j = compute_features(frame, ctx, a_j, eoat);
  const double p_i = psp_prob(psp, phi_i);
  const double p_j = psp_prob(psp, phi_j);

  const bool i_wins = p_i > p_j;
  const PickAction& low = i_wins ? a_j : a_i;
  const PickAction& high = i_wins ? a_i : a_j;

  TrainingPair pair;
  pair.phi = i_wins ? phi_j : phi_i;
  pair.p_low = i_wins ? p_j : p_i;
  pair.p_high = i_wins ? p_i : p_j;
  pair.dx = exact_delta(low.x, high.x);
  pair.dy = exact_delta(low.y, high.y);
  pair.dr = exact_delta_angle(low.r, high.r);
  pair.low_x = low.x;
  pair.low_y = low.y;
  pair.low_r = low.r;
  pair.high_x = high.x;
  pair.high_y = high.y;
  pair.high_r = high.r;
  return pair;
}

// Documented floor rule for the train/test split.
inline std::pair<size_t, size_t> split_counts(size_t total, double fraction) {
  if (fraction <= 0.0 || fraction >= 1.0)
    throw ConfigError("split fraction outside (0, 1)");
  const auto train = static_cast<size_t>(
      std::floor(static_cast<double>(total) * fraction));
  return {train, total - train};
}

// One executed pick plus the sensor context it was taken in.
struct DatagenInput {
  const SensorFrame* frame = nullptr;
  const FrameContext* ctx = nullptr;
  PickAction action;
  uint64_t scene_seed = 0;
  int pick_index = 0;
};

// Pairs for one executed pick: n_perturb perturbation attempts, rejects
// skipped. The substream depends only on (seed, pick_index), so callers may
// process picks in any order or in parallel without changing results.
inline std::vector<TrainingPair> pairs_for_pick(
    const SensorFrame& frame, const FrameContext& ctx,
    const PickAction& action, const NoiseConfig& noise, const PspModel& psp,
    uint64_t seed, uint64_t scene_seed, int pick_index,
    const EoatModel& eoat = {}) {
  std::vector<TrainingPair> out;
  RngStream rng(derive_seed(seed, static_cast<uint64_t>(pick_index)));
  for (int j = 0; j < noise.n_perturb; ++j) {
    const auto perturbed = perturb(frame, eoat, action, noise, rng);
    if (!perturbed) continue;
    try {
      TrainingPair pair =
          label_pair(psp, frame, ctx, action, *perturbed, eoat);
      pair.provenance = {scene_seed, pick_index, j};
      out.push_back(std::move(pair));
    } catch (const PipelineError&) {
      // A step between the two poses that is not exactly representable in
      // doubles (seam-crossing rotations, mostly) rejects the sample, same
      // as an off-segment draw.
      continue;
    }
  }
  return out;
}

// Pick-granular split: whole picks go to train, in order, until the train
// side holds floor(total * fraction) pairs; the rest go to test.
inline Dataset split_dataset(std::vector<std::vector<TrainingPair>> per_pick,
                             const NoiseConfig& noise, double fraction,
                             uint64_t seed) {
  size_t total = 0;
  for (const auto& g : per_pick) total += g.size();
  if (total == 0) throw PipelineError("build_dataset: no surviving pairs");
  Dataset ds;
  ds.noise = noise;
  ds.seed = seed;
  const size_t target = split_counts(total, fraction).first;
  for (auto& pairs : per_pick) {
    auto& side = ds.train.size() < target ? ds.train : ds.test;
    for (auto& p : pairs) side.push_back(std::move(p));
  }
  return ds;
}

// Perturbs every executed pick n_perturb times, labels surviving pairs, and
// splits at pick granularity (see split_dataset).
inline Dataset build_dataset(const std::vector<DatagenInput>& picks,
                             const NoiseConfig& noise, const PspModel& psp,
                             double split_fraction, uint64_t seed,
                             const EoatModel& eoat = {}) {
  validate(noise);
  if (picks.empty()) throw PipelineError("build_dataset: empty pick log");
  if (split_fraction <= 0.0 || split_fraction >= 1.0)
    throw ConfigError("split fraction outside (0, 1)");

  std::vector<std::vector<TrainingPair>> per_pick(picks.size());
  for (size_t i = 0; i < picks.size(); ++i) {
    const DatagenInput& in = picks[i];
    per_pick[i] = pairs_for_pick(*in.frame, *in.ctx, in.action, noise, psp,
                                 seed, in.scene_seed, in.pick_index, eoat);
  }
  return split_dataset(std::move(per_pick), noise, split_fraction, seed);
}

}  // namespace pickopt

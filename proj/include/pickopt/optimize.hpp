#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pickopt/chain.hpp"
#include "pickopt/features.hpp"
#include "pickopt/pick.hpp"
#include "pickopt/success.hpp"

namespace pickopt {

struct RefinementStep {
  PickAction action;
  double score = 0.0;  // surrogate (PSP) probability
  int active_cups = 0;
};

struct RefinementTrace {
  std::vector<RefinementStep> steps;  // steps[0] is the initial action
  int best_index = 0;
  int iterations_run = 0;
};

inline constexpr double kMinStepPos = 1e-4;  // meters
inline constexpr double kMinStepRot = 1e-3;  // radians

namespace detail {

// Largest t in [0, 1] such that from + t * (to - from) stays on the target
// segment, found by fixed-depth binary search (from itself is on-segment).
inline double clamp_to_segment(const SensorFrame& frame, int target, Vec2 from,
                               Vec2 to) {
  const auto& sg = frame.segmentgrid;
  auto on_target = [&](Vec2 p) {
    if (!frame.bounds().contains(p.x, p.y)) return false;
    return sg.at(sg.cell_x(p.x), sg.cell_y(p.y)) == target;
  };
  if (on_target(to)) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 24; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (on_target(from + (to - from) * mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace detail

// Applies the chain's predicted delta up to K times, clamping position to
// the target segment and re-deriving cups at every step, scoring each pose
// with the surrogate; returns the best-scoring pose seen (ties keep the
// earliest, so a no-op chain returns the initial action).
inline std::pair<PickAction, RefinementTrace> optimize_pick(
    const SensorFrame& frame, const FrameContext& ctx,
    const PickAction& initial, const AutoregressiveChain& chain,
    const PspModel& psp, int K, const EoatModel& eoat = {},
    double step_scale = 1.0) {
  if (K < 1) throw ConfigError("optimize_pick: K < 1");

  RefinementTrace trace;
  FeatureVector phi = compute_features(frame, ctx, initial, eoat);
  trace.steps.push_back({initial, psp_prob(psp, phi),
                         static_cast<int>(initial.cups.size())});

  PickAction current = initial;
  for (int k = 0; k < K; ++k) {
    const auto delta = predict_chain(chain, phi);
    const double dx = step_scale * delta[0];
    const double dy = step_scale * delta[1];
    const double dr = step_scale * delta[2];
    if (std::abs(dx) < kMinStepPos && std::abs(dy) < kMinStepPos &&
        std::abs(dr) < kMinStepRot)
      break;

    const Vec2 from{current.x, current.y};
    const Vec2 to{current.x + dx, current.y + dy};
    const double t =
        detail::clamp_to_segment(frame, current.target_segment, from, to);
    if (t <= 0.0) break;  // cannot move at all; keep best so far
    const Vec2 pos = from + (to - from) * t;

    PickAction candidate =
        make_action(frame, eoat, pos.x, pos.y, current.r + dr);
    if (candidate.target_segment != current.target_segment) break;

    phi = compute_features(frame, ctx, candidate, eoat);
    trace.steps.push_back({candidate, psp_prob(psp, phi),
                           static_cast<int>(candidate.cups.size())});
    current = candidate;
    trace.iterations_run = k + 1;
  }

  for (size_t i = 1; i < trace.steps.size(); ++i)
    if (trace.steps[i].score > trace.steps[trace.best_index].score)
      trace.best_index = static_cast<int>(i);
  return {trace.steps[trace.best_index].action, trace};
}

struct OptimizeResult {
  bool ok = false;
  PickAction action;
  RefinementTrace trace;
  std::string error;
};

struct OptimizeItem {
  const SensorFrame* frame = nullptr;
  const FrameContext* ctx = nullptr;
  PickAction initial;
};

// Element-wise optimize_pick; per-item failures are recorded and the batch
// continues. Output order matches input order.
inline std::vector<OptimizeResult> optimize_batch(
    const std::vector<OptimizeItem>& items, const AutoregressiveChain& chain,
    const PspModel& psp, int K, const EoatModel& eoat = {},
    double step_scale = 1.0) {
  if (items.empty()) throw PipelineError("optimize_batch: empty batch");
  std::vector<OptimizeResult> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    OptimizeResult r;
    try {
      auto [action, trace] = optimize_pick(*item.frame, *item.ctx,
                                           item.initial, chain, psp, K, eoat,
                                           step_scale);
      r.ok = true;
      r.action = std::move(action);
      r.trace = std::move(trace);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace pickopt

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pickopt/chain.hpp"
#include "pickopt/features.hpp"
#include "pickopt/optimize.hpp"
#include "pickopt/pick.hpp"
#include "pickopt/scene.hpp"
#include "pickopt/success.hpp"

namespace pickopt {

inline constexpr double kZ95 = 1.959964;

// Normal-approximation binomial interval p +- z * sqrt(p(1-p)/n), clamped.
inline std::pair<double, double> proportion_ci(long k, long n,
                                               double level = 0.95) {
  if (n < 1) throw PipelineError("proportion_ci: n < 1");
  if (k < 0 || k > n) throw PipelineError("proportion_ci: k outside [0, n]");
  if (level != 0.95)
    throw ConfigError("proportion_ci: only the 0.95 level is supported");
  const double p = static_cast<double>(k) / static_cast<double>(n);
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

// Wilson score interval, available as the documented alternative.
inline std::pair<double, double> wilson_ci(long k, long n) {
  if (n < 1) throw PipelineError("wilson_ci: n < 1");
  const double p = static_cast<double>(k) / static_cast<double>(n);
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline double relative_reduction(long c_missed, long t_missed) {
  if (c_missed <= 0)
    throw PipelineError("relative_reduction: zero control baseline");
  return static_cast<double>(c_missed - t_missed) /
         static_cast<double>(c_missed);
}

struct MetricCi {
  double rate = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const MetricCi&) const = default;
};

struct ArmReport {
  long inducts = 0;
  long successes = 0;
  long missed = 0;
  long infeasible = 0;
  long multipick = 0;
  MetricCi missed_rate;
  MetricCi infeasible_rate;
  MetricCi multipick_rate;

  bool operator==(const ArmReport&) const = default;
};

inline MetricCi metric_ci(long k, long n) {
  const auto [lo, hi] = proportion_ci(k, n);
  return {static_cast<double>(k) / static_cast<double>(n), lo, hi};
}

inline ArmReport make_arm_report(long inducts, long missed, long infeasible,
                                 long multipick) {
  ArmReport r;
  r.inducts = inducts;
  r.missed = missed;
  r.infeasible = infeasible;
  r.multipick = multipick;
  r.successes = inducts - missed - infeasible;
  r.missed_rate = metric_ci(missed, inducts);
  r.infeasible_rate = metric_ci(infeasible, inducts);
  r.multipick_rate = metric_ci(multipick, inducts);
  return r;
}

struct AbReport {
  ArmReport control;
  ArmReport treatment;
  double relative_missed_reduction = 0.0;
  bool significant = false;  // non-overlapping 95% CIs on the missed rate

  bool operator==(const AbReport&) const = default;
};

// Control-arm planner: k heuristic candidates, feasibility filter, argmax
// surrogate score (first-listed wins ties). nullopt when nothing is
// feasible.
inline std::optional<PickAction> run_control_pick(
    const SensorFrame& frame, const FrameContext& ctx,
    const SegmentSummary& segment, int k, const PspModel& psp, uint64_t seed,
    const EoatModel& eoat = {}, const WorkspaceConfig& workspace = {}) {
  const auto candidates = sample_candidates(frame, segment, k, seed, eoat);
  std::optional<PickAction> best;
  double best_score = -1.0;
  for (const auto& c : candidates) {
    if (!check_feasible(c, workspace)) continue;
    const double s = psp_prob(psp, compute_features(frame, ctx, c, eoat));
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

struct AbConfig {
  long inducts = 50000;
  int k_candidates = 8;
  int refine_iters = 3;
  double resolution = 0.005;
  double step_scale = 1.0;
  SceneConfig scene;
  EoatModel eoat;
  WorkspaceConfig workspace;
  TrueSuccessModel oracle = default_true_model();
  PspModel psp = default_psp_model();
};

inline void validate(const AbConfig& c) {
  if (c.inducts < 1) throw ConfigError("ab config: inducts < 1");
  if (c.k_candidates < 1) throw ConfigError("ab config: k_candidates < 1");
  if (c.refine_iters < 1) throw ConfigError("ab config: refine_iters < 1");
  validate(c.scene);
}

// Picks the induct's target: the topmost rank-1 segment (highest mean cell
// z, ties to the lower id) with enough cells to sample.
inline const SegmentSummary* select_target(const FrameContext& ctx) {
  const SegmentSummary* best = nullptr;
  double best_z = 0.0;
  for (const auto& s : ctx.summaries) {
    if (s.cell_count < 10) continue;
    const auto adj = ctx.adjacency.find(s.id);
    if (adj == ctx.adjacency.end() || adj->second.rank != 1) continue;
    const double z = ctx.segments.at(s.id).mean_z;
    if (!best || z > best_z) {
      best = &s;
      best_z = z;
    }
  }
  return best;
}

// Paired A/B evaluation. Each induct derives all of its randomness from
// (seed, induct index): the scene, the candidate stream, and the outcome
// draw are byte-identical across arms, so the only difference between
// control and treatment is the refinement step.
inline AbReport run_ab(const AbConfig& config,
                       const AutoregressiveChain& chain, uint64_t seed) {
  validate(config);
  validate(chain);

  long c_missed = 0, c_infeasible = 0, c_multipick = 0;
  long t_missed = 0, t_infeasible = 0, t_multipick = 0;

  for (long induct = 0; induct < config.inducts; ++induct) {
    const uint64_t scene_seed =
        derive_seed(seed, static_cast<uint64_t>(induct));
    const Scene scene = generate_scene(config.scene, scene_seed);
    const SensorFrame frame = render_sensor(scene, config.resolution);
    const FrameContext ctx = make_context(frame);

    const SegmentSummary* target = select_target(ctx);
    std::optional<PickAction> control;
    if (target)
      control = run_control_pick(frame, ctx, *target, config.k_candidates,
                                 config.psp, derive_seed(scene_seed, "candidates"),
                                 config.eoat, config.workspace);

    if (!control) {
      ++c_infeasible;
      ++t_infeasible;
      continue;
    }

    RngStream control_outcome(derive_seed(scene_seed, "outcome"));
    const PickOutcome oc =
        simulate_execute(frame, ctx, *control, config.oracle, control_outcome,
                         config.eoat, config.workspace);
    if (oc.result == PickResult::Missed) ++c_missed;
    if (oc.result == PickResult::Infeasible) ++c_infeasible;
    if (oc.multipick) ++c_multipick;

    PickAction treated =
        optimize_pick(frame, ctx, *control, chain, config.psp,
                      config.refine_iters, config.eoat, config.step_scale)
            .first;
    if (!check_feasible(treated, config.workspace)) treated = *control;

    RngStream treatment_outcome(derive_seed(scene_seed, "outcome"));
    const PickOutcome ot =
        simulate_execute(frame, ctx, treated, config.oracle, treatment_outcome,
                         config.eoat, config.workspace);
    if (ot.result == PickResult::Missed) ++t_missed;
    if (ot.result == PickResult::Infeasible) ++t_infeasible;
    if (ot.multipick) ++t_multipick;
  }

  AbReport report;
  report.control =
      make_arm_report(config.inducts, c_missed, c_infeasible, c_multipick);
  report.treatment =
      make_arm_report(config.inducts, t_missed, t_infeasible, t_multipick);
  report.relative_missed_reduction =
      c_missed > 0 ? relative_reduction(c_missed, t_missed) : 0.0;
  report.significant =
      report.control.missed_rate.lo > report.treatment.missed_rate.hi ||
      report.treatment.missed_rate.lo > report.control.missed_rate.hi;
  return report;
}

}  // namespace pickopt

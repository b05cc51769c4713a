// Acceptance gate for the release checklist. One [PASS]/[FAIL] line per
// criterion, exit code = number of failures. Criteria 1, 2 and 5 share the
// default-config dataset and trained chain built once up front; everything
// else builds what it needs locally. No test framework on purpose: this
// binary is meant to be runnable (and readable) on its own.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "../support/oracles.hpp"
#include "../support/util.hpp"
#include "pickopt/chain.hpp"
#include "pickopt/cli.hpp"
#include "pickopt/datagen.hpp"
#include "pickopt/eval.hpp"
#include "pickopt/geometry.hpp"
#include "pickopt/mlp.hpp"
#include "pickopt/optimize.hpp"

using namespace pickopt;
using cli::make_ab_config;
using cli::RunConfig;
using cli::stage_seed;

namespace {

int g_failures = 0;

std::string strf(const char* fmt, ...) {
  char buf[768];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return buf;
}

void report(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %d. %s%s%s\n", ok ? "PASS" : "FAIL", idx, name,
              detail.empty() ? "" : ": ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

using Verdict = std::pair<bool, std::string>;

template <class Fn>
void criterion(int idx, const char* name, Fn&& fn) {
  try {
    const Verdict v = fn();
    report(idx, name, v.first, v.second);
  } catch (const std::exception& e) {
    report(idx, name, false, strf("exception: %s", e.what()));
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// In-memory mirror of gen-scenes -> collect-picks -> gen-dataset. Outcome
// simulation is skipped: training pairs depend only on the executed action,
// and the outcome stream is seeded independently of the candidate stream.
Dataset build_dataset_for(const RunConfig& cfg) {
  const uint64_t scene_base = stage_seed(cfg, "scenes");
  const uint64_t ds_seed = stage_seed(cfg, "dataset");
  std::vector<std::vector<TrainingPair>> per_pick;
  per_pick.reserve(static_cast<size_t>(cfg.n_scenes) *
                   static_cast<size_t>(cfg.picks_per_scene));
  int global = 0;
  for (int i = 0; i < cfg.n_scenes; ++i) {
    const Scene scene =
        generate_scene(cfg.scene, derive_seed(scene_base, static_cast<uint64_t>(i)));
    const SensorFrame frame = render_sensor(scene, cfg.resolution);
    const FrameContext ctx = make_context(frame);
    const SegmentSummary* target = select_target(ctx);
    for (int p = 0; p < cfg.picks_per_scene; ++p, ++global) {
      const uint64_t pick_seed =
          derive_seed(scene.seed, static_cast<uint64_t>(global));
      std::optional<PickAction> act;
      if (target)
        act = run_control_pick(frame, ctx, *target, cfg.k_candidates, cfg.psp,
                               derive_seed(pick_seed, "candidates"), cfg.eoat,
                               cfg.workspace);
      if (act)
        per_pick.push_back(pairs_for_pick(frame, ctx, *act, cfg.noise, cfg.psp,
                                          ds_seed, scene.seed, global,
                                          cfg.eoat));
      else
        per_pick.emplace_back();
    }
  }
  return split_dataset(std::move(per_pick), cfg.noise, cfg.split_fraction,
                       ds_seed);
}

struct DefaultArtifacts {
  RunConfig cfg;  // shipped defaults, master seed 1
  Dataset ds;
  AutoregressiveChain chain;
  double dataset_sec = 0.0;
  double train_sec = 0.0;
};

std::optional<DefaultArtifacts> g_art;
std::string g_art_error;

void build_default_artifacts() {
  try {
    DefaultArtifacts a;
    auto t0 = std::chrono::steady_clock::now();
    a.ds = build_dataset_for(a.cfg);
    a.dataset_sec = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    a.chain = train_chain(a.ds, ModelKind::Gbdt, a.cfg.chain,
                          stage_seed(a.cfg, "train"));
    a.train_sec = seconds_since(t0);
    g_art = std::move(a);
  } catch (const std::exception& e) {
    g_art_error = e.what();
  }
}

Verdict need_artifacts() {
  return {false, strf("default artifact build failed: %s", g_art_error.c_str())};
}

// ---- 1: paired A/B at the shipped defaults ---------------------------------

Verdict c1_paired_ab() {
  if (!g_art) return need_artifacts();
  const AbConfig ab = make_ab_config(g_art->cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const AbReport rep = run_ab(ab, g_art->chain, stage_seed(g_art->cfg, "abtest"));
  const double ab_sec = seconds_since(t0);

  const bool lower =
      rep.treatment.missed_rate.rate < rep.control.missed_rate.rate;
  const bool big_enough = rep.relative_missed_reduction >= 0.10;
  const bool fast = ab_sec <= 600.0;
  const std::string detail = strf(
      "missed %.4f%% -> %.4f%% over %ld paired inducts, rel reduction %.2f%%, "
      "CIs %s, A/B %.1fs (prep: dataset %.1fs, train %.1fs)",
      100.0 * rep.control.missed_rate.rate,
      100.0 * rep.treatment.missed_rate.rate, rep.control.inducts,
      100.0 * rep.relative_missed_reduction,
      rep.significant ? "disjoint" : "OVERLAP", ab_sec, g_art->dataset_sec,
      g_art->train_sec);
  return {lower && rep.significant && big_enough && fast, detail};
}

// ---- 2: labeling soundness over the full default dataset -------------------

Verdict c2_labeling() {
  if (!g_art) return need_artifacts();
  const RunConfig& cfg = g_art->cfg;
  std::vector<const TrainingPair*> all;
  for (const auto& p : g_art->ds.train) all.push_back(&p);
  for (const auto& p : g_art->ds.test) all.push_back(&p);
  if (all.size() < 25000)
    return {false, strf("only %zu pairs generated (need >= 25000)", all.size())};

  std::map<uint64_t, std::vector<const TrainingPair*>> by_scene;
  for (const auto* p : all) by_scene[p->provenance.scene_seed].push_back(p);

  long bad_psp = 0, bad_order = 0, bad_dr = 0;
  for (const auto& [scene_seed, pairs] : by_scene) {
    const Scene scene = generate_scene(cfg.scene, scene_seed);
    const SensorFrame frame = render_sensor(scene, cfg.resolution);
    const FrameContext ctx = make_context(frame);
    for (const auto* p : pairs) {
      const PickAction high =
          make_action(frame, cfg.eoat, p->low_x + p->dx, p->low_y + p->dy,
                      wrap_angle(p->low_r + p->dr));
      const double got =
          psp_prob(cfg.psp, compute_features(frame, ctx, high, cfg.eoat));
      if (got != p->p_high) ++bad_psp;
      if (p->p_high < p->p_low) ++bad_order;
      if (std::abs(p->dr) > std::numbers::pi) ++bad_dr;
    }
  }
  return {bad_psp == 0 && bad_order == 0 && bad_dr == 0,
          strf("%zu pairs: %ld psp mismatches, %ld order violations, "
               "%ld |dr| > pi",
               all.size(), bad_psp, bad_order, bad_dr)};
}

// ---- 3: split and reduction arithmetic --------------------------------------

Verdict c3_arithmetic() {
  const auto [train, test] = split_counts(27977, 0.8);
  const double rr = relative_reduction(22310, 18015);
  const bool split_ok = train == 22381 && test == 5596;
  const bool rr_ok = std::abs(rr - 0.19252) <= 1.0e-5;
  return {split_ok && rr_ok,
          strf("split(27977, 0.8) = (%zu, %zu); "
               "relative_reduction(22310, 18015) = %.6f",
               train, test, rr)};
}

// ---- 4: gbdt vs mlp held-out rmse over three dataset seeds ------------------

Verdict c4_model_comparison() {
  const uint64_t seeds[3] = {101, 202, 303};
  std::array<std::array<double, 3>, 3> g{}, m{};
  for (int s = 0; s < 3; ++s) {
    RunConfig cfg;
    cfg.seed = seeds[s];
    cfg.n_scenes = 150;
    const Dataset ds = build_dataset_for(cfg);
    const uint64_t train_seed = stage_seed(cfg, "train");
    const auto gb = train_chain(ds, ModelKind::Gbdt, cfg.chain, train_seed);
    const auto ml = train_chain(ds, ModelKind::Mlp, cfg.chain, train_seed);
    g[s] = rmse_by_dimension(gb, ds.test);
    m[s] = rmse_by_dimension(ml, ds.test);
  }
  auto median3 = [](double a, double b, double c) {
    return std::max(std::min(a, b), std::min(std::max(a, b), c));
  };
  std::array<double, 3> gm{}, mm{};
  int wins = 0;
  double worst_ratio = 0.0;
  for (int d = 0; d < 3; ++d) {
    gm[d] = median3(g[0][d], g[1][d], g[2][d]);
    mm[d] = median3(m[0][d], m[1][d], m[2][d]);
    if (gm[d] <= mm[d])
      ++wins;
    else
      worst_ratio = std::max(worst_ratio, gm[d] / mm[d]);
  }
  const bool ok = wins >= 2 && (wins == 3 || worst_ratio <= 1.05);
  return {ok, strf("median rmse gbdt (%.5f, %.5f, %.5f) vs mlp "
                   "(%.5f, %.5f, %.5f), gbdt wins %d/3",
                   gm[0], gm[1], gm[2], mm[0], mm[1], mm[2], wins)};
}

// ---- 5: refinement guarantee on held-out picks ------------------------------

Verdict c5_refinement() {
  if (!g_art) return need_artifacts();
  const RunConfig& cfg = g_art->cfg;
  const uint64_t base = derive_seed(cfg.seed, "holdout");
  int done = 0;
  long regressions = 0;
  double sum_improve = 0.0;
  for (uint64_t i = 0; done < 1000 && i < 5000; ++i) {
    const Scene scene = generate_scene(cfg.scene, derive_seed(base, i));
    const SensorFrame frame = render_sensor(scene, cfg.resolution);
    const FrameContext ctx = make_context(frame);
    const SegmentSummary* target = select_target(ctx);
    if (!target) continue;
    const auto control = run_control_pick(
        frame, ctx, *target, cfg.k_candidates, cfg.psp,
        derive_seed(scene.seed, "candidates"), cfg.eoat, cfg.workspace);
    if (!control) continue;
    const auto [best, trace] =
        optimize_pick(frame, ctx, *control, g_art->chain, cfg.psp,
                      cfg.refine_iters, cfg.eoat, cfg.step_scale);
    (void)best;
    const double s0 = trace.steps.front().score;
    const double sb = trace.steps[static_cast<size_t>(trace.best_index)].score;
    if (sb < s0) ++regressions;
    sum_improve += sb - s0;
    ++done;
  }
  if (done < 1000)
    return {false, strf("only %d feasible held-out picks found", done)};
  const double mean = sum_improve / done;
  return {regressions == 0 && mean >= 0.02,
          strf("%d picks, %ld score regressions, mean psp improvement %.4f",
               done, regressions, mean)};
}

// ---- 6: numeric kernels ------------------------------------------------------

Verdict c6_numerics() {
  // Exact planes: points generated as a*x + b*y + c must fit with ~0 rmse.
  double worst_plane = 0.0;
  for (int t = 0; t < 5; ++t) {
    RngStream rng(derive_seed(91, static_cast<uint64_t>(t)));
    const double a = rng.uniform(-0.5, 0.5), b = rng.uniform(-0.5, 0.5);
    const double c = rng.uniform(0.0, 0.3);
    std::vector<Vec3> pts;
    for (int iy = 0; iy < 6; ++iy)
      for (int ix = 0; ix < 6; ++ix) {
        const double x = 0.01 * ix, y = 0.01 * iy;
        pts.push_back({x, y, a * x + b * y + c});
      }
    worst_plane = std::max(worst_plane, fit_plane(pts).rmse);
  }
  const bool plane_ok = worst_plane < 1e-9;

  // Analytic MLP gradients vs central differences.
  MlpModel net;
  net.layer_sizes = {6, 5, 3, 1};
  net.input_mean.assign(6, 0.0);
  net.input_std.assign(6, 1.0);
  RngStream wrng(derive_seed(92, "weights"));
  for (size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    const int in = net.layer_sizes[l], out = net.layer_sizes[l + 1];
    std::vector<double> w(static_cast<size_t>(in) * out), bvec(out);
    for (auto& v : w) v = wrng.uniform(-0.8, 0.8);
    for (auto& v : bvec) v = wrng.uniform(-0.3, 0.3);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(bvec));
  }
  std::vector<double> x(6);
  for (auto& v : x) v = wrng.uniform(-1.0, 1.0);
  const double y = wrng.uniform(-1.0, 1.0);
  const MlpGradients grads = mlp_gradients(net, x.data(), y);
  double worst_grad = 0.0;
  const double h = 1e-5;
  auto check = [&](std::vector<double>& param, const std::vector<double>& gref) {
    for (size_t i = 0; i < param.size(); ++i) {
      const double keep = param[i];
      param[i] = keep + h;
      const double up = mlp_loss(net, x.data(), y);
      param[i] = keep - h;
      const double dn = mlp_loss(net, x.data(), y);
      param[i] = keep;
      const double fd = (up - dn) / (2.0 * h);
      const double rel = std::abs(fd - gref[i]) /
                         std::max(1.0, std::abs(fd) + std::abs(gref[i]));
      worst_grad = std::max(worst_grad, rel);
    }
  };
  for (size_t l = 0; l < net.layer_count(); ++l) {
    check(net.weights[l], grads.weights[l]);
    check(net.biases[l], grads.biases[l]);
  }
  const bool grad_ok = worst_grad < 1e-4;

  // Per-round training MSE must never increase (full-set leaf refit).
  RngStream drng(derive_seed(93, "gbdt"));
  DataMatrix X(400, 6);
  std::vector<double> yv(400);
  for (size_t i = 0; i < 400; ++i) {
    for (size_t j = 0; j < 6; ++j) X.at(i, j) = drng.uniform(-1.0, 1.0);
    yv[i] = std::sin(3.0 * X.at(i, 0)) + X.at(i, 1) * X.at(i, 2) +
            0.05 * drng.gaussian(0.0, 1.0);
  }
  const GbdtModel gb = train_gbdt(X, yv, GbdtHyperparams{}, 17);
  bool monotone = !gb.train_mse.empty();
  for (size_t i = 1; i < gb.train_mse.size(); ++i)
    if (gb.train_mse[i] > gb.train_mse[i - 1] + 1e-12) monotone = false;

  const auto [lo, hi] = proportion_ci(18015, 1000000);
  const bool ci_ok =
      std::abs(lo - 0.017754) <= 1e-6 && std::abs(hi - 0.018276) <= 1e-6;

  return {plane_ok && grad_ok && monotone && ci_ok,
          strf("plane rmse %.2e; grad rel err %.2e; train mse %s; "
               "ci(18015, 1e6) = (%.6f, %.6f)",
               worst_plane, worst_grad,
               monotone ? "monotone" : "NOT MONOTONE", lo, hi)};
}

// ---- 7: brute-force oracle equivalence ---------------------------------------

Verdict c7_oracles() {
  SceneConfig small;
  small.count_min = 2;
  small.count_max = 6;
  long rank_diff = 0, neighbor_diff = 0, mean_diff = 0;
  for (int i = 0; i < 100; ++i) {
    const Scene scene =
        generate_scene(small, derive_seed(701, static_cast<uint64_t>(i)));
    const SensorFrame frame = render_sensor(scene, 0.02);
    const auto lib = adjacency_graph(frame);
    const auto ref = oracle::adjacency_brute(frame);
    if (lib.size() != ref.size()) ++neighbor_diff;
    for (const auto& [id, info] : lib) {
      const auto it = ref.find(id);
      if (it == ref.end()) {
        ++neighbor_diff;
        continue;
      }
      if (info.rank != it->second.rank) ++rank_diff;
      if (info.neighbor_ids != it->second.neighbors) ++neighbor_diff;
    }
    const auto means = segment_mean_heights(frame);
    for (const auto& [id, mz] : means)
      if (mz != ref.at(id).mean_z) ++mean_diff;
  }

  SceneConfig tiny = small;
  tiny.count_max = 5;
  long cell_diff = 0;
  for (int i = 0; i < 100; ++i) {
    const Scene scene =
        generate_scene(tiny, derive_seed(702, static_cast<uint64_t>(i)));
    const SensorFrame frame = render_sensor(scene, 0.01);
    const auto ref = oracle::render_brute(scene, 0.01);
    if (frame.nx() != ref.nx || frame.ny() != ref.ny) {
      ++cell_diff;
      continue;
    }
    for (int iy = 0; iy < ref.ny; ++iy)
      for (int ix = 0; ix < ref.nx; ++ix) {
        const size_t idx = static_cast<size_t>(iy) * ref.nx + ix;
        if (frame.heightgrid.at(ix, iy) != ref.height[idx]) ++cell_diff;
        if (frame.segmentgrid.at(ix, iy) != ref.segment[idx]) ++cell_diff;
      }
  }
  return {rank_diff == 0 && neighbor_diff == 0 && mean_diff == 0 &&
              cell_diff == 0,
          strf("adjacency: %ld rank, %ld neighbor, %ld mean-height diffs on "
               "100 scenes; render: %ld cell diffs on 100 scenes",
               rank_diff, neighbor_diff, mean_diff, cell_diff)};
}

// ---- 8: byte-identical reruns of the CLI pipeline ----------------------------

Verdict c8_determinism() {
  testutil::TmpDir tmp;
  RunConfig cfg;
  cfg.n_scenes = 40;
  cfg.noise.n_perturb = 10;
  cfg.chain.gbdt.rounds = 40;
  cfg.inducts = 300;
  const std::string cfg_path = tmp.file("run.json");
  save_run_config(cfg_path, cfg);

  const std::string scenes = tmp.file("scenes.jsonl");
  const std::string picks = tmp.file("picks.jsonl");
  const std::string data = tmp.file("dataset.jsonl");
  const std::string model = tmp.file("model.json");
  const std::string rjson = tmp.file("report.json");
  const std::string rtext = tmp.file("report.txt");
  const std::vector<std::string> steps = {
      "gen-scenes --config " + cfg_path + " --out " + scenes,
      "collect-picks --config " + cfg_path + " --scenes " + scenes +
          " --out " + picks,
      "gen-dataset --config " + cfg_path + " --scenes " + scenes +
          " --picks " + picks + " --out " + data,
      "train --config " + cfg_path + " --dataset " + data + " --out " + model,
      "abtest --config " + cfg_path + " --model " + model + " --json " +
          rjson + " --text " + rtext,
  };
  auto run_pipeline = [&]() -> std::string {
    for (const auto& s : steps) {
      const auto r = testutil::run_tool(s);
      if (r.code != 0)
        return strf("step '%s' exited %d", s.substr(0, s.find(' ')).c_str(),
                    r.code);
    }
    return {};
  };

  std::string err = run_pipeline();
  if (!err.empty()) return {false, "first run: " + err};
  const std::vector<std::string> files = {scenes, picks, data, model, rjson,
                                          rtext};
  std::map<std::string, std::string> first;
  for (const auto& f : files) first[f] = testutil::slurp(f);

  err = run_pipeline();
  if (!err.empty()) return {false, "second run: " + err};
  long mismatched = 0;
  for (const auto& f : files)
    if (first.at(f) != testutil::slurp(f)) ++mismatched;
  return {mismatched == 0,
          strf("%zu artifacts compared, %ld differ between reruns",
               files.size(), mismatched)};
}

}  // namespace

int main() {
  std::printf("building default-config artifacts (dataset + gbdt chain)...\n");
  std::fflush(stdout);
  build_default_artifacts();
  if (g_art)
    std::printf("  %zu train / %zu test pairs (%.1fs), chain trained (%.1fs)\n",
                g_art->ds.train.size(), g_art->ds.test.size(),
                g_art->dataset_sec, g_art->train_sec);
  else
    std::printf("  FAILED: %s\n", g_art_error.c_str());
  std::fflush(stdout);

  criterion(1, "paired A/B at shipped defaults", c1_paired_ab);
  criterion(2, "training-pair labeling soundness", c2_labeling);
  criterion(3, "split and reduction arithmetic", c3_arithmetic);
  criterion(4, "gbdt vs mlp held-out rmse over 3 seeds", c4_model_comparison);
  criterion(5, "refinement guarantee on held-out picks", c5_refinement);
  criterion(6, "numeric kernels", c6_numerics);
  criterion(7, "brute-force oracle equivalence", c7_oracles);
  criterion(8, "byte-identical pipeline reruns", c8_determinism);

  std::printf("%s (%d/8 passed)\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
              8 - g_failures);
  return g_failures == 0 ? 0 : 1;
}

#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pickopt/serialize.hpp"

namespace pickopt::cli {

inline constexpr uint64_t kDefaultSeed = 1;

// Everything a pipeline run needs, loadable from one JSON file. Commands take
// paths separately so a single config drives the whole pipeline.
struct RunConfig {
  SceneConfig scene;
  NoiseConfig noise;
  ChainConfig chain;
  EoatModel eoat;
  WorkspaceConfig workspace;
  TrueSuccessModel oracle = default_true_model();
  PspModel psp = default_psp_model();
  long inducts = 50000;
  int k_candidates = 8;
  int refine_iters = 3;
  double resolution = 0.005;
  double step_scale = 1.0;
  int n_scenes = 1000;
  int picks_per_scene = 1;
  double split_fraction = 0.8;
  ModelKind model_kind = ModelKind::Gbdt;
  uint64_t seed = kDefaultSeed;
  int threads = 1;
};

inline void validate(const RunConfig& c) {
  validate(c.scene);
  validate(c.noise);
  validate(c.chain.gbdt);
  validate(c.chain.mlp);
  if (c.inducts < 1) throw ConfigError("run config: inducts < 1");
  if (c.k_candidates < 1) throw ConfigError("run config: k_candidates < 1");
  if (c.refine_iters < 1) throw ConfigError("run config: refine_iters < 1");
  if (c.resolution <= 0.0) throw ConfigError("run config: resolution <= 0");
  if (c.n_scenes < 0) throw ConfigError("run config: n_scenes < 0");
  if (c.picks_per_scene < 1)
    throw ConfigError("run config: picks_per_scene < 1");
  if (c.split_fraction <= 0.0 || c.split_fraction >= 1.0)
    throw ConfigError("run config: split_fraction outside (0, 1)");
  if (c.threads < 1) throw ConfigError("run config: threads < 1");
}

inline void to_json(json& j, const RunConfig& c) {
  j = json{{"scene", c.scene},
           {"noise", c.noise},
           {"chain", c.chain},
           {"eoat", c.eoat},
           {"workspace", c.workspace},
           {"oracle", c.oracle},
           {"psp", c.psp},
           {"inducts", c.inducts},
           {"k_candidates", c.k_candidates},
           {"refine_iters", c.refine_iters},
           {"resolution", c.resolution},
           {"step_scale", c.step_scale},
           {"n_scenes", c.n_scenes},
           {"picks_per_scene", c.picks_per_scene},
           {"split_fraction", c.split_fraction},
           {"model_kind", to_string(c.model_kind)},
           {"seed", c.seed},
           {"threads", c.threads}};
}

// Partial configs are allowed at the top level: absent fields keep their
// built-in defaults (nested sections, when present, must be complete).
inline void from_json(const json& j, RunConfig& c) {
  if (j.contains("scene")) c.scene = j.at("scene").get<SceneConfig>();
  if (j.contains("noise")) c.noise = j.at("noise").get<NoiseConfig>();
  if (j.contains("chain")) c.chain = j.at("chain").get<ChainConfig>();
  if (j.contains("eoat")) c.eoat = j.at("eoat").get<EoatModel>();
  if (j.contains("workspace"))
    c.workspace = j.at("workspace").get<WorkspaceConfig>();
  if (j.contains("oracle")) c.oracle = j.at("oracle").get<TrueSuccessModel>();
  if (j.contains("psp")) c.psp = j.at("psp").get<PspModel>();
  if (j.contains("inducts")) c.inducts = j.at("inducts").get<long>();
  if (j.contains("k_candidates"))
    c.k_candidates = j.at("k_candidates").get<int>();
  if (j.contains("refine_iters"))
    c.refine_iters = j.at("refine_iters").get<int>();
  if (j.contains("resolution")) c.resolution = j.at("resolution").get<double>();
  if (j.contains("step_scale")) c.step_scale = j.at("step_scale").get<double>();
  if (j.contains("n_scenes")) c.n_scenes = j.at("n_scenes").get<int>();
  if (j.contains("picks_per_scene"))
    c.picks_per_scene = j.at("picks_per_scene").get<int>();
  if (j.contains("split_fraction"))
    c.split_fraction = j.at("split_fraction").get<double>();
  if (j.contains("model_kind"))
    c.model_kind =
        model_kind_from_string(j.at("model_kind").get<std::string>());
  if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
}

// PICKOPT_SEED: master-seed fallback when neither flag nor config file set one.
inline std::optional<uint64_t> env_seed() {
  const char* s = std::getenv("PICKOPT_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (errno != 0 || end == s || *end != '\0')
    throw ConfigError("PICKOPT_SEED is not an unsigned integer");
  return static_cast<uint64_t>(v);
}

inline RunConfig default_run_config() {
  RunConfig cfg;
  if (const auto e = env_seed()) cfg.seed = *e;
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  const json j = io::read_single(path, "run");
  RunConfig cfg = j.get<RunConfig>();
  if (!j.contains("seed"))
    if (const auto e = env_seed()) cfg.seed = *e;
  validate(cfg);
  return cfg;
}

inline void save_run_config(const std::string& path, const RunConfig& cfg) {
  json j = io::make_header("run");
  j.update(json(cfg));
  auto out = io::open_out(path);
  out << j.dump(2) << '\n';
}

// Seed derivation, one tag per pipeline stage. Published so outputs can be
// cross-checked: scenes use derive_seed(derive_seed(master, "scenes"), i);
// the A/B uses derive_seed(derive_seed(master, "abtest"), induct) per induct,
// so offline training scenes and evaluation scenes never coincide.
inline uint64_t stage_seed(const RunConfig& cfg, const char* stage) {
  return derive_seed(cfg.seed, stage);
}

inline AbConfig make_ab_config(const RunConfig& cfg) {
  AbConfig ab;
  ab.inducts = cfg.inducts;
  ab.k_candidates = cfg.k_candidates;
  ab.refine_iters = cfg.refine_iters;
  ab.resolution = cfg.resolution;
  ab.step_scale = cfg.step_scale;
  ab.scene = cfg.scene;
  ab.eoat = cfg.eoat;
  ab.workspace = cfg.workspace;
  ab.oracle = cfg.oracle;
  ab.psp = cfg.psp;
  return ab;
}

// ---- commands ---------------------------------------------------------------

inline size_t cmd_gen_scenes(const RunConfig& cfg,
                             const std::string& out_path) {
  validate(cfg);
  const uint64_t base = stage_seed(cfg, "scenes");
  std::vector<Scene> scenes;
  scenes.reserve(static_cast<size_t>(cfg.n_scenes));
  for (int i = 0; i < cfg.n_scenes; ++i)
    scenes.push_back(
        generate_scene(cfg.scene, derive_seed(base, static_cast<uint64_t>(i))));
  io::write_scenes(out_path, scenes, cfg.seed);
  return scenes.size();
}

struct CollectResult {
  size_t records = 0;
  size_t infeasible = 0;
};

// Control-arm pick per scene, executed against the oracle and logged; scenes
// with no feasible candidate still produce a record (Infeasible outcome,
// empty action). pick_index is the global record index.
inline CollectResult cmd_collect_picks(const RunConfig& cfg,
                                       const std::string& scenes_path,
                                       const std::string& out_path) {
  validate(cfg);
  const auto file = io::read_scenes(scenes_path);
  std::vector<PickRecord> records;
  records.reserve(file.scenes.size() *
                  static_cast<size_t>(cfg.picks_per_scene));
  size_t infeasible = 0;
  int global = 0;
  for (const auto& scene : file.scenes) {
    const SensorFrame frame = render_sensor(scene, cfg.resolution);
    const FrameContext ctx = make_context(frame);
    const SegmentSummary* target = select_target(ctx);
    for (int p = 0; p < cfg.picks_per_scene; ++p, ++global) {
      const uint64_t pick_seed =
          derive_seed(scene.seed, static_cast<uint64_t>(global));
      PickRecord rec;
      rec.scene_seed = scene.seed;
      rec.pick_index = global;
      std::optional<PickAction> act;
      if (target)
        act = run_control_pick(frame, ctx, *target, cfg.k_candidates, cfg.psp,
                               derive_seed(pick_seed, "candidates"), cfg.eoat,
                               cfg.workspace);
      if (act) {
        rec.action = *act;
        RngStream outcome(derive_seed(pick_seed, "outcome"));
        rec.outcome = simulate_execute(frame, ctx, *act, cfg.oracle, outcome,
                                       cfg.eoat, cfg.workspace);
      } else {
        rec.action.target_segment = SensorFrame::kEmpty;
        rec.outcome.result = PickResult::Infeasible;
        ++infeasible;
      }
      records.push_back(std::move(rec));
    }
  }
  io::write_pick_log(out_path, records, cfg.resolution, cfg.seed);
  return {records.size(), infeasible};
}

struct DatasetSummary {
  size_t train = 0;
  size_t test = 0;
};

// Streams scenes one frame at a time (records are grouped by scene in the
// log) so the full frame set never lives in memory at once.
inline DatasetSummary cmd_gen_dataset(const RunConfig& cfg,
                                      const std::string& scenes_path,
                                      const std::string& picks_path,
                                      const std::string& out_path) {
  validate(cfg);
  const auto scenes = io::read_scenes(scenes_path);
  const auto log = io::read_pick_log(picks_path);
  std::map<uint64_t, const Scene*> by_seed;
  for (const auto& s : scenes.scenes) by_seed[s.seed] = &s;

  const uint64_t ds_seed = stage_seed(cfg, "dataset");
  std::vector<std::vector<TrainingPair>> per_pick;
  per_pick.reserve(log.records.size());
  for (size_t i = 0; i < log.records.size();) {
    const uint64_t ss = log.records[i].scene_seed;
    const auto it = by_seed.find(ss);
    if (it == by_seed.end())
      throw DataFormatError("pick log references a scene seed not present in " +
                            scenes_path);
    const SensorFrame frame = render_sensor(*it->second, log.resolution);
    const FrameContext ctx = make_context(frame);
    for (; i < log.records.size() && log.records[i].scene_seed == ss; ++i) {
      const auto& rec = log.records[i];
      if (rec.action.target_segment == SensorFrame::kEmpty) {
        per_pick.emplace_back();
        continue;
      }
      per_pick.push_back(pairs_for_pick(frame, ctx, rec.action, cfg.noise,
                                        cfg.psp, ds_seed, rec.scene_seed,
                                        rec.pick_index, cfg.eoat));
    }
  }
  const Dataset ds = split_dataset(std::move(per_pick), cfg.noise,
                                   cfg.split_fraction, ds_seed);
  io::write_dataset(out_path, ds);
  return {ds.train.size(), ds.test.size()};
}

struct TrainResult {
  ModelKind kind = ModelKind::Gbdt;
  std::array<double, 3> rmse{};  // held-out, (m, m, rad)
  std::string table;
};

inline std::string rmse_table(ModelKind kind, const std::array<double, 3>& r) {
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-14s %12s\n", "dimension",
                to_string(kind));
  out += buf;
  const char* labels[3] = {"p_x (meters)", "p_y (meters)", "r_z (radians)"};
  for (int k = 0; k < 3; ++k) {
    std::snprintf(buf, sizeof(buf), "%-14s %12.5f\n", labels[k], r[k]);
    out += buf;
  }
  return out;
}

inline TrainResult cmd_train(const RunConfig& cfg,
                             const std::string& dataset_path, ModelKind kind,
                             const std::string& model_out) {
  validate(cfg);
  const Dataset ds = io::read_dataset(dataset_path);
  const uint64_t train_seed = stage_seed(cfg, "train");
  const AutoregressiveChain chain = train_chain(ds, kind, cfg.chain,
                                                train_seed);
  io::write_chain(model_out, chain, cfg.chain, train_seed);
  TrainResult r;
  r.kind = kind;
  r.rmse = rmse_by_dimension(chain, ds.test.empty() ? ds.train : ds.test);
  r.table = rmse_table(kind, r.rmse);
  return r;
}

inline AbReport cmd_abtest(const RunConfig& cfg, const std::string& model_path,
                           const std::string& report_json_path,
                           const std::string& report_text_path) {
  validate(cfg);
  const auto model = io::read_chain(model_path);
  const AbConfig ab = make_ab_config(cfg);
  const uint64_t ab_seed = stage_seed(cfg, "abtest");
  const AbReport report = run_ab(ab, model.chain, ab_seed);

  try {
    const json meta{{"master_seed", cfg.seed},
                    {"abtest_seed", ab_seed},
                    {"model", model_path},
                    {"inducts", ab.inducts}};
    io::write_report(report_json_path, report, meta);
    auto out = io::open_out(report_text_path);
    out << report_text(report);
    if (!out) throw PipelineError("failed writing " + report_text_path);
  } catch (...) {
    std::remove(report_json_path.c_str());
    std::remove(report_text_path.c_str());
    throw;
  }
  return report;
}

struct OptimizeSummary {
  uint64_t scene_seed = 0;
  PickAction initial;
  PickAction refined;
  double initial_score = 0.0;
  double refined_score = 0.0;
  RefinementTrace trace;
};

// Shared by `optimize` and `dump-trace`: rebuild one scene, take the control
// pick, refine it with the loaded chain.
inline OptimizeSummary refine_one(const RunConfig& cfg,
                                  const AutoregressiveChain& chain,
                                  uint64_t scene_seed) {
  const Scene scene = generate_scene(cfg.scene, scene_seed);
  const SensorFrame frame = render_sensor(scene, cfg.resolution);
  const FrameContext ctx = make_context(frame);
  const SegmentSummary* target = select_target(ctx);
  std::optional<PickAction> control;
  if (target)
    control = run_control_pick(frame, ctx, *target, cfg.k_candidates, cfg.psp,
                               derive_seed(scene_seed, "candidates"), cfg.eoat,
                               cfg.workspace);
  if (!control)
    throw PipelineError("no feasible control pick on the requested scene");

  OptimizeSummary s;
  s.scene_seed = scene_seed;
  s.initial = *control;
  auto [refined, trace] =
      optimize_pick(frame, ctx, *control, chain, cfg.psp, cfg.refine_iters,
                    cfg.eoat, cfg.step_scale);
  s.refined = refined;
  s.trace = std::move(trace);
  s.initial_score = s.trace.steps.front().score;
  s.refined_score = s.trace.steps[static_cast<size_t>(s.trace.best_index)]
                        .score;
  return s;
}

inline OptimizeSummary cmd_optimize(const RunConfig& cfg,
                                    const std::string& model_path,
                                    uint64_t scene_seed,
                                    const std::string& out_path) {
  validate(cfg);
  const auto model = io::read_chain(model_path);
  OptimizeSummary s = refine_one(cfg, model.chain, scene_seed);
  if (!out_path.empty()) {
    json j = io::make_header("refined-pick");
    j["scene_seed"] = s.scene_seed;
    j["initial"] = s.initial;
    j["refined"] = s.refined;
    j["initial_score"] = s.initial_score;
    j["refined_score"] = s.refined_score;
    auto out = io::open_out(out_path);
    out << j.dump(2) << '\n';
  }
  return s;
}

inline OptimizeSummary cmd_dump_trace(const RunConfig& cfg,
                                      const std::string& model_path,
                                      uint64_t scene_seed,
                                      const std::string& out_path) {
  validate(cfg);
  const auto model = io::read_chain(model_path);
  OptimizeSummary s = refine_one(cfg, model.chain, scene_seed);
  json j = io::make_header("trace");
  j["scene_seed"] = s.scene_seed;
  j["trace"] = s.trace;
  auto out = io::open_out(out_path);
  out << j.dump(2) << '\n';
  return s;
}

}  // namespace pickopt::cli

#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pickopt/chain.hpp"
#include "pickopt/datagen.hpp"
#include "pickopt/eval.hpp"
#include "pickopt/gbdt.hpp"
#include "pickopt/mlp.hpp"
#include "pickopt/pick.hpp"
#include "pickopt/scene.hpp"
#include "pickopt/success.hpp"

namespace pickopt {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

// ---- basic value types ----------------------------------------------------

inline void to_json(json& j, const Vec2& v) { j = json::array({v.x, v.y}); }
inline void from_json(const json& j, Vec2& v) {
  v.x = j.at(0).get<double>();
  v.y = j.at(1).get<double>();
}
inline void to_json(json& j, const Vec3& v) {
  j = json::array({v.x, v.y, v.z});
}
inline void from_json(const json& j, Vec3& v) {
  v.x = j.at(0).get<double>();
  v.y = j.at(1).get<double>();
  v.z = j.at(2).get<double>();
}
inline void to_json(json& j, const Rect& r) {
  j = json::array({r.xmin, r.ymin, r.xmax, r.ymax});
}
inline void from_json(const json& j, Rect& r) {
  r.xmin = j.at(0).get<double>();
  r.ymin = j.at(1).get<double>();
  r.xmax = j.at(2).get<double>();
  r.ymax = j.at(3).get<double>();
}

// ---- scene ------------------------------------------------------------------

inline void to_json(json& j, const PackageSpec& p) {
  j = json{{"id", p.id},           {"kind", to_string(p.kind)},
           {"center", p.center},   {"yaw", p.yaw},
           {"dims", p.dims},       {"top_tilt", p.top_tilt}};
}
inline void from_json(const json& j, PackageSpec& p) {
  p.id = j.at("id").get<int>();
  p.kind = package_kind_from_string(j.at("kind").get<std::string>());
  p.center = j.at("center").get<Vec3>();
  p.yaw = j.at("yaw").get<double>();
  p.dims = j.at("dims").get<Vec3>();
  p.top_tilt = j.at("top_tilt").get<Vec2>();
}

inline void to_json(json& j, const Scene& s) {
  j = json{{"seed", s.seed},
           {"conveyor_bounds", s.conveyor_bounds},
           {"packages", s.packages}};
}
inline void from_json(const json& j, Scene& s) {
  s.seed = j.at("seed").get<uint64_t>();
  s.conveyor_bounds = j.at("conveyor_bounds").get<Rect>();
  s.packages = j.at("packages").get<std::vector<PackageSpec>>();
}

inline void to_json(json& j, const KindRanges& r) {
  j = json{{"len", json::array({r.len_min, r.len_max})},
           {"wid", json::array({r.wid_min, r.wid_max})},
           {"hgt", json::array({r.hgt_min, r.hgt_max})},
           {"tilt_max", r.tilt_max}};
}
inline void from_json(const json& j, KindRanges& r) {
  r.len_min = j.at("len").at(0).get<double>();
  r.len_max = j.at("len").at(1).get<double>();
  r.wid_min = j.at("wid").at(0).get<double>();
  r.wid_max = j.at("wid").at(1).get<double>();
  r.hgt_min = j.at("hgt").at(0).get<double>();
  r.hgt_max = j.at("hgt").at(1).get<double>();
  r.tilt_max = j.at("tilt_max").get<double>();
}

inline void to_json(json& j, const SceneConfig& c) {
  j = json{{"count", json::array({c.count_min, c.count_max})},
           {"weights",
            json{{"box", c.weight_box},
                 {"polybag", c.weight_polybag},
                 {"envelope", c.weight_envelope}}},
           {"box", c.box},
           {"polybag", c.polybag},
           {"envelope", c.envelope},
           {"pile_probability", c.pile_probability},
           {"conveyor_bounds", c.conveyor_bounds}};
}
inline void from_json(const json& j, SceneConfig& c) {
  c.count_min = j.at("count").at(0).get<int>();
  c.count_max = j.at("count").at(1).get<int>();
  c.weight_box = j.at("weights").at("box").get<double>();
  c.weight_polybag = j.at("weights").at("polybag").get<double>();
  c.weight_envelope = j.at("weights").at("envelope").get<double>();
  c.box = j.at("box").get<KindRanges>();
  c.polybag = j.at("polybag").get<KindRanges>();
  c.envelope = j.at("envelope").get<KindRanges>();
  c.pile_probability = j.at("pile_probability").get<double>();
  c.conveyor_bounds = j.at("conveyor_bounds").get<Rect>();
}

// ---- pick -------------------------------------------------------------------

inline void to_json(json& j, const PickAction& a) {
  j = json{{"x", a.x},       {"y", a.y},
           {"r", a.r},       {"cups", a.cups},
           {"z", a.z},       {"normal", a.normal},
           {"target_segment", a.target_segment}};
}
inline void from_json(const json& j, PickAction& a) {
  a.x = j.at("x").get<double>();
  a.y = j.at("y").get<double>();
  a.r = j.at("r").get<double>();
  a.cups = j.at("cups").get<std::vector<int>>();
  a.z = j.at("z").get<double>();
  a.normal = j.at("normal").get<Vec3>();
  a.target_segment = j.at("target_segment").get<int>();
}

inline void to_json(json& j, const PickOutcome& o) {
  j = json{{"result", to_string(o.result)},
           {"multipick", o.multipick},
           {"p_true", o.p_true}};
}
inline void from_json(const json& j, PickOutcome& o) {
  o.result = pick_result_from_string(j.at("result").get<std::string>());
  o.multipick = j.at("multipick").get<bool>();
  o.p_true = j.at("p_true").get<double>();
}

// One executed pick as persisted in the pick log.
struct PickRecord {
  uint64_t scene_seed = 0;
  int pick_index = 0;
  PickAction action;
  PickOutcome outcome;
};

inline void to_json(json& j, const PickRecord& r) {
  j = json{{"scene_seed", r.scene_seed},
           {"pick_index", r.pick_index},
           {"action", r.action},
           {"outcome", r.outcome}};
}
inline void from_json(const json& j, PickRecord& r) {
  r.scene_seed = j.at("scene_seed").get<uint64_t>();
  r.pick_index = j.at("pick_index").get<int>();
  r.action = j.at("action").get<PickAction>();
  r.outcome = j.at("outcome").get<PickOutcome>();
}

inline void to_json(json& j, const EoatModel& e) {
  j = json{{"cup_centers", std::vector<Vec2>(e.cup_centers.begin(),
                                             e.cup_centers.end())},
           {"cup_radius", e.cup_radius},
           {"footprint", e.footprint},
           {"seal_rmse_max", e.seal_rmse_max},
           {"seal_dz_max", e.seal_dz_max}};
}
inline void from_json(const json& j, EoatModel& e) {
  const auto centers = j.at("cup_centers").get<std::vector<Vec2>>();
  if (centers.size() != 8)
    throw DataFormatError("eoat: expected exactly 8 cup centers");
  std::copy(centers.begin(), centers.end(), e.cup_centers.begin());
  e.cup_radius = j.at("cup_radius").get<double>();
  e.footprint = j.at("footprint").get<double>();
  e.seal_rmse_max = j.at("seal_rmse_max").get<double>();
  e.seal_dz_max = j.at("seal_dz_max").get<double>();
}

inline void to_json(json& j, const WorkspaceConfig& w) {
  j = json{{"arm_base", w.arm_base},
           {"reach", w.reach},
           {"tilt_max", w.tilt_max},
           {"min_cups", w.min_cups}};
}
inline void from_json(const json& j, WorkspaceConfig& w) {
  w.arm_base = j.at("arm_base").get<Vec3>();
  w.reach = j.at("reach").get<double>();
  w.tilt_max = j.at("tilt_max").get<double>();
  w.min_cups = j.at("min_cups").get<int>();
}

// ---- success models ---------------------------------------------------------

inline void to_json(json& j, const TrueSuccessModel& m) {
  j = json{{"weights", m.weights},
           {"bias", m.bias},
           {"kind_penalties", m.kind_penalties}};
}
inline void from_json(const json& j, TrueSuccessModel& m) {
  m.weights = j.at("weights").get<std::map<std::string, double>>();
  m.bias = j.at("bias").get<double>();
  m.kind_penalties =
      j.at("kind_penalties").get<std::map<std::string, double>>();
}

inline void to_json(json& j, const PspModel& m) {
  j = json{{"base", m.base},
           {"noise_amplitude", m.noise_amplitude},
           {"smoothing", m.smoothing}};
}
inline void from_json(const json& j, PspModel& m) {
  m.base = j.at("base").get<TrueSuccessModel>();
  m.noise_amplitude = j.at("noise_amplitude").get<double>();
  m.smoothing = j.at("smoothing").get<double>();
}

// ---- datagen ----------------------------------------------------------------

inline void to_json(json& j, const NoiseConfig& n) {
  j = json{{"sigma_pos", n.sigma_pos},
           {"sigma_rot", n.sigma_rot},
           {"n_perturb", n.n_perturb}};
}
inline void from_json(const json& j, NoiseConfig& n) {
  n.sigma_pos = j.at("sigma_pos").get<double>();
  n.sigma_rot = j.at("sigma_rot").get<double>();
  n.n_perturb = j.at("n_perturb").get<int>();
}

inline void to_json(json& j, const TrainingPair& p) {
  j = json{{"phi", p.phi.values},
           {"dx", p.dx},
           {"dy", p.dy},
           {"dr", p.dr},
           {"p_low", p.p_low},
           {"p_high", p.p_high},
           {"prov", json::array({p.provenance.scene_seed,
                                 p.provenance.pick_index,
                                 p.provenance.perturb_index})},
           {"low", json::array({p.low_x, p.low_y, p.low_r})},
           {"high", json::array({p.high_x, p.high_y, p.high_r})}};
}
inline void from_json(const json& j, TrainingPair& p) {
  const auto phi = j.at("phi").get<std::vector<double>>();
  if (phi.size() != kFeatureDim)
    throw DataFormatError("training pair: phi length != 78");
  std::copy(phi.begin(), phi.end(), p.phi.values.begin());
  p.dx = j.at("dx").get<double>();
  p.dy = j.at("dy").get<double>();
  p.dr = j.at("dr").get<double>();
  p.p_low = j.at("p_low").get<double>();
  p.p_high = j.at("p_high").get<double>();
  p.provenance.scene_seed = j.at("prov").at(0).get<uint64_t>();
  p.provenance.pick_index = j.at("prov").at(1).get<int>();
  p.provenance.perturb_index = j.at("prov").at(2).get<int>();
  p.low_x = j.at("low").at(0).get<double>();
  p.low_y = j.at("low").at(1).get<double>();
  p.low_r = j.at("low").at(2).get<double>();
  p.high_x = j.at("high").at(0).get<double>();
  p.high_y = j.at("high").at(1).get<double>();
  p.high_r = j.at("high").at(2).get<double>();
}

// ---- learners ---------------------------------------------------------------

inline void to_json(json& j, const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes)
    nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right,
                                 n.value}));
  j = json{{"max_depth", t.max_depth}, {"nodes", nodes}};
}
inline void from_json(const json& j, RegressionTree& t) {
  t.max_depth = j.at("max_depth").get<int>();
  t.nodes.clear();
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.value = n.at(4).get<double>();
    t.nodes.push_back(node);
  }
}

inline void to_json(json& j, const GbdtModel& m) {
  j = json{{"learning_rate", m.learning_rate},
           {"base_prediction", m.base_prediction},
           {"input_dim", m.input_dim},
           {"train_mse", m.train_mse},
           {"trees", m.trees}};
}
inline void from_json(const json& j, GbdtModel& m) {
  m.learning_rate = j.at("learning_rate").get<double>();
  m.base_prediction = j.at("base_prediction").get<double>();
  m.input_dim = j.at("input_dim").get<int>();
  m.train_mse = j.at("train_mse").get<std::vector<double>>();
  m.trees = j.at("trees").get<std::vector<RegressionTree>>();
}

inline void to_json(json& j, const MlpModel& m) {
  j = json{{"layer_sizes", m.layer_sizes}, {"weights", m.weights},
           {"biases", m.biases},           {"input_mean", m.input_mean},
           {"input_std", m.input_std}};
}
inline void from_json(const json& j, MlpModel& m) {
  m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  m.input_mean = j.at("input_mean").get<std::vector<double>>();
  m.input_std = j.at("input_std").get<std::vector<double>>();
}

inline void to_json(json& j, const GbdtHyperparams& h) {
  j = json{{"rounds", h.rounds},
           {"max_depth", h.max_depth},
           {"learning_rate", h.learning_rate},
           {"subsample", h.subsample}};
}
inline void from_json(const json& j, GbdtHyperparams& h) {
  h.rounds = j.at("rounds").get<int>();
  h.max_depth = j.at("max_depth").get<int>();
  h.learning_rate = j.at("learning_rate").get<double>();
  h.subsample = j.at("subsample").get<double>();
}

inline void to_json(json& j, const MlpHyperparams& h) {
  j = json{{"hidden", h.hidden},
           {"learning_rate", h.learning_rate},
           {"beta1", h.beta1},
           {"beta2", h.beta2},
           {"epsilon", h.epsilon},
           {"batch_size", h.batch_size},
           {"epochs", h.epochs}};
}
inline void from_json(const json& j, MlpHyperparams& h) {
  h.hidden = j.at("hidden").get<std::vector<int>>();
  h.learning_rate = j.at("learning_rate").get<double>();
  h.beta1 = j.at("beta1").get<double>();
  h.beta2 = j.at("beta2").get<double>();
  h.epsilon = j.at("epsilon").get<double>();
  h.batch_size = j.at("batch_size").get<int>();
  h.epochs = j.at("epochs").get<int>();
}

inline void to_json(json& j, const ChainConfig& c) {
  j = json{{"gbdt", c.gbdt},
           {"mlp", c.mlp},
           {"teacher_forcing", c.teacher_forcing}};
}
inline void from_json(const json& j, ChainConfig& c) {
  c.gbdt = j.at("gbdt").get<GbdtHyperparams>();
  c.mlp = j.at("mlp").get<MlpHyperparams>();
  c.teacher_forcing = j.at("teacher_forcing").get<bool>();
}

// ---- optimize ----------------------------------------------------------------

inline void to_json(json& j, const RefinementStep& s) {
  j = json{{"action", s.action},
           {"score", s.score},
           {"active_cups", s.active_cups}};
}
inline void from_json(const json& j, RefinementStep& s) {
  s.action = j.at("action").get<PickAction>();
  s.score = j.at("score").get<double>();
  s.active_cups = j.at("active_cups").get<int>();
}

inline void to_json(json& j, const RefinementTrace& t) {
  j = json{{"steps", t.steps},
           {"best_index", t.best_index},
           {"iterations_run", t.iterations_run}};
}
inline void from_json(const json& j, RefinementTrace& t) {
  t.steps = j.at("steps").get<std::vector<RefinementStep>>();
  t.best_index = j.at("best_index").get<int>();
  t.iterations_run = j.at("iterations_run").get<int>();
}

// ---- eval -------------------------------------------------------------------

inline void to_json(json& j, const MetricCi& m) {
  j = json{{"rate", m.rate}, {"ci", json::array({m.lo, m.hi})}};
}
inline void from_json(const json& j, MetricCi& m) {
  m.rate = j.at("rate").get<double>();
  m.lo = j.at("ci").at(0).get<double>();
  m.hi = j.at("ci").at(1).get<double>();
}

inline void to_json(json& j, const ArmReport& a) {
  j = json{{"inducts", a.inducts},
           {"successes", a.successes},
           {"missed", a.missed},
           {"infeasible", a.infeasible},
           {"multipick", a.multipick},
           {"missed_rate", a.missed_rate},
           {"infeasible_rate", a.infeasible_rate},
           {"multipick_rate", a.multipick_rate}};
}
inline void from_json(const json& j, ArmReport& a) {
  a.inducts = j.at("inducts").get<long>();
  a.successes = j.at("successes").get<long>();
  a.missed = j.at("missed").get<long>();
  a.infeasible = j.at("infeasible").get<long>();
  a.multipick = j.at("multipick").get<long>();
  a.missed_rate = j.at("missed_rate").get<MetricCi>();
  a.infeasible_rate = j.at("infeasible_rate").get<MetricCi>();
  a.multipick_rate = j.at("multipick_rate").get<MetricCi>();
}

inline void to_json(json& j, const AbReport& r) {
  j = json{{"control", r.control},
           {"treatment", r.treatment},
           {"relative_missed_reduction", r.relative_missed_reduction},
           {"significant", r.significant}};
}
inline void from_json(const json& j, AbReport& r) {
  r.control = j.at("control").get<ArmReport>();
  r.treatment = j.at("treatment").get<ArmReport>();
  r.relative_missed_reduction =
      j.at("relative_missed_reduction").get<double>();
  r.significant = j.at("significant").get<bool>();
}

// ---- files ------------------------------------------------------------------

namespace io {

inline json make_header(const char* format) {
  return json{{"format", format}, {"format_version", kFormatVersion}};
}

inline void check_header(const json& j, const char* format) {
  if (!j.contains("format") || !j.contains("format_version"))
    throw DataFormatError("missing format header");
  if (j.at("format").get<std::string>() != format)
    throw DataFormatError("unexpected format: expected " +
                          std::string(format) + ", got " +
                          j.at("format").get<std::string>());
  if (j.at("format_version").get<int>() != kFormatVersion)
    throw DataFormatError("unsupported format_version for " +
                          std::string(format));
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PipelineError("cannot open for writing: " + path);
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("cannot open for reading: " + path);
  return in;
}

inline json parse(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataFormatError("invalid JSON in " + where + ": " + e.what());
  }
}

inline json read_single(const std::string& path, const char* format) {
  auto in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j = parse(ss.str(), path);
  check_header(j, format);
  return j;
}

// -- scenes (JSON lines) --

inline void write_scenes(const std::string& path,
                         const std::vector<Scene>& scenes, uint64_t seed) {
  auto out = open_out(path);
  json header = make_header("scenes");
  header["count"] = scenes.size();
  header["seed"] = seed;
  out << header.dump() << '\n';
  for (const auto& s : scenes) out << json(s).dump() << '\n';
}

struct SceneFile {
  uint64_t seed = 0;
  std::vector<Scene> scenes;
};

inline SceneFile read_scenes(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw DataFormatError("empty scene file: " + path);
  json header = parse(line, path);
  check_header(header, "scenes");
  SceneFile f;
  f.seed = header.at("seed").get<uint64_t>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    f.scenes.push_back(parse(line, path).get<Scene>());
  }
  if (f.scenes.size() != header.at("count").get<size_t>())
    throw DataFormatError("scene count mismatch in " + path);
  return f;
}

// -- executed-pick log (JSON lines) --

inline void write_pick_log(const std::string& path,
                           const std::vector<PickRecord>& records,
                           double resolution, uint64_t seed) {
  auto out = open_out(path);
  json header = make_header("picks");
  header["count"] = records.size();
  header["resolution"] = resolution;
  header["seed"] = seed;
  out << header.dump() << '\n';
  for (const auto& r : records) out << json(r).dump() << '\n';
}

struct PickLogFile {
  uint64_t seed = 0;
  double resolution = 0.0;
  std::vector<PickRecord> records;
};

inline PickLogFile read_pick_log(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw DataFormatError("empty pick log: " + path);
  json header = parse(line, path);
  check_header(header, "picks");
  PickLogFile f;
  f.seed = header.at("seed").get<uint64_t>();
  f.resolution = header.at("resolution").get<double>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    f.records.push_back(parse(line, path).get<PickRecord>());
  }
  if (f.records.size() != header.at("count").get<size_t>())
    throw DataFormatError("pick record count mismatch in " + path);
  return f;
}

// -- dataset (JSON lines) --

inline void write_dataset(const std::string& path, const Dataset& ds) {
  auto out = open_out(path);
  json header = make_header("dataset");
  header["feature_dim"] = ds.feature_dim;
  header["noise"] = ds.noise;
  header["seed"] = ds.seed;
  header["train_count"] = ds.train.size();
  header["test_count"] = ds.test.size();
  out << header.dump() << '\n';
  for (const auto& p : ds.train) {
    json j = p;
    j["split"] = "train";
    out << j.dump() << '\n';
  }
  for (const auto& p : ds.test) {
    json j = p;
    j["split"] = "test";
    out << j.dump() << '\n';
  }
}

inline Dataset read_dataset(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw DataFormatError("empty dataset file: " + path);
  json header = parse(line, path);
  check_header(header, "dataset");
  Dataset ds;
  if (header.at("feature_dim").get<int>() != kFeatureDim)
    throw DataFormatError("dataset feature_dim != 78 in " + path);
  ds.noise = header.at("noise").get<NoiseConfig>();
  ds.seed = header.at("seed").get<uint64_t>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = parse(line, path);
    auto pair = j.get<TrainingPair>();
    const auto split = j.at("split").get<std::string>();
    if (split == "train")
      ds.train.push_back(std::move(pair));
    else if (split == "test")
      ds.test.push_back(std::move(pair));
    else
      throw DataFormatError("unknown split label in " + path);
  }
  if (ds.train.size() != header.at("train_count").get<size_t>() ||
      ds.test.size() != header.at("test_count").get<size_t>())
    throw DataFormatError("dataset count mismatch in " + path);
  return ds;
}

// -- chain model (single JSON object) --

struct ChainFile {
  AutoregressiveChain chain;
  ChainConfig config;
  uint64_t seed = 0;
};

inline void write_chain(const std::string& path,
                        const AutoregressiveChain& chain,
                        const ChainConfig& config, uint64_t seed) {
  json j = make_header("model");
  j["kind"] = to_string(chain.kind);
  j["feature_dim"] = chain.feature_dim;
  j["seed"] = seed;
  j["config"] = config;
  if (chain.kind == ModelKind::Gbdt)
    j["stages"] = chain.gbdt;
  else
    j["stages"] = chain.mlp;
  auto out = open_out(path);
  out << j.dump() << '\n';
}

inline ChainFile read_chain(const std::string& path) {
  json j = read_single(path, "model");
  ChainFile f;
  f.chain.kind = model_kind_from_string(j.at("kind").get<std::string>());
  f.chain.feature_dim = j.at("feature_dim").get<int>();
  f.seed = j.at("seed").get<uint64_t>();
  f.config = j.at("config").get<ChainConfig>();
  if (f.chain.kind == ModelKind::Gbdt)
    f.chain.gbdt = j.at("stages").get<std::vector<GbdtModel>>();
  else
    f.chain.mlp = j.at("stages").get<std::vector<MlpModel>>();
  validate(f.chain);
  return f;
}

// -- A/B report --

inline void write_report(const std::string& path, const AbReport& report,
                         const json& meta) {
  json j = make_header("report");
  j["meta"] = meta;
  j["report"] = report;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

inline AbReport read_report(const std::string& path) {
  json j = read_single(path, "report");
  return j.at("report").get<AbReport>();
}

// -- success-model configs --

inline void write_oracle_config(const std::string& path,
                                const TrueSuccessModel& m) {
  json j = make_header("oracle");
  j["model"] = m;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

inline TrueSuccessModel read_oracle_config(const std::string& path) {
  json j = read_single(path, "oracle");
  return j.at("model").get<TrueSuccessModel>();
}

inline void write_psp_config(const std::string& path, const PspModel& m) {
  json j = make_header("psp");
  j["model"] = m;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

inline PspModel read_psp_config(const std::string& path) {
  json j = read_single(path, "psp");
  return j.at("model").get<PspModel>();
}

}  // namespace io

// Plain-text rendering of an A/B report: one row per metric, mean rate and
// 95% CI per arm.
inline std::string report_text(const AbReport& r) {
  char buf[256];
  std::string out;
  auto row = [&](const char* name, const MetricCi& c, const MetricCi& t) {
    std::snprintf(buf, sizeof(buf),
                  "%-16s %8.4f%% [%6.4f%%, %6.4f%%]   %8.4f%% [%6.4f%%, "
                  "%6.4f%%]\n",
                  name, 100.0 * c.rate, 100.0 * c.lo, 100.0 * c.hi,
                  100.0 * t.rate, 100.0 * t.lo, 100.0 * t.hi);
    out += buf;
  };
  std::snprintf(buf, sizeof(buf), "%-16s %32s   %32s\n", "metric",
                "control (C)", "treatment (T)");
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-16s %32ld   %32ld\n", "inducts",
                r.control.inducts, r.treatment.inducts);
  out += buf;
  row("missed", r.control.missed_rate, r.treatment.missed_rate);
  row("infeasible", r.control.infeasible_rate, r.treatment.infeasible_rate);
  row("multipick", r.control.multipick_rate, r.treatment.multipick_rate);
  std::snprintf(buf, sizeof(buf), "relative missed reduction: %.4f%%\n",
                100.0 * r.relative_missed_reduction);
  out += buf;
  std::snprintf(buf, sizeof(buf), "significant (non-overlapping CIs): %s\n",
                r.significant ? "yes" : "no");
  out += buf;
  return out;
}

}  // namespace pickopt

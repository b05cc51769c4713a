#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pickopt/data_matrix.hpp"
#include "pickopt/datagen.hpp"
#include "pickopt/gbdt.hpp"
#include "pickopt/mlp.hpp"

namespace pickopt {

enum class ModelKind : int { Gbdt = 0, Mlp = 1 };

inline const char* to_string(ModelKind k) {
  return k == ModelKind::Gbdt ? "gbdt" : "mlp";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "gbdt") return ModelKind::Gbdt;
  if (s == "mlp") return ModelKind::Mlp;
  throw DataFormatError("unknown model kind: " + s);
}

struct ChainConfig {
  GbdtHyperparams gbdt;
  MlpHyperparams mlp;
  bool teacher_forcing = true;  // feed true upstream deltas during training
};

// G_x (phi), G_y (phi + dx), G_r (phi + dx + dy). During training the
// upstream inputs are ground truth under teacher forcing (or the trained
// upstream model's predictions when disabled); at inference they are always
// the chain's own predictions.
struct AutoregressiveChain {
  ModelKind kind = ModelKind::Gbdt;
  int feature_dim = kFeatureDim;
  std::vector<GbdtModel> gbdt;  // size 3 when kind == Gbdt
  std::vector<MlpModel> mlp;    // size 3 when kind == Mlp

  int input_dim(int stage) const {
    if (kind == ModelKind::Gbdt) return gbdt[stage].input_dim;
    return mlp[stage].layer_sizes[0];
  }
  double predict_stage(int stage, const std::vector<double>& in) const {
    if (static_cast<int>(in.size()) != input_dim(stage))
      throw PipelineError("chain: stage " + std::to_string(stage) +
                          " input dimension mismatch");
    if (kind == ModelKind::Gbdt) return gbdt[stage].predict(in);
    return mlp[stage].predict(in);
  }
};

inline void validate(const AutoregressiveChain& chain) {
  const auto count =
      chain.kind == ModelKind::Gbdt ? chain.gbdt.size() : chain.mlp.size();
  if (count != 3) throw DataFormatError("chain: expected 3 stage models");
  for (int s = 0; s < 3; ++s)
    if (chain.input_dim(s) != chain.feature_dim + s)
      throw DataFormatError("chain: stage " + std::to_string(s) +
                            " input dim != " +
                            std::to_string(chain.feature_dim + s));
}

inline std::array<double, 3> predict_chain(const AutoregressiveChain& chain,
                                           const FeatureVector& phi) {
  std::vector<double> in(phi.values.begin(), phi.values.end());
  const double dx = chain.predict_stage(0, in);
  in.push_back(dx);
  const double dy = chain.predict_stage(1, in);
  in.push_back(dy);
  const double dr = chain.predict_stage(2, in);
  return {dx, dy, dr};
}

inline AutoregressiveChain train_chain(const Dataset& ds, ModelKind kind,
                                       const ChainConfig& cfg, uint64_t seed) {
  const auto& pairs = ds.train;
  if (pairs.empty()) throw PipelineError("train_chain: empty training set");
  const size_t n = pairs.size();
  const size_t d = kFeatureDim;

  DataMatrix x0(n, d), x1(n, d + 1), x2(n, d + 2);
  std::vector<double> tx(n), ty(n), tr(n);
  for (size_t i = 0; i < n; ++i) {
    const auto& p = pairs[i];
    for (size_t j = 0; j < d; ++j) x0.at(i, j) = p.phi[j];
    tx[i] = p.dx;
    ty[i] = p.dy;
    tr[i] = p.dr;
  }

  AutoregressiveChain chain;
  chain.kind = kind;

  auto fit = [&](const DataMatrix& X, const std::vector<double>& t,
                 const char* tag) {
    const uint64_t s = derive_seed(seed, tag);
    if (kind == ModelKind::Gbdt)
      chain.gbdt.push_back(train_gbdt(X, t, cfg.gbdt, s));
    else
      chain.mlp.push_back(train_mlp(X, t, cfg.mlp, s));
  };

  fit(x0, tx, "gx");
  std::vector<double> up_x(n), up_y(n);
  for (size_t i = 0; i < n; ++i)
    up_x[i] = cfg.teacher_forcing
                  ? tx[i]
                  : (kind == ModelKind::Gbdt ? chain.gbdt[0].predict(x0.row(i))
                                             : chain.mlp[0].predict(x0.row(i)));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < d; ++j) x1.at(i, j) = x0.at(i, j);
    x1.at(i, d) = up_x[i];
  }

  fit(x1, ty, "gy");
  for (size_t i = 0; i < n; ++i)
    up_y[i] = cfg.teacher_forcing
                  ? ty[i]
                  : (kind == ModelKind::Gbdt ? chain.gbdt[1].predict(x1.row(i))
                                             : chain.mlp[1].predict(x1.row(i)));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < d; ++j) x2.at(i, j) = x0.at(i, j);
    x2.at(i, d) = up_x[i];
    x2.at(i, d + 1) = up_y[i];
  }

  fit(x2, tr, "gr");
  validate(chain);
  return chain;
}

// Held-out RMSE per dimension at inference settings (predicted upstream
// inputs), reported in (meters, meters, radians).
inline std::array<double, 3> rmse_by_dimension(
    const AutoregressiveChain& chain, const std::vector<TrainingPair>& pairs) {
  if (pairs.empty()) throw PipelineError("rmse_by_dimension: no pairs");
  std::array<double, 3> se{0.0, 0.0, 0.0};
  for (const auto& p : pairs) {
    const auto pred = predict_chain(chain, p.phi);
    const std::array<double, 3> target{p.dx, p.dy, p.dr};
    for (int k = 0; k < 3; ++k) {
      const double e = pred[k] - target[k];
      se[k] += e * e;
    }
  }
  for (auto& v : se) v = std::sqrt(v / static_cast<double>(pairs.size()));
  return se;
}

}  // namespace pickopt

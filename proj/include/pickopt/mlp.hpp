#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "pickopt/data_matrix.hpp"
#include "pickopt/errors.hpp"
#include "pickopt/rng.hpp"

namespace pickopt {

struct MlpHyperparams {
  std::vector<int> hidden{35, 2};
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 64;
  int epochs = 200;
};

inline void validate(const MlpHyperparams& hp) {
  if (hp.hidden.empty()) throw ConfigError("mlp: no hidden layers");
  for (int h : hp.hidden)
    if (h < 1) throw ConfigError("mlp: non-positive hidden width");
  if (hp.learning_rate <= 0.0) throw ConfigError("mlp: learning_rate <= 0");
  if (hp.batch_size < 1) throw ConfigError("mlp: batch_size < 1");
  if (hp.epochs < 0) throw ConfigError("mlp: epochs < 0");
}

// Fully-connected rectifier network with a linear scalar output. Inputs are
// standardized with the training-set statistics stored on the model.
struct MlpModel {
  std::vector<int> layer_sizes;              // {d, hidden..., 1}
  std::vector<std::vector<double>> weights;  // [l] is (out x in) row-major
  std::vector<std::vector<double>> biases;   // [l] is out
  std::vector<double> input_mean;
  std::vector<double> input_std;

  size_t layer_count() const { return weights.size(); }

  double predict(const double* x) const {
    std::vector<double> a(layer_sizes[0]);
    for (int j = 0; j < layer_sizes[0]; ++j)
      a[j] = (x[j] - input_mean[j]) / input_std[j];
    std::vector<double> z;
    for (size_t l = 0; l < layer_count(); ++l) {
      const int in = layer_sizes[l], out = layer_sizes[l + 1];
      z.assign(out, 0.0);
      for (int o = 0; o < out; ++o) {
        double s = biases[l][o];
        const double* w = weights[l].data() + static_cast<size_t>(o) * in;
        for (int j = 0; j < in; ++j) s += w[j] * a[j];
        z[o] = l + 1 < layer_sizes.size() - 1 ? std::max(0.0, s) : s;
      }
      a.swap(z);
    }
    return a[0];
  }
  double predict(const std::vector<double>& x) const { return predict(x.data()); }
};

struct MlpGradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

namespace mlp_detail {

struct ForwardPass {
  std::vector<std::vector<double>> activations;  // a[0] standardized input
  std::vector<std::vector<double>> pre;          // z per layer
};

inline double forward(const MlpModel& m, const double* x, ForwardPass& fp) {
  const size_t layers = m.layer_count();
  fp.activations.assign(layers + 1, {});
  fp.pre.assign(layers, {});
  auto& a0 = fp.activations[0];
  a0.resize(m.layer_sizes[0]);
  for (int j = 0; j < m.layer_sizes[0]; ++j)
    a0[j] = (x[j] - m.input_mean[j]) / m.input_std[j];
  for (size_t l = 0; l < layers; ++l) {
    const int in = m.layer_sizes[l], out = m.layer_sizes[l + 1];
    auto& z = fp.pre[l];
    auto& a = fp.activations[l + 1];
    z.assign(out, 0.0);
    a.assign(out, 0.0);
    const auto& prev = fp.activations[l];
    for (int o = 0; o < out; ++o) {
      double s = m.biases[l][o];
      const double* w = m.weights[l].data() + static_cast<size_t>(o) * in;
      for (int j = 0; j < in; ++j) s += w[j] * prev[j];
      z[o] = s;
      a[o] = l + 1 < layers ? std::max(0.0, s) : s;
    }
  }
  return fp.activations[layers][0];
}

// Accumulates d((pred - y)^2)/dparam into grads (which must be zeroed or
// pre-scaled by the caller).
inline double accumulate_gradients(const MlpModel& m, const double* x,
                                   double y, ForwardPass& fp,
                                   MlpGradients& grads) {
  const double pred = forward(m, x, fp);
  const double err = pred - y;
  const size_t layers = m.layer_count();
  std::vector<double> dz{2.0 * err};
  for (size_t li = layers; li-- > 0;) {
    const int in = m.layer_sizes[li], out = m.layer_sizes[li + 1];
    const auto& prev = fp.activations[li];
    auto& gw = grads.weights[li];
    auto& gb = grads.biases[li];
    for (int o = 0; o < out; ++o) {
      const double g = dz[o];
      gb[o] += g;
      double* gwrow = gw.data() + static_cast<size_t>(o) * in;
      for (int j = 0; j < in; ++j) gwrow[j] += g * prev[j];
    }
    if (li == 0) break;
    std::vector<double> da(in, 0.0);
    for (int o = 0; o < out; ++o) {
      const double g = dz[o];
      const double* w = m.weights[li].data() + static_cast<size_t>(o) * in;
      for (int j = 0; j < in; ++j) da[j] += g * w[j];
    }
    dz.assign(in, 0.0);
    for (int j = 0; j < in; ++j)
      dz[j] = fp.pre[li - 1][j] > 0.0 ? da[j] : 0.0;
  }
  return err * err;
}

}  // namespace mlp_detail

inline MlpGradients zero_gradients(const MlpModel& m) {
  MlpGradients g;
  g.weights.resize(m.layer_count());
  g.biases.resize(m.layer_count());
  for (size_t l = 0; l < m.layer_count(); ++l) {
    g.weights[l].assign(m.weights[l].size(), 0.0);
    g.biases[l].assign(m.biases[l].size(), 0.0);
  }
  return g;
}

// Single-sample analytic gradient of (pred - y)^2; the finite-difference
// test drives this directly.
inline MlpGradients mlp_gradients(const MlpModel& m, const double* x,
                                  double y) {
  MlpGradients g = zero_gradients(m);
  mlp_detail::ForwardPass fp;
  mlp_detail::accumulate_gradients(m, x, y, fp, g);
  return g;
}

inline double mlp_loss(const MlpModel& m, const double* x, double y) {
  const double e = m.predict(x) - y;
  return e * e;
}

// Mini-batch squared-error training with Adam. Deterministic for a fixed
// seed: initialization, shuffles, and update order all come from the same
// derived streams.
inline MlpModel train_mlp(const DataMatrix& X, const std::vector<double>& y,
                          const MlpHyperparams& hp, uint64_t seed) {
  validate(hp);
  if (X.n == 0) throw PipelineError("train_mlp: empty rows");
  if (X.n < 10) throw PipelineError("train_mlp: fewer than 10 rows");
  if (y.size() != X.n) throw PipelineError("train_mlp: target size mismatch");

  const size_t n = X.n;
  const size_t d = X.d;

  MlpModel m;
  m.layer_sizes.push_back(static_cast<int>(d));
  for (int h : hp.hidden) m.layer_sizes.push_back(h);
  m.layer_sizes.push_back(1);

  m.input_mean.assign(d, 0.0);
  m.input_std.assign(d, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) m.input_mean[j] += X.at(i, j);
  for (size_t j = 0; j < d; ++j) m.input_mean[j] /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) {
      const double c = X.at(i, j) - m.input_mean[j];
      m.input_std[j] += c * c;
    }
  for (size_t j = 0; j < d; ++j) {
    m.input_std[j] = std::sqrt(m.input_std[j] / static_cast<double>(n));
    if (m.input_std[j] < 1e-12) m.input_std[j] = 1.0;
  }

  RngStream init_rng(derive_seed(seed, "mlp-init"));
  const size_t layers = m.layer_sizes.size() - 1;
  m.weights.resize(layers);
  m.biases.resize(layers);
  for (size_t l = 0; l < layers; ++l) {
    const int in = m.layer_sizes[l], out = m.layer_sizes[l + 1];
    const double a = std::sqrt(6.0 / (in + out));
    m.weights[l].resize(static_cast<size_t>(in) * out);
    for (auto& w : m.weights[l]) w = init_rng.uniform(-a, a);
    m.biases[l].assign(out, 0.0);
  }

  MlpGradients grads = zero_gradients(m);
  MlpGradients mom = zero_gradients(m);
  MlpGradients vel = zero_gradients(m);
  mlp_detail::ForwardPass fp;

  RngStream shuffle_rng(derive_seed(seed, "mlp-shuffle"));
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);

  long t = 0;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    for (size_t i = n - 1; i > 0; --i)
      std::swap(idx[i], idx[shuffle_rng.uniform_int(0, static_cast<int64_t>(i))]);
    for (size_t start = 0; start < n; start += hp.batch_size) {
      const size_t end = std::min(n, start + hp.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      for (size_t l = 0; l < layers; ++l) {
        std::fill(grads.weights[l].begin(), grads.weights[l].end(), 0.0);
        std::fill(grads.biases[l].begin(), grads.biases[l].end(), 0.0);
      }
      double loss = 0.0;
      for (size_t i = start; i < end; ++i)
        loss += mlp_detail::accumulate_gradients(m, X.row(idx[i]), y[idx[i]],
                                                 fp, grads);
      if (!std::isfinite(loss))
        throw PipelineError("train_mlp: diverged at epoch " +
                            std::to_string(epoch));
      ++t;
      const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(t));
      const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(t));
      auto update = [&](std::vector<double>& p, std::vector<double>& g,
                        std::vector<double>& mo, std::vector<double>& ve) {
        for (size_t k = 0; k < p.size(); ++k) {
          const double gk = g[k] * inv;
          mo[k] = hp.beta1 * mo[k] + (1.0 - hp.beta1) * gk;
          ve[k] = hp.beta2 * ve[k] + (1.0 - hp.beta2) * gk * gk;
          p[k] -= hp.learning_rate * (mo[k] / bc1) /
                  (std::sqrt(ve[k] / bc2) + hp.epsilon);
        }
      };
      for (size_t l = 0; l < layers; ++l) {
        update(m.weights[l], grads.weights[l], mom.weights[l], vel.weights[l]);
        update(m.biases[l], grads.biases[l], mom.biases[l], vel.biases[l]);
      }
    }
  }
  return m;
}

}  // namespace pickopt

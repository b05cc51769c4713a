#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "pickopt/data_matrix.hpp"
#include "pickopt/errors.hpp"
#include "pickopt/rng.hpp"

namespace pickopt {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  int max_depth = 0;

  int leaf_index(const double* row) const {
    int i = 0;
    while (!nodes[i].is_leaf())
      i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left
                                                      : nodes[i].right;
    return i;
  }
  double predict(const double* row) const {
    return nodes[leaf_index(row)].value;
  }
};

struct GbdtHyperparams {
  int rounds = 200;
  int max_depth = 3;
  double learning_rate = 0.05;
  double subsample = 0.8;  // Bernoulli row sampling per round
};

inline void validate(const GbdtHyperparams& hp) {
  if (hp.rounds < 0) throw ConfigError("gbdt: rounds < 0");
  if (hp.max_depth < 1) throw ConfigError("gbdt: max_depth < 1");
  if (hp.learning_rate <= 0.0 || hp.learning_rate > 1.0)
    throw ConfigError("gbdt: learning_rate outside (0, 1]");
  if (hp.subsample <= 0.0 || hp.subsample > 1.0)
    throw ConfigError("gbdt: subsample outside (0, 1]");
}

struct GbdtModel {
  std::vector<RegressionTree> trees;
  double learning_rate = 0.0;
  double base_prediction = 0.0;
  int input_dim = 0;
  std::vector<double> train_mse;  // per-round diagnostic

  double predict(const double* row) const {
    double p = base_prediction;
    for (const auto& t : trees) p += learning_rate * t.predict(row);
    return p;
  }
  double predict(const std::vector<double>& row) const {
    return predict(row.data());
  }
};

namespace gbdt_detail {

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

// One boosting round's tree: exact greedy variance-reduction splits found
// level-wise over presorted feature columns, restricted to the sampled rows.
inline RegressionTree build_tree(const DataMatrix& X,
                                 const std::vector<double>& residual,
                                 const std::vector<char>& in_sample,
                                 const std::vector<std::vector<int>>& order,
                                 int max_depth) {
  const size_t n = X.n;
  const size_t d = X.d;
  RegressionTree tree;
  tree.max_depth = max_depth;
  tree.nodes.push_back({});

  std::vector<int> row_node(n);
  std::vector<double> node_sum{0.0};
  std::vector<int> node_cnt{0};
  for (size_t i = 0; i < n; ++i) {
    row_node[i] = in_sample[i] ? 0 : -1;
    if (in_sample[i]) {
      node_sum[0] += residual[i];
      ++node_cnt[0];
    }
  }

  std::vector<int> frontier{0};
  std::vector<int> slot_of;  // node id -> frontier slot, -1 if not active

  for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    const size_t m = frontier.size();
    slot_of.assign(tree.nodes.size(), -1);
    for (size_t s = 0; s < m; ++s) slot_of[frontier[s]] = static_cast<int>(s);

    std::vector<SplitCandidate> best(m);
    std::vector<double> left_sum(m);
    std::vector<int> left_cnt(m);
    std::vector<double> last_x(m);

    for (size_t f = 0; f < d; ++f) {
      std::fill(left_sum.begin(), left_sum.end(), 0.0);
      std::fill(left_cnt.begin(), left_cnt.end(), 0);
      for (int idx : order[f]) {
        const int nd = row_node[idx];
        if (nd < 0) continue;
        const int s = slot_of[nd];
        if (s < 0) continue;
        const double x = X.at(idx, f);
        if (left_cnt[s] > 0 && x > last_x[s]) {
          const int cnt = node_cnt[nd];
          const double sum = node_sum[nd];
          const int cr = cnt - left_cnt[s];
          const double sr = sum - left_sum[s];
          const double gain = left_sum[s] * left_sum[s] / left_cnt[s] +
                              sr * sr / cr - sum * sum / cnt;
          if (gain > best[s].gain + 1e-12) {
            double thr = last_x[s] + 0.5 * (x - last_x[s]);
            if (!(thr < x)) thr = last_x[s];
            best[s] = {gain, static_cast<int>(f), thr};
          }
        }
        left_sum[s] += residual[idx];
        ++left_cnt[s];
        last_x[s] = x;
      }
    }

    std::vector<int> next;
    for (size_t s = 0; s < m; ++s) {
      const int nd = frontier[s];
      if (best[s].feature < 0) continue;
      const int l = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      tree.nodes[nd].feature = best[s].feature;
      tree.nodes[nd].threshold = best[s].threshold;
      tree.nodes[nd].left = l;
      tree.nodes[nd].right = l + 1;
      node_sum.resize(tree.nodes.size(), 0.0);
      node_cnt.resize(tree.nodes.size(), 0);
      next.push_back(l);
      next.push_back(l + 1);
    }
    for (size_t i = 0; i < n; ++i) {
      const int nd = row_node[i];
      if (nd < 0 || tree.nodes[nd].is_leaf()) continue;
      const int child = X.at(i, tree.nodes[nd].feature) <=
                                tree.nodes[nd].threshold
                            ? tree.nodes[nd].left
                            : tree.nodes[nd].right;
      row_node[i] = child;
      node_sum[child] += residual[i];
      ++node_cnt[child];
    }
    frontier = std::move(next);
  }
  return tree;
}

}  // namespace gbdt_detail

// Squared-error gradient boosting. Split finding uses the per-round row
// subsample; leaf values are then refit as the mean residual over the FULL
// training set, which (with learning_rate <= 1) makes the training MSE
// non-increasing round over round even under subsampling.
inline GbdtModel train_gbdt(const DataMatrix& X,
                            const std::vector<double>& y,
                            const GbdtHyperparams& hp, uint64_t seed) {
  validate(hp);
  if (X.n == 0) throw PipelineError("train_gbdt: empty rows");
  if (X.n < 10) throw PipelineError("train_gbdt: fewer than 10 rows");
  if (y.size() != X.n) throw PipelineError("train_gbdt: target size mismatch");
  for (double t : y)
    if (!std::isfinite(t)) throw PipelineError("train_gbdt: non-finite target");

  const size_t n = X.n;
  const size_t d = X.d;

  GbdtModel model;
  model.learning_rate = hp.learning_rate;
  model.input_dim = static_cast<int>(d);
  model.base_prediction =
      std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  std::vector<std::vector<int>> order(d);
  for (size_t f = 0; f < d; ++f) {
    auto& ord = order[f];
    ord.resize(n);
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
      const double xa = X.at(a, f), xb = X.at(b, f);
      return xa < xb || (xa == xb && a < b);
    });
  }

  std::vector<double> pred(n, model.base_prediction);
  std::vector<double> residual(n);
  std::vector<char> in_sample(n);
  std::vector<int> leaf_cnt;
  std::vector<double> leaf_sum;
  std::vector<int> leaf_of(n);

  model.trees.reserve(hp.rounds);
  model.train_mse.reserve(hp.rounds);
  for (int round = 0; round < hp.rounds; ++round) {
    for (size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];

    RngStream rs(derive_seed(seed, static_cast<uint64_t>(round)));
    size_t sampled = 0;
    for (size_t i = 0; i < n; ++i) {
      in_sample[i] = rs.uniform() < hp.subsample ? 1 : 0;
      sampled += in_sample[i];
    }
    if (sampled == 0) std::fill(in_sample.begin(), in_sample.end(), 1);

    RegressionTree tree = gbdt_detail::build_tree(X, residual, in_sample,
                                                  order, hp.max_depth);

    leaf_cnt.assign(tree.nodes.size(), 0);
    leaf_sum.assign(tree.nodes.size(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      leaf_of[i] = tree.leaf_index(X.row(i));
      ++leaf_cnt[leaf_of[i]];
      leaf_sum[leaf_of[i]] += residual[i];
    }
    for (size_t j = 0; j < tree.nodes.size(); ++j)
      if (tree.nodes[j].is_leaf())
        tree.nodes[j].value = leaf_cnt[j] > 0 ? leaf_sum[j] / leaf_cnt[j] : 0.0;

    double mse = 0.0;
    for (size_t i = 0; i < n; ++i) {
      pred[i] += hp.learning_rate * tree.nodes[leaf_of[i]].value;
      const double e = y[i] - pred[i];
      mse += e * e;
    }
    model.train_mse.push_back(mse / static_cast<double>(n));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace pickopt

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "edog/gcn.hpp"
#include "edog/graph.hpp"
#include "edog/metrics.hpp"
#include "edog/scores.hpp"

namespace edog {

struct LpConfig {
  int hidden = 16;
  int epochs = 500;
  double lr = 0.01;
};

// Link-prediction detector: GCN embeddings feed a bilinear pair feature
// f_uv = sigmoid(theta_u^T W_edge theta_v), which joins the five pairwise
// link features in a logistic head. Trained end-to-end against sampled
// non-edges; maliciousness of a pair is 1 - predicted link probability.
struct LpModel {
  Matrix w1;                        // d x h
  Matrix w2;                        // h x h
  Matrix w_edge;                    // h x h, kept symmetric
  Matrix w;                         // 6 x 1 logistic weights, order [ALD x5, f_gnn]
  double bias = 0.0;
  std::array<double, 5> feat_mean{};  // z-scoring statistics of the final
  std::array<double, 5> feat_std{};   // training epoch's pair pool
  LpConfig config;
  std::uint64_t seed = 0;
};

LpModel train_lp(const Graph& g, std::uint64_t seed, const LpConfig& config = {});

EdgeScores lp_pair_scores(const LpModel& m, const Graph& g,
                          const std::vector<NodePair>& targets);

// Logistic regression over the five pairwise link features alone, same
// sampling and training scheme as train_lp.
EdgeScores ald_detector(const Graph& g, std::uint64_t seed, const LpConfig& config = {});

namespace detail {

// One training pool: pairs, 0/1 labels, and their already-standardized
// link features (pool_size x 5).
struct LpPool {
  std::vector<NodePair> pairs;
  std::vector<int> labels;
  Matrix feats;
};

struct LpGrads {
  double loss = 0.0;
  Matrix dw1;
  Matrix dw2;
  Matrix dwedge;
  Matrix dw;
  double dbias = 0.0;
};

// Full-batch loss and analytic gradients for one epoch; exposed for the
// finite-difference suite.
LpGrads lp_loss_and_grad(const Graph& g, const NormAdj& adj, const LpPool& pool,
                         const Matrix& w1, const Matrix& w2, const Matrix& wedge,
                         const Matrix& w, double bias);

}  // namespace detail

}  // namespace edog

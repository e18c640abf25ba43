#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "edog/gcn.hpp"
#include "edog/graph.hpp"
#include "edog/scores.hpp"

namespace edog {

struct GgdConfig {
  int hidden = 16;
  int epochs = 15;
  double lr = 0.001;
  int checkpoint_from = 6;  // snapshot at the end of epochs checkpoint_from..epochs
  int gen_stride = 1;       // evaluate link probabilities every k-th generation step
};

struct GgdParams {
  Matrix w1;  // d x h
  Matrix w2;  // h x h
  Matrix w;   // h x h bilinear, kept symmetric
};

// Sequential edge-generation model. A pair's link probability at generation
// step t is sigmoid(theta_u^T W theta_v) with embeddings computed on the
// partial graph built so far; detection scores average those probabilities
// over a random generation order and over the stored checkpoints.
struct GgdModel {
  GgdParams params;  // final-epoch parameters
  std::vector<GgdParams> checkpoints;
  GgdConfig config;
  std::uint64_t seed = 0;
};

GgdModel train_ggd(const Graph& g, std::uint64_t seed, const GgdConfig& config = {});

// Averaged link probability per target over one random generation order of
// the subgraph's edges. Targets are parent-space pairs and must lie inside
// the subgraph; targets never scored return 0.5.
std::map<NodePair, double> edge_link_probs(const GgdModel& m, const Subgraph& sub,
                                           const std::vector<NodePair>& targets,
                                           PrngStream& rng);

// Maliciousness = 1 - (link probability pooled over all two-hop subgraphs
// containing the pair), averaged over checkpoints when present. Pairs inside
// no subgraph score 0.5.
EdgeScores ggd_detect(const GgdModel& m, const Graph& g, const std::vector<NodePair>& targets,
                      std::uint64_t seed);

// LP-filtered variant: drop the ceil(|E|/2) edges the LP detector finds most
// suspicious, train the generation model on the remainder, then detect over
// the original graph. fit_lp_filter_ggd returns the trained model so callers
// scoring several target sets only train once; pair it with
// ggd_detect(model, g, targets, derive_seed(seed, "detect")).
GgdModel fit_lp_filter_ggd(const Graph& g, std::uint64_t seed);
EdgeScores lp_filter_ggd(const Graph& g, std::uint64_t seed);
EdgeScores lp_filter_ggd_scores(const Graph& g, const std::vector<NodePair>& targets,
                                std::uint64_t seed);

namespace detail {

struct LinkProbs {
  std::map<NodePair, double> probs;
  std::map<NodePair, int> counts;  // accumulated entries per target
};

LinkProbs edge_link_probs_impl(const GgdParams& params, const Subgraph& sub,
                               const std::vector<NodePair>& targets, PrngStream& rng,
                               int stride);

EdgeScores ggd_detect_single(const GgdParams& params, const Graph& g,
                             const std::vector<NodePair>& targets, std::uint64_t seed,
                             int stride);

struct GgdGrads {
  double loss = 0.0;
  Matrix dw1;
  Matrix dw2;
  Matrix dw;
};

// Loss and analytic gradients for one subgraph visit: binary cross-entropy
// of the averaged link probabilities against the pair labels.
GgdGrads ggd_loss_and_grad(const GgdParams& params, const Subgraph& sub,
                           const std::vector<NodePair>& targets, const std::vector<int>& labels,
                           PrngStream& rng, int stride);

// The k most suspicious pairs by score, ties broken by canonical pair order.
std::vector<NodePair> top_suspicious(const EdgeScores& scores, std::size_t k);

}  // namespace detail

}  // namespace edog

#pragma once

#include <array>
#include <vector>

#include "edog/graph.hpp"
#include "edog/scores.hpp"

namespace edog {

// BFS hop distances are capped here; unreachable pairs report the cap.
inline constexpr int kDistanceCap = 10;

// The five pairwise link features used by the LP detector and the ALD
// baseline. All are computed with the queried edge temporarily removed, so
// featurizing an existing edge never sees the edge itself.
struct PairFeatures {
  double neighbor_similarity = 0.0;     // Jaccard of the neighbor sets
  double common_neighbors = 0.0;
  double distance = 0.0;                // BFS hops, capped
  double preferential_attachment = 0.0; // degree product
  double feature_similarity = 0.0;      // cosine of the node features

  std::array<double, 5> as_array() const {
    return {neighbor_similarity, common_neighbors, distance, preferential_attachment,
            feature_similarity};
  }
};

PairFeatures ald_features(const Graph& g, NodePair pair);

// Plain heuristics, computed on the graph as-is (no edge removal).
int common_neighbors(const Graph& g, NodePair pair);
// Sum of 1/ln(deg(w)) over common neighbors w; degree <= 1 terms skipped.
double adamic_adar(const Graph& g, NodePair pair);

// Closed-form Katz index matrix (I - beta*A)^{-1} - I. Throws when
// beta * (estimated spectral radius) >= 1.
Matrix katz_matrix(const Graph& g, double beta);

inline constexpr double kKatzBeta = 0.05;

// Baseline detectors over the existing edges: the heuristic value is
// softmax-normalized across edges and inverted, since low-value links are
// the suspicious ones.
EdgeScores katz_detector_scores(const Graph& g, double beta = kKatzBeta);
EdgeScores cn_detector_scores(const Graph& g);
EdgeScores aa_detector_scores(const Graph& g);

// Exact Brandes betweenness, unnormalized, each unordered pair counted once.
std::vector<double> betweenness(const Graph& g);

// Mann-Whitney AUC: probability a malicious pair outscores a benign one,
// ties at half credit. Throws if either class is empty or a malicious pair
// is missing from the score map.
double roc_auc(const EdgeScores& scores, const std::vector<NodePair>& malicious);

}  // namespace edog

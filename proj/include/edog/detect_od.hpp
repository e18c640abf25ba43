#pragma once

#include <cstdint>
#include <vector>

#include "edog/graph.hpp"
#include "edog/scores.hpp"

namespace edog {

struct OdConfig {
  double nu = 0.5;
  bool include_betweenness = true;  // false drops log-betweenness (10-dim features)
};

// Per-endpoint neighborhood statistics over predicted classes, plus
// log-betweenness. An edge feature is the concatenation for both endpoints
// in canonical order.
struct OdFeatures {
  struct Endpoint {
    double distinct_classes = 0.0;
    double avg_class_count = 0.0;
    double max_class_count = 0.0;
    double second_class_count = 0.0;  // 0 when only one class appears
    double class_count_std = 0.0;
    double log_betweenness = 0.0;
  };
  Endpoint u;
  Endpoint v;

  std::vector<double> as_vector(bool include_betweenness = true) const;
};

// Statistics tally over the predicted classes of N(u) plus the opposite
// endpoint; for a pair that is not an edge this featurizes the graph as if
// the edge had been added.
OdFeatures od_edge_features(const Graph& g, const std::vector<int>& predicted_labels,
                            const std::vector<double>& btw, NodePair pair);

struct OcsvmModel {
  std::vector<std::vector<double>> points;  // standardized training points
  std::vector<double> alpha;                // dual coefficients, sum 1
  double rho = 0.0;
  double gamma = 0.0;
  double nu = 0.5;
  std::vector<double> mean;  // standardization statistics
  std::vector<double> std;
  bool converged = false;
  double kkt_residual = 0.0;
};

inline constexpr double kOcsvmTol = 1e-3;
inline constexpr int kOcsvmMaxIter = 100000;

// nu-one-class SVM with RBF kernel, solved in the dual by repeated
// most-violating-pair updates on the simplex constraint.
OcsvmModel fit_ocsvm(const std::vector<std::vector<double>>& features, double nu,
                     std::uint64_t seed);

// Signed distance to the learned boundary; negative marks outliers.
double ocsvm_decision(const OcsvmModel& m, const std::vector<double>& x);

// Fitted detector state: predicted labels and betweenness on the training
// graph plus the one-class SVM over its edge features.
struct OdModel {
  std::vector<int> labels;
  std::vector<double> btw;
  OcsvmModel svm;
  OdConfig config;
};

OdModel fit_od(const Graph& g, std::uint64_t seed, const OdConfig& config = {});
EdgeScores od_score_pairs(const OdModel& m, const Graph& g,
                          const std::vector<NodePair>& targets);

EdgeScores od_detect(const Graph& g, std::uint64_t seed, const OdConfig& config = {});
EdgeScores od_pair_scores(const Graph& g, const std::vector<NodePair>& targets,
                          std::uint64_t seed, const OdConfig& config = {});

}  // namespace edog

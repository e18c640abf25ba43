#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "edog/attack.hpp"
#include "edog/detect_ggd.hpp"
#include "edog/detect_lp.hpp"
#include "edog/detect_od.hpp"
#include "edog/graph.hpp"
#include "edog/metrics.hpp"
#include "edog/scores.hpp"

namespace edog {

// Maps scores to [0,1] by average rank: (rank - 1) / (N - 1), ties sharing
// their average rank; a single entry maps to 0.5.
EdgeScores rank_normalize(const EdgeScores& scores);

// Standalone GGD detector: trains on g (substream "train") and detects with
// substream "detect".
EdgeScores ggd_detector_scores(const Graph& g, const std::vector<NodePair>& targets,
                               std::uint64_t seed);

// Degree-gated ensemble. The three constituents run with seeds derived from
// the master seed by the labels "lp+ggd", "ggd" and "od"; each output is
// rank-normalized, then an edge scores the mean of all three when
// deg(u)+deg(v) > 6 in g, and the mean of the first two otherwise.
EdgeScores edog_detect(const Graph& g, std::uint64_t seed);
EdgeScores edog_pair_scores(const Graph& g, const std::vector<NodePair>& targets,
                            std::uint64_t seed);

inline constexpr int kEdogDegreeGate = 6;

// Fits every EDoG constituent once so many target sets can be scored against
// the same graph (the adaptive attacker's use case).
class EdogScorer {
 public:
  EdogScorer(const Graph& g, std::uint64_t seed);

  std::map<NodePair, double> operator()(const Graph& g,
                                        const std::vector<NodePair>& targets) const;
  EdgeScores score(const std::vector<NodePair>& targets) const;

 private:
  const Graph& g_;
  GgdModel lp_ggd_;  // trained on the LP-filtered graph
  GgdModel ggd_;
  OdModel od_;
  std::uint64_t lp_ggd_detect_seed_;
  std::uint64_t ggd_detect_seed_;
};

// Named detector dispatch: lp | ggd | lp+ggd | od | edog | ald | katz | cn | aa.
EdgeScores detect_by_name(const Graph& g, const std::string& method, std::uint64_t seed,
                          double katz_beta = kKatzBeta);

// Scores CSV: header "u,v,score", canonical pair order, 17 significant
// digits.
void save_scores(const EdgeScores& scores, const std::filesystem::path& path);
EdgeScores load_scores(const std::filesystem::path& path);

struct ExperimentConfig {
  // Dataset: a graph file, or a generator when graph_file is empty.
  std::string graph_file;
  std::string gen_kind = "ba";  // er | ba
  int n = 300;
  double p = 0.0;  // er edge probability; 0 means ln(n)/n
  int m = 1;       // ba attachment count
  std::uint64_t dataset_seed = 1;
  int feature_dim = 20;
  int smooth_rounds = 3;
  double train_frac = 0.1;

  std::string attack = "single";
  int num_targets = 5;
  std::vector<int> target_degrees;  // exact-degree target picks when set
  int min_target_degree = 1;
  std::vector<std::string> detectors{"edog", "ald", "katz"};
  std::uint64_t seed = 1;
  int retry_cap = 30;
  bool adaptive = false;
  bool include_timing = false;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig experiment_config_from_json(const std::string& text);

struct TargetRecord {
  AttackResult attack;
  int degree = 0;
  std::map<std::string, double> auc;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TargetRecord> targets;
  std::map<std::string, double> aggregate_auc;
  int attempts = 0;
  std::string warning;
  double wall_clock_seconds = 0.0;  // serialized only with include_timing
};

ExperimentReport run_experiment(const ExperimentConfig& config);
std::string report_to_json(const ExperimentReport& report);
void save_report(const ExperimentReport& report, const std::filesystem::path& path);

// Builds the configured dataset (generator or file) with features, labels
// and train mask in place.
Graph build_dataset(const ExperimentConfig& config);

struct RandomEdgeReport {
  std::vector<int> counts;
  std::map<std::string, std::vector<double>> ratios;  // per detector, per count
  std::map<std::string, double> mean_ratio;
};

// Adds k random non-edges per count, reruns the detectors, and reports the
// fraction of the top-k most suspicious edges that are NOT the random ones.
RandomEdgeReport random_edge_experiment(const Graph& g, const std::vector<int>& counts,
                                        std::uint64_t seed,
                                        const std::vector<std::string>& detectors = {
                                            "edog", "ald", "katz"});
std::string random_edge_report_to_json(const RandomEdgeReport& report);

}  // namespace edog

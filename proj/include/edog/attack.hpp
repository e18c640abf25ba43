#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edog/gcn.hpp"
#include "edog/graph.hpp"

namespace edog {

enum class AttackKind { SingleEdge, MultiDirect, MultiIndirect, Meta };

std::string attack_kind_name(AttackKind kind);
AttackKind attack_kind_from_name(const std::string& name);

// Edge budget for a profile: 1 for SingleEdge, the target's current degree
// for the multi-edge profiles, floor(0.05 * |E|) for Meta.
int attack_budget(AttackKind kind, const Graph& g, int target);

struct AttackResult {
  AttackKind kind = AttackKind::SingleEdge;
  std::optional<int> target;  // absent for Meta
  std::vector<NodePair> added_edges;
  bool success = false;
  int pre_label = -1;
  int post_label = -1;
  double pre_misclass = 0.0;  // Meta only: train-node misclassification rates
  double post_misclass = 0.0;
  std::uint64_t seed = 0;
};

// Greedy evasion attack: repeatedly add the candidate edge that maximizes
// the model's loss at the target, within the profile's constraint set, until
// the target flips or the budget runs out. The model stays fixed.
// `single_any_pair` widens the SingleEdge candidate set from target-incident
// pairs to every non-edge.
AttackResult greedy_target_attack(const Graph& g, const GcnModel& m, int target,
                                  AttackKind kind, std::uint64_t seed,
                                  bool single_any_pair = false);

// Global greedy attack on the training loss with a 5% edge budget; each step
// scores a sample of at most `kMetaCandidates` non-edges.
AttackResult meta_attack(const Graph& g, const GcnModel& m, std::uint64_t seed);

inline constexpr int kMetaCandidates = 500;

// Clean-graph pair scorer used by the adaptive attacker (the EDoG pipeline
// in practice; injected as a callback to keep this module detector-free).
using PairScorer =
    std::function<std::map<NodePair, double>(const Graph&, const std::vector<NodePair>&)>;

// Candidate edges are first scored on the clean graph and only the
// lowest-scoring quarter stays eligible; then the greedy attack runs on the
// restricted set.
AttackResult adaptive_attack(const Graph& g, const GcnModel& m, int target, AttackKind kind,
                             const PairScorer& scorer, std::uint64_t seed);

// Throws unless the result satisfies its profile's constraints against g.
void validate_attack_result(const Graph& g, const AttackResult& r);

// The profile's full candidate pair set on g (non-edges only).
std::vector<NodePair> attack_candidates(const Graph& g, int target, AttackKind kind,
                                        bool single_any_pair = false);

void save_attack_results(const std::vector<AttackResult>& rs, const std::filesystem::path& path);
std::vector<AttackResult> load_attack_results(const std::filesystem::path& path);

}  // namespace edog

#include "edog/attack.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

namespace edog {

std::string attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::SingleEdge: return "single";
    case AttackKind::MultiDirect: return "multi-direct";
    case AttackKind::MultiIndirect: return "multi-indirect";
    case AttackKind::Meta: return "meta";
  }
  throw DomainError("unknown attack kind");
}

AttackKind attack_kind_from_name(const std::string& name) {
  if (name == "single") return AttackKind::SingleEdge;
  if (name == "multi-direct") return AttackKind::MultiDirect;
  if (name == "multi-indirect") return AttackKind::MultiIndirect;
  if (name == "meta") return AttackKind::Meta;
  throw DomainError("unknown attack profile: " + name);
}

int attack_budget(AttackKind kind, const Graph& g, int target) {
  switch (kind) {
    case AttackKind::SingleEdge: return 1;
    case AttackKind::MultiDirect:
    case AttackKind::MultiIndirect: return g.degree(target);
    case AttackKind::Meta: return g.num_edges() / 20;
  }
  throw DomainError("unknown attack kind");
}

std::vector<NodePair> attack_candidates(const Graph& g, int target, AttackKind kind,
                                        bool single_any_pair) {
  g.check_node(target);
  std::vector<NodePair> out;
  switch (kind) {
    case AttackKind::SingleEdge:
      if (single_any_pair) {
        for (int a = 0; a < g.num_nodes(); ++a)
          for (int b = a + 1; b < g.num_nodes(); ++b)
            if (!g.has_edge(a, b)) out.emplace_back(a, b);
        return out;
      }
      [[fallthrough]];
    case AttackKind::MultiDirect:
      for (int w = 0; w < g.num_nodes(); ++w)
        if (w != target && !g.has_edge(target, w)) out.emplace_back(target, w);
      break;
    case AttackKind::MultiIndirect: {
      std::set<NodePair> seen;
      for (int nb : g.neighbors(target))
        for (int w = 0; w < g.num_nodes(); ++w) {
          if (w == target || w == nb || g.has_edge(nb, w)) continue;
          seen.emplace(nb, w);
        }
      out.assign(seen.begin(), seen.end());
      return out;
    }
    case AttackKind::Meta:
      throw DomainError("the meta profile has no fixed candidate set");
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

int local_label(const GcnModel& m, const Graph& g, int v) {
  const auto p = node_probs_local(m, g, v);
  int best = 0;
  for (std::size_t c = 1; c < p.size(); ++c)
    if (p[c] > p[best]) best = static_cast<int>(c);
  return best;
}

// Shared greedy loop over a fixed candidate list (already canonical-sorted).
AttackResult run_greedy(const Graph& g, const GcnModel& m, int target, AttackKind kind,
                        const std::vector<NodePair>& candidates, std::uint64_t seed) {
  AttackResult r;
  r.kind = kind;
  r.target = target;
  r.seed = seed;
  const int y = g.label(target);
  r.pre_label = y;
  r.post_label = y;

  const int budget = attack_budget(kind, g, target);
  Graph cur = g;
  double cur_loss = target_loss_local(m, cur, target, y);
  std::vector<char> used(candidates.size(), 0);
  while (static_cast<int>(r.added_edges.size()) < budget) {
    std::ptrdiff_t best = -1;
    double best_loss = cur_loss;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      cur.add_edge(candidates[i].u, candidates[i].v);
      const double loss = target_loss_local(m, cur, target, y);
      cur.remove_edge(candidates[i].u, candidates[i].v);
      if (loss > best_loss) {
        best_loss = loss;
        best = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (best < 0) break;  // no candidate improves the loss
    used[best] = 1;
    cur.add_edge(candidates[best].u, candidates[best].v);
    r.added_edges.push_back(candidates[best]);
    cur_loss = best_loss;
    r.post_label = local_label(m, cur, target);
    if (r.post_label != y) {
      r.success = true;
      break;
    }
  }
  return r;
}

void check_target_attackable(const Graph& g, const GcnModel& m, int target) {
  g.check_node(target);
  if (!g.has_label(target)) throw DomainError("attack target has no label");
  if (local_label(m, g, target) != g.label(target))
    throw DomainError("attack target is already misclassified");
}

double misclass_rate(const GcnModel& m, const Graph& g) {
  const auto pred = predict_labels(m, g);
  const auto train = g.train_nodes();
  if (train.empty()) throw DomainError("misclassification rate needs train nodes");
  int wrong = 0;
  for (int u : train)
    if (pred[u] != g.label(u)) wrong += 1;
  return static_cast<double>(wrong) / static_cast<double>(train.size());
}

}  // namespace

AttackResult greedy_target_attack(const Graph& g, const GcnModel& m, int target,
                                  AttackKind kind, std::uint64_t seed, bool single_any_pair) {
  if (kind == AttackKind::Meta)
    throw DomainError("greedy_target_attack: use meta_attack for the meta profile");
  check_target_attackable(g, m, target);
  const auto candidates = attack_candidates(g, target, kind, single_any_pair);
  if (candidates.empty()) {
    AttackResult r;
    r.kind = kind;
    r.target = target;
    r.seed = seed;
    r.pre_label = r.post_label = g.label(target);
    return r;
  }
  return run_greedy(g, m, target, kind, candidates, seed);
}

AttackResult meta_attack(const Graph& g, const GcnModel& m, std::uint64_t seed) {
  const int budget = attack_budget(AttackKind::Meta, g, 0);
  if (budget < 1) throw DomainError("meta_attack: the 5% edge budget is zero");

  PrngStream rng(seed);
  AttackResult r;
  r.kind = AttackKind::Meta;
  r.seed = seed;
  r.pre_misclass = misclass_rate(m, g);

  Graph cur = g;
  double cur_obj = train_loss(m, cur);
  const std::size_t n = static_cast<std::size_t>(g.num_nodes());
  for (int step = 0; step < budget; ++step) {
    const std::size_t available =
        n * (n - 1) / 2 - static_cast<std::size_t>(cur.num_edges());
    const std::size_t count = std::min<std::size_t>(kMetaCandidates, available);
    if (count == 0) break;
    const auto cands = sample_non_edges(cur, count, rng);
    std::ptrdiff_t best = -1;
    double best_obj = cur_obj;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      cur.add_edge(cands[i].u, cands[i].v);
      const double obj = train_loss(m, cur);
      cur.remove_edge(cands[i].u, cands[i].v);
      if (obj > best_obj) {
        best_obj = obj;
        best = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (best < 0) break;
    cur.add_edge(cands[best].u, cands[best].v);
    r.added_edges.push_back(cands[best]);
    cur_obj = best_obj;
  }
  r.post_misclass = misclass_rate(m, cur);
  r.success = r.post_misclass > r.pre_misclass;
  return r;
}

AttackResult adaptive_attack(const Graph& g, const GcnModel& m, int target, AttackKind kind,
                             const PairScorer& scorer, std::uint64_t seed) {
  if (kind == AttackKind::Meta)
    throw DomainError("adaptive_attack: the meta profile is not supported");
  check_target_attackable(g, m, target);
  const auto candidates = attack_candidates(g, target, kind);
  const std::size_t keep = candidates.size() / 4;
  if (keep == 0) {
    AttackResult r;
    r.kind = kind;
    r.target = target;
    r.seed = seed;
    r.pre_label = r.post_label = g.label(target);
    return r;
  }

  const auto scores = scorer(g, candidates);
  for (const auto& c : candidates)
    if (!scores.contains(c)) throw DomainError("adaptive_attack: scorer skipped a candidate");
  std::vector<NodePair> order = candidates;
  std::sort(order.begin(), order.end(), [&](const NodePair& a, const NodePair& b) {
    const double sa = scores.at(a);
    const double sb = scores.at(b);
    if (sa != sb) return sa < sb;
    return a < b;
  });
  std::vector<NodePair> restricted(order.begin(),
                                   order.begin() + static_cast<std::ptrdiff_t>(keep));
  std::sort(restricted.begin(), restricted.end());
  return run_greedy(g, m, target, kind, restricted, seed);
}

void validate_attack_result(const Graph& g, const AttackResult& r) {
  std::set<NodePair> seen;
  for (const auto& e : r.added_edges) {
    g.check_node(e.u);
    g.check_node(e.v);
    if (g.has_edge(e.u, e.v))
      throw DomainError("attack result re-adds an existing edge");
    if (!seen.insert(e).second) throw DomainError("attack result repeats an added edge");
  }
  const int target = r.target.value_or(-1);
  if (r.kind != AttackKind::Meta && target < 0)
    throw DomainError("target attack result without a target");
  const int budget = attack_budget(r.kind, g, target);
  if (static_cast<int>(r.added_edges.size()) > budget)
    throw DomainError("attack result exceeds its edge budget");
  for (const auto& e : r.added_edges) {
    const bool touches = e.u == target || e.v == target;
    if (r.kind == AttackKind::MultiDirect && !touches)
      throw DomainError("multi-direct attack added an edge not incident to the target");
    if (r.kind == AttackKind::MultiIndirect && touches)
      throw DomainError("multi-indirect attack added an edge incident to the target");
  }
}

namespace {

using nlohmann::json;

json result_to_json(const AttackResult& r) {
  json j;
  j["profile"] = attack_kind_name(r.kind);
  j["target"] = r.target ? json(*r.target) : json(nullptr);
  json edges = json::array();
  for (const auto& e : r.added_edges) edges.push_back(json::array({e.u, e.v}));
  j["added_edges"] = std::move(edges);
  j["success"] = r.success;
  j["pre_label"] = r.pre_label;
  j["post_label"] = r.post_label;
  j["pre_misclass"] = r.pre_misclass;
  j["post_misclass"] = r.post_misclass;
  j["seed"] = r.seed;
  return j;
}

AttackResult result_from_json(const json& j) {
  AttackResult r;
  r.kind = attack_kind_from_name(j.at("profile").get<std::string>());
  if (!j.at("target").is_null()) r.target = j.at("target").get<int>();
  for (const auto& e : j.at("added_edges"))
    r.added_edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  r.success = j.at("success").get<bool>();
  r.pre_label = j.at("pre_label").get<int>();
  r.post_label = j.at("post_label").get<int>();
  r.pre_misclass = j.value("pre_misclass", 0.0);
  r.post_misclass = j.value("post_misclass", 0.0);
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

}  // namespace

void save_attack_results(const std::vector<AttackResult>& rs,
                         const std::filesystem::path& path) {
  json j;
  json arr = json::array();
  for (const auto& r : rs) arr.push_back(result_to_json(r));
  j["results"] = std::move(arr);
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write attack file: " + path.string());
  out << j.dump(2) << "\n";
}

std::vector<AttackResult> load_attack_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open attack file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed attack json: ") + e.what());
  }
  try {
    std::vector<AttackResult> out;
    for (const auto& item : j.at("results")) out.push_back(result_from_json(item));
    return out;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("attack json schema violation: ") + e.what());
  }
}

}  // namespace edog

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "edog/detect_ggd.hpp"
#include "edog/metrics.hpp"
#include "fixtures.hpp"

using namespace edog;

namespace {

GgdParams zero_params(int d, int h) {
  GgdParams p;
  p.w1 = Matrix(static_cast<std::size_t>(d), static_cast<std::size_t>(h));
  p.w2 = Matrix(static_cast<std::size_t>(h), static_cast<std::size_t>(h));
  p.w = Matrix(static_cast<std::size_t>(h), static_cast<std::size_t>(h));
  return p;
}

}  // namespace

TEST_SUITE("ggd") {

TEST_CASE("generation loop entry counts follow the permutation position") {
  // path 0-1-2 as its own subgraph: 2 edges
  Graph g(3, 1);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  Subgraph sub = two_hop_subgraph(g, 1);
  REQUIRE(sub.graph.num_edges() == 2);

  GgdParams params = zero_params(1, 4);
  std::vector<NodePair> targets = {NodePair(0, 1), NodePair(1, 2), NodePair(0, 2)};
  PrngStream rng(0);
  auto lp = detail::edge_link_probs_impl(params, sub, targets, rng, 1);

  // whichever edge the permutation placed first has 1 entry, the second 2,
  // and the non-edge (0,2) is scored at every step
  std::vector<int> edgeCounts = {lp.counts.at(NodePair(0, 1)), lp.counts.at(NodePair(1, 2))};
  std::sort(edgeCounts.begin(), edgeCounts.end());
  CHECK(edgeCounts[0] == 1);
  CHECK(edgeCounts[1] == 2);
  CHECK(lp.counts.at(NodePair(0, 2)) == 2);
}

TEST_CASE("zero weights give probability one half everywhere") {
  Graph g(4, 2);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  Subgraph sub = two_hop_subgraph(g, 1);
  GgdParams params = zero_params(2, 4);
  GgdModel m;
  m.params = params;
  std::vector<NodePair> targets;
  for (const auto& e : sub.graph.edges())
    targets.push_back(NodePair(sub.parent_ids[static_cast<std::size_t>(e.u)],
                               sub.parent_ids[static_cast<std::size_t>(e.v)]));
  PrngStream rng(1);
  auto probs = edge_link_probs(m, sub, targets, rng);
  for (const auto& [pair, p] : probs) CHECK(p == doctest::Approx(0.5));
}

TEST_CASE("edgeless subgraph returns the sentinel") {
  GgdModel m;
  m.params = zero_params(1, 4);
  PrngStream rng(2);
  Subgraph sub;
  sub.graph = Graph(2, 1);
  sub.parent_ids = {0, 1};
  auto probs = edge_link_probs(m, sub, {NodePair(0, 1)}, rng);
  CHECK(probs.at(NodePair(0, 1)) == doctest::Approx(0.5));
}

TEST_CASE("targets outside the subgraph are rejected") {
  Graph g(5, 1);
  g.add_edge(0, 1);
  g.add_edge(3, 4);
  Subgraph sub = two_hop_subgraph(g, 0);  // nodes {0,1}
  GgdModel m;
  m.params = zero_params(1, 4);
  PrngStream rng(3);
  CHECK_THROWS_AS(edge_link_probs(m, sub, {NodePair(3, 4)}, rng), DomainError);
}

TEST_CASE("training produces ten checkpoints deterministically") {
  Graph g = fixtures::two_cliques(4);
  GgdModel a = train_ggd(g, 5);
  CHECK(a.checkpoints.size() == 10);
  GgdModel b = train_ggd(g, 5);
  REQUIRE(b.checkpoints.size() == a.checkpoints.size());
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
    CHECK(a.checkpoints[i].w1 == b.checkpoints[i].w1);
    CHECK(a.checkpoints[i].w == b.checkpoints[i].w);
  }
  // bilinear form stays symmetric
  const Matrix& w = a.params.w;
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j)
      CHECK(w(i, j) == doctest::Approx(w(j, i)).epsilon(1e-12));
}

TEST_CASE("initial loss is ln 2 with zero parameters") {
  // every pair scores 0.5, so the mean binary cross-entropy is exactly ln 2
  Graph g(4, 1);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  Subgraph sub = two_hop_subgraph(g, 1);
  GgdParams params = zero_params(1, 4);
  std::vector<NodePair> targets = {NodePair(0, 1), NodePair(1, 2)};
  std::vector<int> labels = {1, 0};
  PrngStream rng(7);
  auto grads = detail::ggd_loss_and_grad(params, sub, targets, labels, rng, 1);
  CHECK(grads.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("detection covers every requested pair with scores in range") {
  Graph g = fixtures::two_cliques(4);
  GgdModel m = train_ggd(g, 9);
  EdgeScores s = ggd_detect(m, g, g.edges(), 31);
  REQUIRE(s.scores.size() == static_cast<std::size_t>(g.num_edges()));
  for (const auto& [pair, v] : s.scores) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("zero weight model detects everything at one half") {
  Graph g = fixtures::two_cliques(3);
  GgdModel m;
  m.params = zero_params(2, 4);
  EdgeScores s = ggd_detect(m, g, g.edges(), 4);
  for (const auto& [pair, v] : s.scores) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("checkpoint averaging matches the hand average") {
  Graph g = fixtures::two_cliques(4);
  GgdModel m = train_ggd(g, 17);
  REQUIRE(m.checkpoints.size() == 10);
  const std::uint64_t seed = 23;
  EdgeScores combined = ggd_detect(m, g, g.edges(), seed);

  // each checkpoint scores under its own derived stream
  const PrngStream root(seed);
  std::map<NodePair, double> acc;
  for (std::size_t i = 0; i < m.checkpoints.size(); ++i) {
    EdgeScores one = detail::ggd_detect_single(m.checkpoints[i], g, g.edges(),
                                               root.derive(i).seed(), m.config.gen_stride);
    for (const auto& [pair, v] : one.scores) acc[pair] += v;
  }
  for (const auto& [pair, v] : combined.scores)
    CHECK(v == doctest::Approx(acc.at(pair) / 10.0).epsilon(1e-12));
}

TEST_CASE("detection is deterministic") {
  Graph g = fixtures::two_cliques(4);
  GgdModel m = train_ggd(g, 2);
  EdgeScores a = ggd_detect(m, g, g.edges(), 8);
  EdgeScores b = ggd_detect(m, g, g.edges(), 8);
  REQUIRE(a.scores.size() == b.scores.size());
  for (const auto& [pair, v] : a.scores) CHECK(v == b.scores.at(pair));
}

TEST_CASE("injected cross-clique edge scores above the median") {
  Graph g = fixtures::two_cliques(6);
  Graph attacked = g.with_edge(NodePair(0, 6));
  GgdModel m = train_ggd(attacked, 3);
  EdgeScores s = ggd_detect(m, attacked, attacked.edges(), 14);
  std::vector<double> all;
  for (const auto& [pair, v] : s.scores) all.push_back(v);
  std::sort(all.begin(), all.end());
  CHECK(s.scores.at(NodePair(0, 6)) > all[all.size() / 2]);
}

TEST_CASE("lp filter trains on the filtered graph but scores all original edges") {
  Graph g = fixtures::two_cliques(5);
  EdgeScores s = lp_filter_ggd(g, 10);
  REQUIRE(s.scores.size() == static_cast<std::size_t>(g.num_edges()));
  for (const auto& e : g.edges()) CHECK(s.scores.count(e) == 1);
}

TEST_CASE("lp filter matches fit plus detect composition") {
  Graph g = fixtures::two_cliques(4);
  const std::uint64_t seed = 44;
  EdgeScores whole = lp_filter_ggd(g, seed);
  GgdModel m = fit_lp_filter_ggd(g, seed);
  EdgeScores composed = ggd_detect(m, g, g.edges(), derive_seed(seed, "detect"));
  REQUIRE(whole.scores.size() == composed.scores.size());
  for (const auto& [pair, v] : whole.scores) CHECK(v == composed.scores.at(pair));
}

TEST_CASE("top suspicious respects scores and breaks ties canonically") {
  EdgeScores s;
  s.scores[NodePair(0, 1)] = 0.9;
  s.scores[NodePair(0, 2)] = 0.5;
  s.scores[NodePair(1, 2)] = 0.5;
  s.scores[NodePair(2, 3)] = 0.1;
  auto top = detail::top_suspicious(s, 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0] == NodePair(0, 1));
  CHECK(top[1] == NodePair(0, 2));  // tie with (1,2), canonical order wins
  CHECK(detail::top_suspicious(s, 10).size() == 4);
}

}  // TEST_SUITE

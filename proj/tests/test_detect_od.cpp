#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "edog/detect_od.hpp"
#include "edog/metrics.hpp"
#include "fixtures.hpp"

using namespace edog;

TEST_SUITE("od") {

TEST_CASE("edge features tally the neighborhood class counts") {
  // node 0 adjacent to 1,2,3 with predicted classes [1,1,2]; the scored pair
  // is (0,1) so 1 is already a neighbor
  Graph g(4, 1);
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  g.add_edge(0, 3);
  std::vector<int> labels = {0, 1, 1, 2};
  std::vector<double> btw = betweenness(g);
  OdFeatures f = od_edge_features(g, labels, btw, NodePair(0, 1));
  CHECK(f.u.distinct_classes == doctest::Approx(2.0));
  CHECK(f.u.avg_class_count == doctest::Approx(1.5));
  CHECK(f.u.max_class_count == doctest::Approx(2.0));
  CHECK(f.u.second_class_count == doctest::Approx(1.0));
  CHECK(f.u.class_count_std == doctest::Approx(0.5));  // population std of (2,1)
  // the star center has betweenness C(3,2) = 3
  CHECK(f.u.log_betweenness == doctest::Approx(std::log(3.0 + 1e-6)).epsilon(1e-9));
}

TEST_CASE("single class neighborhood leaves second count at zero") {
  Graph g(4, 1);
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  g.add_edge(0, 3);
  std::vector<int> labels = {0, 1, 1, 1};
  std::vector<double> btw(4, 0.0);
  OdFeatures f = od_edge_features(g, labels, btw, NodePair(0, 1));
  CHECK(f.u.distinct_classes == doctest::Approx(1.0));
  CHECK(f.u.avg_class_count == doctest::Approx(3.0));
  CHECK(f.u.max_class_count == doctest::Approx(3.0));
  CHECK(f.u.second_class_count == doctest::Approx(0.0));
  CHECK(f.u.class_count_std == doctest::Approx(0.0));
  CHECK(f.u.log_betweenness == doctest::Approx(std::log(1e-6)));
}

TEST_CASE("path middle node has near zero log betweenness") {
  Graph g(3, 1);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  std::vector<int> labels = {0, 0, 0};
  std::vector<double> btw = betweenness(g);
  OdFeatures f = od_edge_features(g, labels, btw, NodePair(1, 2));
  CHECK(f.u.log_betweenness == doctest::Approx(std::log(1.0 + 1e-6)).epsilon(1e-9));
}

TEST_CASE("a hypothetical pair is featurized as if the edge existed") {
  Graph g(4, 1);
  g.add_edge(0, 1);
  g.add_edge(2, 3);
  std::vector<int> labels = {0, 1, 0, 1};
  std::vector<double> btw(4, 0.0);
  OdFeatures withEdge = od_edge_features(g, labels, btw, NodePair(0, 2));
  // endpoint 0's neighborhood becomes {1, 2} with classes {1, 0}
  CHECK(withEdge.u.distinct_classes == doctest::Approx(2.0));
  CHECK(withEdge.u.avg_class_count == doctest::Approx(1.0));
}

TEST_CASE("feature vector honours the betweenness flag") {
  OdFeatures f;
  f.u.distinct_classes = 1.0;
  CHECK(f.as_vector(true).size() == 12);
  CHECK(f.as_vector(false).size() == 10);
}

TEST_CASE("class statistics only depend on the count multiset") {
  Graph g = fixtures::annotated_ba(30, 2, 5);
  std::vector<int> labels;
  for (int v = 0; v < g.num_nodes(); ++v) labels.push_back(g.label(v));
  std::vector<int> swapped;  // relabel classes by the bijection 0<->1
  for (int y : labels) swapped.push_back(1 - y);
  std::vector<double> btw = betweenness(g);
  for (const auto& e : g.edges()) {
    OdFeatures a = od_edge_features(g, labels, btw, e);
    OdFeatures b = od_edge_features(g, swapped, btw, e);
    for (const auto& [x, y] : {std::pair{a.u, b.u}, std::pair{a.v, b.v}}) {
      CHECK(x.distinct_classes == y.distinct_classes);
      CHECK(x.avg_class_count == y.avg_class_count);
      CHECK(x.max_class_count == y.max_class_count);
      CHECK(x.second_class_count == y.second_class_count);
      CHECK(x.class_count_std == doctest::Approx(y.class_count_std).epsilon(1e-12));
    }
  }
}

TEST_CASE("ocsvm rejects bad input") {
  std::vector<std::vector<double>> pts = {{0.0}, {1.0}};
  CHECK_THROWS_AS(fit_ocsvm(pts, 0.0, 1), DomainError);
  CHECK_THROWS_AS(fit_ocsvm(pts, 1.5, 1), DomainError);
  CHECK_THROWS_AS(fit_ocsvm({{0.0}}, 0.5, 1), DomainError);
}

TEST_CASE("identical points land on a common boundary") {
  std::vector<std::vector<double>> pts(6, std::vector<double>{2.0, -1.0});
  OcsvmModel m = fit_ocsvm(pts, 0.5, 3);
  double first = ocsvm_decision(m, pts[0]);
  for (const auto& p : pts) CHECK(ocsvm_decision(m, p) == doctest::Approx(first).epsilon(1e-9));
}

TEST_CASE("dual feasibility holds exactly") {
  PrngStream rng(41);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 60; ++i) pts.push_back({rng.next_gaussian(), rng.next_gaussian()});
  const double nu = 0.35;
  OcsvmModel m = fit_ocsvm(pts, nu, 7);
  const double cap = 1.0 / (nu * static_cast<double>(pts.size()));
  double sum = 0.0;
  for (double a : m.alpha) {
    CHECK(a >= -1e-15);
    CHECK(a <= cap + 1e-15);
    sum += a;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.converged);
  CHECK(m.kkt_residual <= kOcsvmTol);
}

TEST_CASE("a far outlier gets the most negative decision value") {
  PrngStream rng(11);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 100; ++i) pts.push_back({rng.next_gaussian(), rng.next_gaussian()});
  pts.push_back({10.0, 10.0});
  OcsvmModel m = fit_ocsvm(pts, 0.1, 5);
  double far = ocsvm_decision(m, pts.back());
  CHECK(far < 0.0);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) CHECK(ocsvm_decision(m, pts[i]) > far);
}

TEST_CASE("the nu property bounds the training outlier fraction") {
  PrngStream rng(29);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({rng.next_gaussian(), rng.next_gaussian()});
  for (double nu : {0.2, 0.5}) {
    OcsvmModel m = fit_ocsvm(pts, nu, 9);
    int negative = 0;
    for (const auto& p : pts)
      if (ocsvm_decision(m, p) < 0.0) ++negative;
    double frac = negative / 200.0;
    CHECK(frac >= nu - 0.15);
    CHECK(frac <= nu + 0.15);
  }
}

TEST_CASE("od detect covers all edges deterministically") {
  Graph g = fixtures::two_cliques(5);
  EdgeScores a = od_detect(g, 6);
  EdgeScores b = od_detect(g, 6);
  REQUIRE(a.scores.size() == static_cast<std::size_t>(g.num_edges()));
  for (const auto& [pair, v] : a.scores) CHECK(v == b.scores.at(pair));
}

TEST_CASE("collective injected edges stand out to the outlier detector") {
  // one clique-1 node gains three cross-clique edges: its neighborhood class
  // mix becomes unusual even though each edge individually looks legitimized
  Graph g = fixtures::two_cliques(8);
  std::vector<NodePair> injected;
  for (int v : {8, 9, 10}) {
    g.add_edge(0, v);
    injected.push_back(NodePair(0, v));
  }
  EdgeScores s = od_detect(g, 15);
  double injMean = 0.0, benMean = 0.0;
  int benCount = 0;
  for (const auto& [pair, v] : s.scores) {
    bool isInjected = std::find(injected.begin(), injected.end(), pair) != injected.end();
    if (isInjected)
      injMean += v / 3.0;
    else {
      benMean += v;
      ++benCount;
    }
  }
  benMean /= static_cast<double>(benCount);
  CHECK(injMean > benMean);
}

TEST_CASE("pair scoring matches fit plus score composition") {
  Graph g = fixtures::two_cliques(5);
  std::vector<NodePair> targets = {NodePair(0, 1), NodePair(0, 5), NodePair(2, 3)};
  EdgeScores direct = od_pair_scores(g, targets, 33);
  OdModel m = fit_od(g, 33);
  EdgeScores composed = od_score_pairs(m, g, targets);
  REQUIRE(direct.scores.size() == targets.size());
  for (const auto& [pair, v] : direct.scores) CHECK(v == composed.scores.at(pair));
}

}  // TEST_SUITE

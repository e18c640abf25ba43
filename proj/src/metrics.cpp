#include "edog/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stack>

namespace edog {

namespace {

// Sorted-list intersection size.
int intersect_size(const std::vector<int>& a, const std::vector<int>& b) {
  int count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

// BFS distance from pair.u to pair.v that never traverses the pair itself.
int skip_edge_distance(const Graph& g, NodePair pair) {
  std::vector<int> dist(g.num_nodes(), -1);
  std::queue<int> q;
  dist[pair.u] = 0;
  q.push(pair.u);
  while (!q.empty()) {
    const int a = q.front();
    q.pop();
    if (dist[a] >= kDistanceCap) break;
    for (int b : g.neighbors(a)) {
      if ((a == pair.u && b == pair.v) || (a == pair.v && b == pair.u)) continue;
      if (dist[b] < 0) {
        if (b == pair.v) return std::min(dist[a] + 1, kDistanceCap);
        dist[b] = dist[a] + 1;
        q.push(b);
      }
    }
  }
  return kDistanceCap;
}

double cosine(std::span<const double> x, std::span<const double> y) {
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return dot / std::sqrt(nx * ny);
}

}  // namespace

PairFeatures ald_features(const Graph& g, NodePair pair) {
  g.check_node(pair.u);
  g.check_node(pair.v);
  std::vector<int> nu = g.neighbors(pair.u);
  std::vector<int> nv = g.neighbors(pair.v);
  if (g.has_edge(pair.u, pair.v)) {
    nu.erase(std::lower_bound(nu.begin(), nu.end(), pair.v));
    nv.erase(std::lower_bound(nv.begin(), nv.end(), pair.u));
  }
  const int inter = intersect_size(nu, nv);
  const int uni = static_cast<int>(nu.size() + nv.size()) - inter;

  PairFeatures f;
  f.common_neighbors = inter;
  f.neighbor_similarity = uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
  f.distance = skip_edge_distance(g, pair);
  f.preferential_attachment = static_cast<double>(nu.size()) * static_cast<double>(nv.size());
  if (g.feat_dim() > 0)
    f.feature_similarity = cosine(g.features().row(pair.u), g.features().row(pair.v));
  return f;
}

int common_neighbors(const Graph& g, NodePair pair) {
  g.check_node(pair.u);
  g.check_node(pair.v);
  return intersect_size(g.neighbors(pair.u), g.neighbors(pair.v));
}

double adamic_adar(const Graph& g, NodePair pair) {
  g.check_node(pair.u);
  g.check_node(pair.v);
  const auto& a = g.neighbors(pair.u);
  const auto& b = g.neighbors(pair.v);
  double sum = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      if (g.degree(*ia) > 1) sum += 1.0 / std::log(static_cast<double>(g.degree(*ia)));
      ++ia;
      ++ib;
    }
  }
  return sum;
}

Matrix katz_matrix(const Graph& g, double beta) {
  const int n = g.num_nodes();
  Matrix a(n, n);
  for (const auto& e : g.edges()) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }

  // Spectral radius estimate: 50 power iterations from the ones vector.
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> y(n);
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    double norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int w : g.neighbors(i)) s += x[w];
      y[i] = s;
      norm2 += s * s;
    }
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) {
      lambda = 0.0;
      break;
    }
    lambda = norm;
    for (int i = 0; i < n; ++i) x[i] = y[i] / norm;
  }
  if (beta * lambda >= 1.0)
    throw DomainError("katz_matrix: beta " + std::to_string(beta) +
                      " diverges for estimated spectral radius " + std::to_string(lambda));

  // Solve (I - beta*A) K = beta*A by Gaussian elimination with partial
  // pivoting; K is then (I - beta*A)^{-1} - I.
  Matrix m(n, n);
  Matrix k(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      m(i, j) = (i == j ? 1.0 : 0.0) - beta * a(i, j);
      k(i, j) = beta * a(i, j);
    }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
    if (std::abs(m(piv, col)) < 1e-12)
      throw DomainError("katz_matrix: singular system, beta too close to divergence");
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(m(col, j), m(piv, j));
        std::swap(k(col, j), k(piv, j));
      }
    }
    const double inv = 1.0 / m(col, col);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m(r, col) * inv;
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) m(r, j) -= f * m(col, j);
      for (int j = 0; j < n; ++j) k(r, j) -= f * k(col, j);
    }
  }
  for (int i = 0; i < n; ++i) {
    const double inv = 1.0 / m(i, i);
    for (int j = 0; j < n; ++j) k(i, j) *= inv;
  }
  return k;
}

namespace {

// Softmax-normalize a heuristic over the existing edges and invert, so that
// low-value links come out suspicious.
EdgeScores inverted_softmax_scores(const Graph& g, const std::vector<double>& values,
                                   std::string name) {
  EdgeScores out;
  out.detector = std::move(name);
  const auto probs = softmax(values);
  const auto& edges = g.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) out.scores[edges[i]] = 1.0 - probs[i];
  return out;
}

}  // namespace

EdgeScores katz_detector_scores(const Graph& g, double beta) {
  const Matrix k = katz_matrix(g, beta);
  std::vector<double> values;
  values.reserve(g.edges().size());
  for (const auto& e : g.edges()) values.push_back(k(e.u, e.v));
  return inverted_softmax_scores(g, values, "katz");
}

EdgeScores cn_detector_scores(const Graph& g) {
  std::vector<double> values;
  values.reserve(g.edges().size());
  for (const auto& e : g.edges()) values.push_back(common_neighbors(g, e));
  return inverted_softmax_scores(g, values, "cn");
}

EdgeScores aa_detector_scores(const Graph& g) {
  std::vector<double> values;
  values.reserve(g.edges().size());
  for (const auto& e : g.edges()) values.push_back(adamic_adar(g, e));
  return inverted_softmax_scores(g, values, "aa");
}

std::vector<double> betweenness(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<double> cb(n, 0.0);
  std::vector<int> dist(n), sigma(n), order;
  std::vector<double> delta(n);
  std::vector<std::vector<int>> preds(n);
  order.reserve(n);

  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto& p : preds) p.clear();
    order.clear();

    std::queue<int> q;
    dist[s] = 0;
    sigma[s] = 1;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      order.push_back(v);
      for (int w : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int w = *it;
      for (int v : preds[w])
        delta[v] += (static_cast<double>(sigma[v]) / sigma[w]) * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  // Each unordered source-target pair was visited twice.
  for (double& x : cb) x *= 0.5;
  return cb;
}

double roc_auc(const EdgeScores& scores, const std::vector<NodePair>& malicious) {
  const std::set<NodePair> mal(malicious.begin(), malicious.end());
  for (const auto& e : mal)
    if (!scores.scores.contains(e)) throw DomainError("roc_auc: malicious pair was not scored");

  std::vector<std::pair<double, bool>> pts;
  pts.reserve(scores.scores.size());
  for (const auto& [pair, s] : scores.scores) pts.emplace_back(s, mal.contains(pair));
  const std::size_t pos = mal.size();
  const std::size_t neg = pts.size() - pos;
  if (pos == 0 || neg == 0) throw DomainError("roc_auc: need both malicious and benign pairs");

  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < pts.size()) {
    std::size_t j = i;
    while (j < pts.size() && pts[j].first == pts[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t t = i; t < j; ++t)
      if (pts[t].second) rank_sum_pos += avg_rank;
    i = j;
  }
  const double p = static_cast<double>(pos);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

}  // namespace edog

#include "edog/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

namespace edog {

void Graph::add_edge(int a, int b) {
  check_node(a);
  check_node(b);
  if (a == b) throw DomainError("self-loops are not allowed");
  NodePair e(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it != edges_.end() && *it == e) return;
  edges_.insert(it, e);
  auto& nu = adj_[e.u];
  nu.insert(std::lower_bound(nu.begin(), nu.end(), e.v), e.v);
  auto& nv = adj_[e.v];
  nv.insert(std::lower_bound(nv.begin(), nv.end(), e.u), e.u);
}

void Graph::remove_edge(int a, int b) {
  NodePair e(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it == edges_.end() || *it != e) return;
  edges_.erase(it);
  auto& nu = adj_[e.u];
  nu.erase(std::lower_bound(nu.begin(), nu.end(), e.v));
  auto& nv = adj_[e.v];
  nv.erase(std::lower_bound(nv.begin(), nv.end(), e.u));
}

bool Graph::has_edge(int a, int b) const {
  if (a == b) return false;
  if (a < 0 || b < 0 || a >= num_nodes_ || b >= num_nodes_) return false;
  const auto& n = adj_[a];
  return std::binary_search(n.begin(), n.end(), b);
}

void Graph::set_features(Matrix x) {
  if (x.rows() != static_cast<std::size_t>(num_nodes_))
    throw DomainError("feature matrix row count must equal num_nodes");
  features_ = std::move(x);
}

void Graph::set_label(int u, int y) {
  check_node(u);
  if (y < 0) throw DomainError("labels must be non-negative class ids");
  labels_[u] = y;
}

int Graph::num_classes() const {
  int c = 0;
  for (int y : labels_) c = std::max(c, y + 1);
  return c;
}

std::vector<int> Graph::train_nodes() const {
  std::vector<int> out;
  for (int u = 0; u < num_nodes_; ++u)
    if (train_[u]) out.push_back(u);
  return out;
}

Graph Graph::with_edge(NodePair e) const {
  Graph g = *this;
  g.add_edge(e.u, e.v);
  return g;
}

int Subgraph::local_id(int parent) const {
  auto it = std::lower_bound(parent_ids.begin(), parent_ids.end(), parent);
  if (it == parent_ids.end() || *it != parent) return -1;
  return static_cast<int>(it - parent_ids.begin());
}

Subgraph two_hop_subgraph(const Graph& g, int center) {
  g.check_node(center);
  std::vector<int> dist(g.num_nodes(), -1);
  std::queue<int> q;
  dist[center] = 0;
  q.push(center);
  std::vector<int> nodes{center};
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    if (dist[u] == 2) continue;
    for (int w : g.neighbors(u)) {
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        nodes.push_back(w);
        q.push(w);
      }
    }
  }
  std::sort(nodes.begin(), nodes.end());

  Subgraph sub;
  sub.parent_ids = nodes;
  Graph local(static_cast<int>(nodes.size()), g.feat_dim());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (int j = 0; j < g.feat_dim(); ++j) local.set_feature(static_cast<int>(i), j, g.features()(nodes[i], j));
    if (g.has_label(nodes[i])) local.set_label(static_cast<int>(i), g.label(nodes[i]));
    local.set_train(static_cast<int>(i), g.is_train(nodes[i]));
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (int w : g.neighbors(nodes[i])) {
      if (w > nodes[i]) {
        auto it = std::lower_bound(nodes.begin(), nodes.end(), w);
        if (it != nodes.end() && *it == w)
          local.add_edge(static_cast<int>(i), static_cast<int>(it - nodes.begin()));
      }
    }
  }
  sub.graph = std::move(local);
  return sub;
}

std::vector<Subgraph> sample_subgraphs(const Graph& g) {
  std::vector<Subgraph> subs;
  subs.reserve(g.num_nodes());
  for (int u = 0; u < g.num_nodes(); ++u) subs.push_back(two_hop_subgraph(g, u));
  return subs;
}

Graph gen_erdos_renyi(int n, double p, std::uint64_t seed) {
  if (n < 1) throw DomainError("gen_erdos_renyi: n must be >= 1");
  if (p < 0.0 || p > 1.0) throw DomainError("gen_erdos_renyi: p must be in [0,1]");
  Graph g(n);
  PrngStream rng(seed);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.next_double() < p) g.add_edge(i, j);
  return g;
}

Graph gen_barabasi_albert(int n, int m, std::uint64_t seed) {
  if (m < 1) throw DomainError("gen_barabasi_albert: m must be >= 1");
  if (m >= n) throw DomainError("gen_barabasi_albert: m must be < n");
  Graph g(n);
  PrngStream rng(seed);
  // Degree-weighted sampling via the repeated-endpoints list.
  std::vector<int> endpoints;
  for (int i = 0; i <= m; ++i)
    for (int j = i + 1; j <= m; ++j) {
      g.add_edge(i, j);
      endpoints.push_back(i);
      endpoints.push_back(j);
    }
  std::vector<int> chosen;
  for (int u = m + 1; u < n; ++u) {
    chosen.clear();
    while (static_cast<int>(chosen.size()) < m) {
      int t = endpoints[rng.next_below(endpoints.size())];
      if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) chosen.push_back(t);
    }
    for (int t : chosen) {
      g.add_edge(u, t);
      endpoints.push_back(u);
      endpoints.push_back(t);
    }
  }
  return g;
}

namespace detail {

void smooth_embeddings(const Graph& g, Matrix& e, int rounds) {
  const std::size_t n = e.rows();
  const std::size_t d = e.cols();
  for (int r = 0; r < rounds; ++r) {
    Matrix next(n, d);
    for (std::size_t u = 0; u < n; ++u)
      for (int w : g.neighbors(static_cast<int>(u)))
        for (std::size_t i = 0; i < d; ++i) next(u, i) += e(static_cast<std::size_t>(w), i);
    for (std::size_t u = 0; u < n; ++u) {
      double norm2 = 0.0;
      for (std::size_t i = 0; i < d; ++i) norm2 += next(u, i) * next(u, i);
      if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t i = 0; i < d; ++i) e(u, i) = next(u, i) * inv;
      }
      // else: keep the previous vector (isolated node or zero sum).
    }
  }
}

}  // namespace detail

void synth_annotate(Graph& g, int dim, int rounds, std::uint64_t seed) {
  if (g.feat_dim() != 0) throw DomainError("synth_annotate: graph already has features");
  PrngStream rng(seed);
  const int n = g.num_nodes();
  Matrix e(n, dim);
  for (int u = 0; u < n; ++u)
    for (int i = 0; i < dim; ++i) e(u, i) = rng.next_gaussian();
  detail::smooth_embeddings(g, e, rounds);

  Matrix x(n, dim);
  for (int u = 0; u < n; ++u) {
    double esum = 0.0;
    for (int i = 0; i < dim; ++i) {
      x(u, i) = rng.next_double() < stable_sigmoid(e(u, i)) ? 1.0 : 0.0;
      esum += e(u, i);
    }
    g.set_label(u, esum > 0.0 ? 1 : 0);
  }
  g.set_features(std::move(x));
}

void assign_train_mask(Graph& g, double frac, std::uint64_t seed) {
  if (frac < 0.0 || frac > 1.0) throw DomainError("train fraction must be in [0,1]");
  std::vector<int> order(g.num_nodes());
  for (int u = 0; u < g.num_nodes(); ++u) order[u] = u;
  PrngStream rng(seed);
  rng.shuffle(order);
  const int k = static_cast<int>(std::ceil(frac * g.num_nodes()));
  for (int u = 0; u < g.num_nodes(); ++u) g.set_train(u, false);
  for (int i = 0; i < k; ++i) g.set_train(order[i], true);
}

std::vector<NodePair> sample_non_edges(const Graph& g, std::size_t count, PrngStream& rng) {
  const std::size_t n = static_cast<std::size_t>(g.num_nodes());
  const std::size_t all_pairs = n * (n - 1) / 2;
  const std::size_t available = all_pairs - static_cast<std::size_t>(g.num_edges());
  if (count > available)
    throw DomainError("sample_non_edges: graph too dense, not enough non-edges");

  std::vector<NodePair> out;
  out.reserve(count);
  if (count * 2 >= available) {
    // Dense request: enumerate every non-edge and take a shuffled prefix.
    std::vector<NodePair> pool;
    pool.reserve(available);
    for (int u = 0; u < g.num_nodes(); ++u)
      for (int v = u + 1; v < g.num_nodes(); ++v)
        if (!g.has_edge(u, v)) pool.emplace_back(u, v);
    rng.shuffle(pool);
    out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(out.begin(), out.end());
    return out;
  }
  std::set<NodePair> chosen;
  while (chosen.size() < count) {
    const int u = static_cast<int>(rng.next_below(n));
    const int v = static_cast<int>(rng.next_below(n));
    if (u == v || g.has_edge(u, v)) continue;
    chosen.emplace(u, v);
  }
  out.assign(chosen.begin(), chosen.end());
  return out;
}

namespace {

using nlohmann::json;

Graph graph_from_parsed(const json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j.contains("edges"))
    throw SchemaError("graph json must contain nodes and edges");
  if (j.contains("directed") && j.at("directed").get<bool>())
    throw SchemaError("only undirected graphs are supported");

  const auto& nodes = j.at("nodes");
  if (!nodes.is_array() || nodes.empty()) throw SchemaError("nodes must be a non-empty array");
  const int n = static_cast<int>(nodes.size());

  // Node ids must be exactly 0..n-1 (any order in the file).
  std::vector<int> seen(n, 0);
  int feat_dim = -1;
  for (const auto& nd : nodes) {
    if (!nd.contains("id") || !nd.contains("x")) throw SchemaError("node entry needs id and x");
    const int id = nd.at("id").get<int>();
    if (id < 0 || id >= n) throw SchemaError("node id out of range");
    if (seen[id]++) throw SchemaError("duplicate node id");
    const auto& x = nd.at("x");
    if (!x.is_array()) throw SchemaError("node feature x must be an array");
    if (feat_dim < 0) feat_dim = static_cast<int>(x.size());
    if (static_cast<int>(x.size()) != feat_dim)
      throw SchemaError("inconsistent feature dimension");
  }

  Graph g(n, feat_dim);
  for (const auto& nd : nodes) {
    const int id = nd.at("id").get<int>();
    const auto& x = nd.at("x");
    for (int i = 0; i < feat_dim; ++i) g.set_feature(id, i, x.at(i).get<double>());
    if (nd.contains("y") && !nd.at("y").is_null()) g.set_label(id, nd.at("y").get<int>());
    if (nd.contains("train")) g.set_train(id, nd.at("train").get<bool>());
  }

  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw SchemaError("edge entries must be [u,v]");
    const int u = e.at(0).get<int>();
    const int v = e.at(1).get<int>();
    if (u < 0 || u >= n || v < 0 || v >= n) throw SchemaError("edge endpoint out of range");
    if (u == v) throw SchemaError("self-loop edge in graph file");
    g.add_edge(u, v);
  }
  return g;
}

}  // namespace

Graph graph_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed graph json: ") + e.what());
  }
  try {
    return graph_from_parsed(j);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("graph json schema violation: ") + e.what());
  }
}

Graph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return graph_from_json(buf.str());
}

std::string graph_to_json(const Graph& g) {
  json nodes = json::array();
  for (int u = 0; u < g.num_nodes(); ++u) {
    json nd;
    nd["id"] = u;
    json x = json::array();
    for (int i = 0; i < g.feat_dim(); ++i) x.push_back(g.features()(u, i));
    nd["x"] = std::move(x);
    nd["y"] = g.has_label(u) ? json(g.label(u)) : json(nullptr);
    if (g.is_train(u)) nd["train"] = true;
    nodes.push_back(std::move(nd));
  }
  json edges = json::array();
  for (const auto& e : g.edges()) edges.push_back(json::array({e.u, e.v}));
  json j;
  j["directed"] = false;
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  return j.dump(2) + "\n";
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write graph file: " + path.string());
  out << graph_to_json(g);
}

}  // namespace edog

#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "edog/numkit.hpp"

namespace edog {

// Unordered node pair stored in canonical (min, max) order.
struct NodePair {
  int u = 0;
  int v = 0;

  NodePair() = default;
  NodePair(int a, int b) {
    if (a == b) throw DomainError("NodePair: self-pair not allowed");
    u = a < b ? a : b;
    v = a < b ? b : a;
  }

  auto operator<=>(const NodePair&) const = default;
};

// Undirected attributed graph. Immutable by convention once built: the
// generators and loaders construct it and everything downstream only reads.
// `with_edge` produces the one-edge-added copies the attack code needs.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int num_nodes, int feat_dim = 0)
      : num_nodes_(num_nodes),
        features_(static_cast<std::size_t>(num_nodes), static_cast<std::size_t>(feat_dim)),
        labels_(static_cast<std::size_t>(num_nodes), -1),
        train_(static_cast<std::size_t>(num_nodes), 0),
        adj_(static_cast<std::size_t>(num_nodes)) {}

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int feat_dim() const { return static_cast<int>(features_.cols()); }

  // No-op if the edge already exists; throws on self-loops and bad ids.
  void add_edge(int a, int b);
  void remove_edge(int a, int b);
  bool has_edge(int a, int b) const;
  int degree(int u) const { return static_cast<int>(adj_[u].size()); }
  const std::vector<int>& neighbors(int u) const { return adj_[u]; }
  const std::vector<NodePair>& edges() const { return edges_; }

  const Matrix& features() const { return features_; }
  void set_features(Matrix x);
  void set_feature(int u, int i, double value) { features_(u, i) = value; }

  bool has_label(int u) const { return labels_[u] >= 0; }
  int label(int u) const { return labels_[u]; }
  void set_label(int u, int y);
  // Largest label + 1, or 0 when no node is labeled.
  int num_classes() const;

  bool is_train(int u) const { return train_[u] != 0; }
  void set_train(int u, bool t) { train_[u] = t ? 1 : 0; }
  std::vector<int> train_nodes() const;

  Graph with_edge(NodePair e) const;

  void check_node(int u) const {
    if (u < 0 || u >= num_nodes_) throw DomainError("node id out of range");
  }

 private:
  int num_nodes_ = 0;
  Matrix features_;               // num_nodes x feat_dim
  std::vector<int> labels_;       // -1 = unlabeled
  std::vector<std::uint8_t> train_;
  std::vector<std::vector<int>> adj_;  // sorted neighbor lists
  std::vector<NodePair> edges_;        // canonical pairs, sorted
};

// Induced subgraph plus the injective local-id -> parent-id map.
// parent_ids is sorted ascending, so local ids are deterministic.
struct Subgraph {
  std::vector<int> parent_ids;
  Graph graph;

  // Local id of a parent node, or -1 when absent.
  int local_id(int parent) const;
  bool contains(NodePair parent_pair) const {
    return local_id(parent_pair.u) >= 0 && local_id(parent_pair.v) >= 0;
  }
};

// Induced subgraph on all nodes within two hops of `center`.
Subgraph two_hop_subgraph(const Graph& g, int center);

// One two-hop subgraph per node in node-id order.
std::vector<Subgraph> sample_subgraphs(const Graph& g);

Graph gen_erdos_renyi(int n, double p, std::uint64_t seed);

// Preferential attachment starting from an (m+1)-clique; each new node
// attaches m edges to distinct existing nodes with probability proportional
// to degree.
Graph gen_barabasi_albert(int n, int m, std::uint64_t seed);

// Structure-correlated synthetic features and labels: per-node Gaussian
// embeddings smoothed over neighborhoods, Bernoulli(sigmoid) bits as the
// visible features, label = sign of the embedding sum.
void synth_annotate(Graph& g, int dim, int rounds, std::uint64_t seed);

// Marks ceil(frac * n) nodes as training nodes, chosen by seeded shuffle.
void assign_train_mask(Graph& g, double frac, std::uint64_t seed);

// `count` distinct uniformly random non-edges. Throws when the graph has
// fewer than `count` non-edges.
std::vector<NodePair> sample_non_edges(const Graph& g, std::size_t count, PrngStream& rng);

Graph load_graph(const std::filesystem::path& path);
void save_graph(const Graph& g, const std::filesystem::path& path);
std::string graph_to_json(const Graph& g);
Graph graph_from_json(const std::string& text);

namespace detail {
// The neighborhood-smoothing half of synth_annotate, exposed so tests can
// drive it with chosen initial embeddings. Synchronous update per round;
// nodes with an empty or zero-sum neighborhood keep their previous vector.
void smooth_embeddings(const Graph& g, Matrix& e, int rounds);
}  // namespace detail

}  // namespace edog

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "edog/graph.hpp"
#include "edog/numkit.hpp"

namespace edog {

struct GcnConfig {
  int hidden = 16;
  int epochs = 200;
  double lr = 0.01;
};

// Two-layer graph convolutional classifier.
//   theta1 = relu(A_hat X W1)
//   theta2 = relu(A_hat theta1 W2)
//   p_u    = softmax(theta2_u W_out)
struct GcnModel {
  Matrix w1;     // d x h
  Matrix w2;     // h x h
  Matrix w_out;  // h x c
  GcnConfig config;
  std::uint64_t seed = 0;

  int hidden() const { return static_cast<int>(w1.cols()); }
  int num_classes() const { return static_cast<int>(w_out.cols()); }
};

// Symmetric-normalized adjacency with self-loops,
// A_hat = D~^{-1/2} (A + I) D~^{-1/2}, as a dense matrix.
Matrix normalized_adjacency(const Graph& g);

// The same operator in sparse per-row form: row u holds (w, coef) terms,
// including the self term, such that (A_hat x)_u = sum coef * x_w.
struct NormAdj {
  std::vector<std::vector<std::pair<int, double>>> rows;

  static NormAdj build(const Graph& g);
  // A_hat * x; works for the backward pass too since A_hat is symmetric.
  Matrix apply(const Matrix& x) const;
};

// Intermediate activations of the two hidden layers, kept for backprop.
struct EmbedTrace {
  Matrix ax;   // A_hat X
  Matrix s1;   // A_hat X W1
  Matrix h1;   // relu(s1)
  Matrix ah1;  // A_hat h1
  Matrix s2;   // A_hat h1 W2
  Matrix h2;   // relu(s2), the node embeddings
};

EmbedTrace gcn_embed(const NormAdj& adj, const Matrix& x, const Matrix& w1, const Matrix& w2);

// Per-node class probabilities, one row per node.
Matrix gcn_forward(const GcnModel& m, const Graph& g);

GcnModel train_node_classifier(const Graph& g, std::uint64_t seed, const GcnConfig& config = {});

std::vector<int> predict_labels(const GcnModel& m, const Graph& g);

// Cross-entropy of the model's prediction at node v against class y.
double target_loss(const GcnModel& m, const Graph& g, int v, int y);

// Probability row for a single node, computed from its two-hop neighborhood
// only; used by the attack loop where thousands of one-edge graph variants
// are scored.
std::vector<double> node_probs_local(const GcnModel& m, const Graph& g, int v);

// cross_entropy(node_probs_local(m, g, v), y); equal to target_loss.
double target_loss_local(const GcnModel& m, const Graph& g, int v, int y);

// Mean cross-entropy over the train nodes (the meta-attack objective).
double train_loss(const GcnModel& m, const Graph& g);

void save_gcn_model(const GcnModel& m, const std::filesystem::path& path);
GcnModel load_gcn_model(const std::filesystem::path& path);

// Glorot-uniform matrix draw, row-major fill order.
Matrix glorot_uniform(std::size_t rows, std::size_t cols, PrngStream& rng);

namespace detail {

struct GcnGrads {
  double loss = 0.0;
  Matrix dw1;
  Matrix dw2;
  Matrix dwout;
};

// Training loss (mean cross-entropy over train nodes) and its analytic
// gradients; the finite-difference suite checks these.
GcnGrads classifier_loss_and_grad(const Graph& g, const NormAdj& adj, const Matrix& w1,
                                  const Matrix& w2, const Matrix& wout);

// Backprop through the two GCN layers given dL/d(h2); accumulates into
// dw1/dw2. Shared by the LP and GGD trainers.
void embed_backward(const NormAdj& adj, const EmbedTrace& tr, const Matrix& w2,
                    const Matrix& dh2, Matrix& dw1, Matrix& dw2);

}  // namespace detail

}  // namespace edog

#pragma once

#include <cstdint>

#include "edog/graph.hpp"

namespace fixtures {

// Two complete graphs with opposite labels and class-indicator features;
// every other node is a train node. Linearly separable, so classifiers and
// detectors behave predictably on it.
inline edog::Graph two_cliques(int q, bool bridged = false) {
  edog::Graph g(2 * q, 2);
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j) {
      g.add_edge(i, j);
      g.add_edge(q + i, q + j);
    }
  if (bridged) g.add_edge(0, q);
  for (int v = 0; v < 2 * q; ++v) {
    int label = v < q ? 0 : 1;
    g.set_label(v, label);
    g.set_feature(v, label, 1.0);
    g.set_train(v, v % 2 == 0);
  }
  return g;
}

// Synthetic annotated scale-free graph with the generator defaults.
inline edog::Graph annotated_ba(int n, int m, std::uint64_t seed, double train_frac = 0.1) {
  edog::Graph g = edog::gen_barabasi_albert(n, m, seed);
  edog::synth_annotate(g, 20, 3, edog::derive_seed(seed, "annotate"));
  edog::assign_train_mask(g, train_frac, edog::derive_seed(seed, "train_mask"));
  return g;
}

}  // namespace fixtures

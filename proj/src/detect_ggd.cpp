#include "edog/detect_ggd.hpp"

#include <algorithm>
#include <cmath>

#include "edog/detect_lp.hpp"

namespace edog {

namespace {

void symmetrize(Matrix& w) {
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = i + 1; j < w.cols(); ++j) {
      const double avg = 0.5 * (w(i, j) + w(j, i));
      w(i, j) = avg;
      w(j, i) = avg;
    }
}

double bce(double p, int y) {
  return y ? -std::log(std::max(p, kProbFloor)) : -std::log(std::max(1.0 - p, kProbFloor));
}

double bilinear(std::span<const double> tu, std::span<const double> tv, const Matrix& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.rows(); ++i) {
    if (tu[i] == 0.0) continue;
    double acc = 0.0;
    for (std::size_t j = 0; j < w.cols(); ++j) acc += w(i, j) * tv[j];
    s += tu[i] * acc;
  }
  return s;
}

std::vector<NodePair> to_local(const Subgraph& sub, const std::vector<NodePair>& targets) {
  std::vector<NodePair> local;
  local.reserve(targets.size());
  for (const auto& t : targets) {
    const int lu = sub.local_id(t.u);
    const int lv = sub.local_id(t.v);
    if (lu < 0 || lv < 0) throw DomainError("edge_link_probs: target outside the subgraph");
    local.emplace_back(lu, lv);
  }
  return local;
}

void check_trainable(const Graph& g) {
  if (g.num_edges() < 1) throw DomainError("ggd training needs at least one edge");
  const std::size_t n = static_cast<std::size_t>(g.num_nodes());
  const std::size_t available = n * (n - 1) / 2 - static_cast<std::size_t>(g.num_edges());
  if (available < static_cast<std::size_t>(g.num_edges()))
    throw DomainError("graph too dense to sample matching non-edges");
}

}  // namespace

namespace detail {

LinkProbs edge_link_probs_impl(const GgdParams& params, const Subgraph& sub,
                               const std::vector<NodePair>& targets, PrngStream& rng,
                               int stride) {
  if (stride < 1) throw DomainError("gen stride must be >= 1");
  const Graph& sg = sub.graph;
  const auto local = to_local(sub, targets);

  std::vector<NodePair> perm = sg.edges();
  rng.shuffle(perm);

  Graph cur(sg.num_nodes(), sg.feat_dim());
  cur.set_features(sg.features());

  std::vector<double> sums(local.size(), 0.0);
  std::vector<int> counts(local.size(), 0);
  for (std::size_t t = 0; t < perm.size(); ++t) {
    if (t % static_cast<std::size_t>(stride) == 0) {
      const NormAdj adj = NormAdj::build(cur);
      const EmbedTrace tr = gcn_embed(adj, cur.features(), params.w1, params.w2);
      for (std::size_t i = 0; i < local.size(); ++i) {
        if (cur.has_edge(local[i].u, local[i].v)) continue;
        const double s = bilinear(tr.h2.row(local[i].u), tr.h2.row(local[i].v), params.w);
        sums[i] += stable_sigmoid(s);
        counts[i] += 1;
      }
    }
    cur.add_edge(perm[t].u, perm[t].v);
  }

  LinkProbs out;
  for (std::size_t i = 0; i < local.size(); ++i) {
    out.probs[targets[i]] = counts[i] ? sums[i] / counts[i] : 0.5;
    out.counts[targets[i]] = counts[i];
  }
  return out;
}

GgdGrads ggd_loss_and_grad(const GgdParams& params, const Subgraph& sub,
                           const std::vector<NodePair>& targets, const std::vector<int>& labels,
                           PrngStream& rng, int stride) {
  if (targets.size() != labels.size())
    throw DomainError("ggd_loss_and_grad: targets and labels must align");
  if (targets.empty()) throw DomainError("ggd_loss_and_grad: no targets");
  const Graph& sg = sub.graph;
  const auto local = to_local(sub, targets);

  std::vector<NodePair> perm = sg.edges();
  rng.shuffle(perm);

  Graph cur(sg.num_nodes(), sg.feat_dim());
  cur.set_features(sg.features());

  // Forward pass, keeping every step's activations for the backward pass.
  struct StepRec {
    NormAdj adj;
    EmbedTrace tr;
    std::vector<std::size_t> pending;  // target indices scored at this step
    std::vector<double> probs;         // their link probabilities
  };
  std::vector<StepRec> steps;
  std::vector<double> sums(local.size(), 0.0);
  std::vector<int> counts(local.size(), 0);
  for (std::size_t t = 0; t < perm.size(); ++t) {
    if (t % static_cast<std::size_t>(stride) == 0) {
      StepRec rec;
      rec.adj = NormAdj::build(cur);
      rec.tr = gcn_embed(rec.adj, cur.features(), params.w1, params.w2);
      for (std::size_t i = 0; i < local.size(); ++i) {
        if (cur.has_edge(local[i].u, local[i].v)) continue;
        const double s = bilinear(rec.tr.h2.row(local[i].u), rec.tr.h2.row(local[i].v), params.w);
        const double p = stable_sigmoid(s);
        rec.pending.push_back(i);
        rec.probs.push_back(p);
        sums[i] += p;
        counts[i] += 1;
      }
      steps.push_back(std::move(rec));
    }
    cur.add_edge(perm[t].u, perm[t].v);
  }

  GgdGrads out;
  out.dw1 = Matrix(params.w1.rows(), params.w1.cols());
  out.dw2 = Matrix(params.w2.rows(), params.w2.cols());
  out.dw = Matrix(params.w.rows(), params.w.cols());

  const double inv = 1.0 / static_cast<double>(targets.size());
  std::vector<double> davg(local.size(), 0.0);
  for (std::size_t i = 0; i < local.size(); ++i) {
    const double avg = counts[i] ? sums[i] / counts[i] : 0.5;
    out.loss += bce(avg, labels[i]) * inv;
    if (counts[i])
      davg[i] = (avg - labels[i]) / std::max(avg * (1.0 - avg), kProbFloor) * inv;
  }

  const std::size_t h = params.w.rows();
  for (const auto& rec : steps) {
    if (rec.pending.empty()) continue;
    Matrix dh2(rec.tr.h2.rows(), rec.tr.h2.cols());
    bool touched = false;
    for (std::size_t k = 0; k < rec.pending.size(); ++k) {
      const std::size_t i = rec.pending[k];
      if (davg[i] == 0.0) continue;
      const double p = rec.probs[k];
      const double ds = (davg[i] / counts[i]) * p * (1.0 - p);
      if (ds == 0.0) continue;
      touched = true;
      const auto tu = rec.tr.h2.row(local[i].u);
      const auto tv = rec.tr.h2.row(local[i].v);
      auto du = dh2.row(local[i].u);
      auto dv = dh2.row(local[i].v);
      for (std::size_t a = 0; a < h; ++a) {
        double acc = 0.0;
        for (std::size_t b = 0; b < h; ++b) {
          out.dw(a, b) += ds * tu[a] * tv[b];
          acc += params.w(a, b) * tv[b];
        }
        du[a] += ds * acc;
      }
      for (std::size_t b = 0; b < h; ++b) {
        double acc = 0.0;
        for (std::size_t a = 0; a < h; ++a) acc += params.w(a, b) * tu[a];
        dv[b] += ds * acc;
      }
    }
    if (touched) detail::embed_backward(rec.adj, rec.tr, params.w2, dh2, out.dw1, out.dw2);
  }
  return out;
}

EdgeScores ggd_detect_single(const GgdParams& params, const Graph& g,
                             const std::vector<NodePair>& targets, std::uint64_t seed,
                             int stride) {
  for (const auto& t : targets) {
    g.check_node(t.u);
    g.check_node(t.v);
  }
  std::map<NodePair, double> sums;
  std::map<NodePair, int> counts;
  const PrngStream master = PrngStream(seed).derive("subgraph");
  std::vector<NodePair> inside;
  for (int c = 0; c < g.num_nodes(); ++c) {
    const Subgraph sub = two_hop_subgraph(g, c);
    inside.clear();
    for (const auto& t : targets)
      if (sub.contains(t)) inside.push_back(t);
    if (inside.empty()) continue;
    PrngStream rng = master.derive(static_cast<std::uint64_t>(c));
    const auto lp = edge_link_probs_impl(params, sub, inside, rng, stride);
    for (const auto& [pair, prob] : lp.probs) {
      sums[pair] += prob;
      counts[pair] += 1;
    }
  }
  EdgeScores out;
  out.detector = "ggd";
  for (const auto& t : targets) {
    const auto it = counts.find(t);
    const double avg = it == counts.end() ? 0.5 : sums[t] / it->second;
    out.scores[t] = 1.0 - avg;
  }
  return out;
}

std::vector<NodePair> top_suspicious(const EdgeScores& scores, std::size_t k) {
  std::vector<std::pair<NodePair, double>> items(scores.scores.begin(), scores.scores.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  k = std::min(k, items.size());
  std::vector<NodePair> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(items[i].first);
  return out;
}

}  // namespace detail

std::map<NodePair, double> edge_link_probs(const GgdModel& m, const Subgraph& sub,
                                           const std::vector<NodePair>& targets,
                                           PrngStream& rng) {
  return detail::edge_link_probs_impl(m.params, sub, targets, rng, m.config.gen_stride).probs;
}

GgdModel train_ggd(const Graph& g, std::uint64_t seed, const GgdConfig& config) {
  check_trainable(g);
  PrngStream rng(seed);
  GgdModel m;
  m.config = config;
  m.seed = seed;
  auto r1 = rng.derive("w1");
  auto r2 = rng.derive("w2");
  auto r3 = rng.derive("w_bilinear");
  m.params.w1 = glorot_uniform(g.feat_dim(), config.hidden, r1);
  m.params.w2 = glorot_uniform(config.hidden, config.hidden, r2);
  m.params.w = glorot_uniform(config.hidden, config.hidden, r3);
  symmetrize(m.params.w);

  AdamState s1(m.params.w1), s2(m.params.w2), s3(m.params.w);
  auto neg_rng = rng.derive("negatives");
  const auto perm_master = rng.derive("permutations");
  const auto subs = sample_subgraphs(g);

  std::vector<NodePair> inside;
  std::vector<int> inside_labels;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto negs = sample_non_edges(g, g.edges().size(), neg_rng);
    const auto epoch_rng = perm_master.derive(static_cast<std::uint64_t>(epoch));
    for (int c = 0; c < g.num_nodes(); ++c) {
      const Subgraph& sub = subs[c];
      inside.clear();
      inside_labels.clear();
      for (const auto& e : g.edges())
        if (sub.contains(e)) {
          inside.push_back(e);
          inside_labels.push_back(1);
        }
      for (const auto& e : negs)
        if (sub.contains(e)) {
          inside.push_back(e);
          inside_labels.push_back(0);
        }
      if (inside.empty()) continue;
      PrngStream prng = epoch_rng.derive(static_cast<std::uint64_t>(c));
      const auto grads =
          detail::ggd_loss_and_grad(m.params, sub, inside, inside_labels, prng, config.gen_stride);
      adam_step(m.params.w1, grads.dw1, s1, config.lr);
      adam_step(m.params.w2, grads.dw2, s2, config.lr);
      adam_step(m.params.w, grads.dw, s3, config.lr);
      symmetrize(m.params.w);
    }
    if (epoch >= config.checkpoint_from) m.checkpoints.push_back(m.params);
  }
  return m;
}

EdgeScores ggd_detect(const GgdModel& m, const Graph& g, const std::vector<NodePair>& targets,
                      std::uint64_t seed) {
  if (m.checkpoints.empty())
    return detail::ggd_detect_single(m.params, g, targets, seed, m.config.gen_stride);
  std::map<NodePair, double> acc;
  const PrngStream root(seed);
  for (std::size_t i = 0; i < m.checkpoints.size(); ++i) {
    // Each checkpoint scores with its own generation orders; the averaging
    // then smooths over both parameter and permutation noise.
    const std::uint64_t ckpt_seed = root.derive(i).seed();
    const auto scores =
        detail::ggd_detect_single(m.checkpoints[i], g, targets, ckpt_seed, m.config.gen_stride);
    for (const auto& [pair, v] : scores.scores) acc[pair] += v;
  }
  EdgeScores out;
  out.detector = "ggd";
  const double inv = 1.0 / static_cast<double>(m.checkpoints.size());
  for (const auto& [pair, v] : acc) out.scores[pair] = v * inv;
  return out;
}

EdgeScores lp_filter_ggd(const Graph& g, std::uint64_t seed) {
  return lp_filter_ggd_scores(g, g.edges(), seed);
}

GgdModel fit_lp_filter_ggd(const Graph& g, std::uint64_t seed) {
  if (g.num_edges() < 2) throw DomainError("lp_filter_ggd needs at least two edges");
  const LpModel lp = train_lp(g, derive_seed(seed, "lp"));
  const EdgeScores lp_scores = lp_pair_scores(lp, g, g.edges());
  const std::size_t drop = (g.edges().size() + 1) / 2;
  const auto removed = detail::top_suspicious(lp_scores, drop);

  Graph filtered = g;
  for (const auto& e : removed) filtered.remove_edge(e.u, e.v);
  return train_ggd(filtered, derive_seed(seed, "ggd"));
}

EdgeScores lp_filter_ggd_scores(const Graph& g, const std::vector<NodePair>& targets,
                                std::uint64_t seed) {
  const GgdModel ggd = fit_lp_filter_ggd(g, seed);
  EdgeScores out = ggd_detect(ggd, g, targets, derive_seed(seed, "detect"));
  out.detector = "lp+ggd";
  return out;
}

}  // namespace edog

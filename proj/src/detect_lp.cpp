#include "edog/detect_lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

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

// Raw link features with a cache; they do not depend on model parameters.
class FeatureCache {
 public:
  explicit FeatureCache(const Graph& g) : g_(g) {}

  const std::array<double, 5>& get(NodePair pair) {
    auto it = cache_.find(pair);
    if (it == cache_.end())
      it = cache_.emplace(pair, ald_features(g_, pair).as_array()).first;
    return it->second;
  }

 private:
  const Graph& g_;
  std::map<NodePair, std::array<double, 5>> cache_;
};

struct PoolStats {
  std::array<double, 5> mean{};
  std::array<double, 5> std{};
};

PoolStats pool_stats(const std::vector<std::array<double, 5>>& raw) {
  PoolStats st;
  const double inv = 1.0 / static_cast<double>(raw.size());
  for (const auto& f : raw)
    for (int i = 0; i < 5; ++i) st.mean[i] += f[i] * inv;
  for (const auto& f : raw)
    for (int i = 0; i < 5; ++i) {
      const double d = f[i] - st.mean[i];
      st.std[i] += d * d * inv;
    }
  for (int i = 0; i < 5; ++i) {
    st.std[i] = std::sqrt(st.std[i]);
    if (st.std[i] == 0.0) st.std[i] = 1.0;
  }
  return st;
}

detail::LpPool build_pool(const Graph& g, FeatureCache& cache, const std::vector<NodePair>& negs,
                          PoolStats& stats_out) {
  detail::LpPool pool;
  for (const auto& e : g.edges()) {
    pool.pairs.push_back(e);
    pool.labels.push_back(1);
  }
  for (const auto& e : negs) {
    pool.pairs.push_back(e);
    pool.labels.push_back(0);
  }
  std::vector<std::array<double, 5>> raw;
  raw.reserve(pool.pairs.size());
  for (const auto& e : pool.pairs) raw.push_back(cache.get(e));
  stats_out = pool_stats(raw);
  pool.feats = Matrix(raw.size(), 5);
  for (std::size_t r = 0; r < raw.size(); ++r)
    for (int i = 0; i < 5; ++i)
      pool.feats(r, i) = (raw[r][i] - stats_out.mean[i]) / stats_out.std[i];
  return pool;
}

void check_trainable(const Graph& g) {
  if (g.num_edges() < 1) throw DomainError("link-prediction training needs at least one edge");
  const std::size_t n = static_cast<std::size_t>(g.num_nodes());
  const std::size_t available = n * (n - 1) / 2 - static_cast<std::size_t>(g.num_edges());
  if (available < static_cast<std::size_t>(g.num_edges()))
    throw DomainError("graph too dense to sample matching non-edges");
}

}  // namespace

namespace detail {

LpGrads lp_loss_and_grad(const Graph& g, const NormAdj& adj, const LpPool& pool,
                         const Matrix& w1, const Matrix& w2, const Matrix& wedge,
                         const Matrix& w, double bias) {
  const EmbedTrace tr = gcn_embed(adj, g.features(), w1, w2);
  const std::size_t h = wedge.rows();
  const std::size_t count = pool.pairs.size();
  const double inv = 1.0 / static_cast<double>(count);

  LpGrads out;
  out.dw1 = Matrix(w1.rows(), w1.cols());
  out.dw2 = Matrix(w2.rows(), w2.cols());
  out.dwedge = Matrix(wedge.rows(), wedge.cols());
  out.dw = Matrix(6, 1);
  Matrix dh2(tr.h2.rows(), tr.h2.cols());

  std::vector<double> wv(h);
  for (std::size_t k = 0; k < count; ++k) {
    const auto pair = pool.pairs[k];
    const auto tu = tr.h2.row(pair.u);
    const auto tv = tr.h2.row(pair.v);
    // s = theta_u^T W_edge theta_v
    double s = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < h; ++j) acc += wedge(i, j) * tv[j];
      wv[i] = acc;
      s += tu[i] * acc;
    }
    const double f = stable_sigmoid(s);
    double z = bias + w(5, 0) * f;
    for (int i = 0; i < 5; ++i) z += w(i, 0) * pool.feats(k, i);
    const double p = stable_sigmoid(z);
    out.loss += bce(p, pool.labels[k]) * inv;

    const double dz = (p - pool.labels[k]) * inv;
    out.dbias += dz;
    for (int i = 0; i < 5; ++i) out.dw(i, 0) += dz * pool.feats(k, i);
    out.dw(5, 0) += dz * f;

    const double ds = dz * w(5, 0) * f * (1.0 - f);
    if (ds == 0.0) continue;
    auto du = dh2.row(pair.u);
    auto dv = dh2.row(pair.v);
    for (std::size_t i = 0; i < h; ++i) {
      du[i] += ds * wv[i];
      for (std::size_t j = 0; j < h; ++j) out.dwedge(i, j) += ds * tu[i] * tv[j];
    }
    for (std::size_t j = 0; j < h; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < h; ++i) acc += wedge(i, j) * tu[i];
      dv[j] += ds * acc;
    }
  }
  embed_backward(adj, tr, w2, dh2, out.dw1, out.dw2);
  return out;
}

}  // namespace detail

LpModel train_lp(const Graph& g, std::uint64_t seed, const LpConfig& config) {
  check_trainable(g);
  PrngStream rng(seed);
  LpModel m;
  m.config = config;
  m.seed = seed;
  auto r1 = rng.derive("w1");
  auto r2 = rng.derive("w2");
  auto r3 = rng.derive("w_edge");
  m.w1 = glorot_uniform(g.feat_dim(), config.hidden, r1);
  m.w2 = glorot_uniform(config.hidden, config.hidden, r2);
  m.w_edge = glorot_uniform(config.hidden, config.hidden, r3);
  symmetrize(m.w_edge);
  m.w = Matrix(6, 1);  // zero-initialized head: untrained output is 0.5
  m.bias = 0.0;

  const NormAdj adj = NormAdj::build(g);
  FeatureCache cache(g);
  auto neg_rng = rng.derive("negatives");
  PoolStats stats;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto negs = sample_non_edges(g, g.edges().size(), neg_rng);
    const auto pool = build_pool(g, cache, negs, stats);
    const auto grads =
        detail::lp_loss_and_grad(g, adj, pool, m.w1, m.w2, m.w_edge, m.w, m.bias);
    sgd_step(m.w1, grads.dw1, config.lr);
    sgd_step(m.w2, grads.dw2, config.lr);
    sgd_step(m.w_edge, grads.dwedge, config.lr);
    sgd_step(m.w, grads.dw, config.lr);
    m.bias -= config.lr * grads.dbias;
    symmetrize(m.w_edge);
    m.feat_mean = stats.mean;
    m.feat_std = stats.std;
  }
  if (config.epochs == 0) {
    // Scoring still needs standardization statistics.
    const auto negs = sample_non_edges(g, g.edges().size(), neg_rng);
    build_pool(g, cache, negs, stats);
    m.feat_mean = stats.mean;
    m.feat_std = stats.std;
  }
  return m;
}

EdgeScores lp_pair_scores(const LpModel& m, const Graph& g,
                          const std::vector<NodePair>& targets) {
  const NormAdj adj = NormAdj::build(g);
  const EmbedTrace tr = gcn_embed(adj, g.features(), m.w1, m.w2);
  const std::size_t h = m.w_edge.rows();

  EdgeScores out;
  out.detector = "lp";
  for (const auto& pair : targets) {
    const auto raw = ald_features(g, pair).as_array();
    const auto tu = tr.h2.row(pair.u);
    const auto tv = tr.h2.row(pair.v);
    double s = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < h; ++j) acc += m.w_edge(i, j) * tv[j];
      s += tu[i] * acc;
    }
    const double f = stable_sigmoid(s);
    double z = m.bias + m.w(5, 0) * f;
    for (int i = 0; i < 5; ++i) z += m.w(i, 0) * (raw[i] - m.feat_mean[i]) / m.feat_std[i];
    out.scores[pair] = 1.0 - stable_sigmoid(z);
  }
  return out;
}

EdgeScores ald_detector(const Graph& g, std::uint64_t seed, const LpConfig& config) {
  check_trainable(g);
  PrngStream rng(seed);
  Matrix w(5, 1);
  double bias = 0.0;

  FeatureCache cache(g);
  auto neg_rng = rng.derive("negatives");
  PoolStats stats;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto negs = sample_non_edges(g, g.edges().size(), neg_rng);
    const auto pool = build_pool(g, cache, negs, stats);
    Matrix dw(5, 1);
    double dbias = 0.0;
    const double inv = 1.0 / static_cast<double>(pool.pairs.size());
    for (std::size_t k = 0; k < pool.pairs.size(); ++k) {
      double z = bias;
      for (int i = 0; i < 5; ++i) z += w(i, 0) * pool.feats(k, i);
      const double p = stable_sigmoid(z);
      const double dz = (p - pool.labels[k]) * inv;
      dbias += dz;
      for (int i = 0; i < 5; ++i) dw(i, 0) += dz * pool.feats(k, i);
    }
    sgd_step(w, dw, config.lr);
    bias -= config.lr * dbias;
  }
  if (config.epochs == 0) {
    const auto negs = sample_non_edges(g, g.edges().size(), neg_rng);
    build_pool(g, cache, negs, stats);
  }

  EdgeScores out;
  out.detector = "ald";
  for (const auto& pair : g.edges()) {
    const auto raw = cache.get(pair);
    double z = bias;
    for (int i = 0; i < 5; ++i) z += w(i, 0) * (raw[i] - stats.mean[i]) / stats.std[i];
    out.scores[pair] = 1.0 - stable_sigmoid(z);
  }
  return out;
}

}  // namespace edog

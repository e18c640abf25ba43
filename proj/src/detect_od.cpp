#include "edog/detect_od.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "edog/gcn.hpp"
#include "edog/metrics.hpp"

namespace edog {

std::vector<double> OdFeatures::as_vector(bool include_betweenness) const {
  std::vector<double> out;
  out.reserve(12);
  for (const Endpoint* e : {&u, &v}) {
    out.push_back(e->distinct_classes);
    out.push_back(e->avg_class_count);
    out.push_back(e->max_class_count);
    out.push_back(e->second_class_count);
    out.push_back(e->class_count_std);
    if (include_betweenness) out.push_back(e->log_betweenness);
  }
  return out;
}

namespace {

OdFeatures::Endpoint endpoint_stats(const Graph& g, const std::vector<int>& labels,
                                    const std::vector<double>& btw, int node, int other) {
  OdFeatures::Endpoint ep;
  ep.log_betweenness = std::log(btw[node] + 1e-6);

  std::map<int, int> tally;
  for (int w : g.neighbors(node)) tally[labels[w]] += 1;
  if (!g.has_edge(node, other)) tally[labels[other]] += 1;
  if (tally.empty()) return ep;

  std::vector<int> counts;
  counts.reserve(tally.size());
  int total = 0;
  for (const auto& [cls, cnt] : tally) {
    counts.push_back(cnt);
    total += cnt;
  }
  std::sort(counts.begin(), counts.end(), std::greater<>());

  ep.distinct_classes = static_cast<double>(counts.size());
  ep.avg_class_count = static_cast<double>(total) / counts.size();
  ep.max_class_count = counts[0];
  ep.second_class_count = counts.size() > 1 ? counts[1] : 0.0;
  double var = 0.0;
  for (int c : counts) {
    const double d = c - ep.avg_class_count;
    var += d * d;
  }
  ep.class_count_std = std::sqrt(var / counts.size());
  return ep;
}

}  // namespace

OdFeatures od_edge_features(const Graph& g, const std::vector<int>& predicted_labels,
                            const std::vector<double>& btw, NodePair pair) {
  g.check_node(pair.u);
  g.check_node(pair.v);
  if (predicted_labels.size() != static_cast<std::size_t>(g.num_nodes()) ||
      btw.size() != static_cast<std::size_t>(g.num_nodes()))
    throw DomainError("od_edge_features: labels and betweenness must cover every node");
  OdFeatures f;
  f.u = endpoint_stats(g, predicted_labels, btw, pair.u, pair.v);
  f.v = endpoint_stats(g, predicted_labels, btw, pair.v, pair.u);
  return f;
}

namespace {

double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

}  // namespace

OcsvmModel fit_ocsvm(const std::vector<std::vector<double>>& features, double nu,
                     std::uint64_t seed) {
  (void)seed;  // the most-violating-pair sweep is already deterministic
  const std::size_t l = features.size();
  if (l < 2) throw DomainError("fit_ocsvm: need at least two points");
  if (nu <= 0.0 || nu > 1.0) throw DomainError("fit_ocsvm: nu must be in (0, 1]");
  const std::size_t dim = features.front().size();
  for (const auto& f : features)
    if (f.size() != dim) throw DomainError("fit_ocsvm: inconsistent feature dimensions");

  OcsvmModel m;
  m.nu = nu;
  m.mean.assign(dim, 0.0);
  m.std.assign(dim, 0.0);
  for (const auto& f : features)
    for (std::size_t i = 0; i < dim; ++i) m.mean[i] += f[i] / static_cast<double>(l);
  for (const auto& f : features)
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = f[i] - m.mean[i];
      m.std[i] += d * d / static_cast<double>(l);
    }
  for (std::size_t i = 0; i < dim; ++i) {
    m.std[i] = std::sqrt(m.std[i]);
    if (m.std[i] == 0.0) m.std[i] = 1.0;
  }
  m.points.resize(l);
  for (std::size_t k = 0; k < l; ++k) {
    m.points[k].resize(dim);
    for (std::size_t i = 0; i < dim; ++i)
      m.points[k][i] = (features[k][i] - m.mean[i]) / m.std[i];
  }

  // Kernel width from the mean per-dimension variance of the standardized
  // data (1 except for constant dimensions).
  double mean_var = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    double mu = 0.0, var = 0.0;
    for (const auto& p : m.points) mu += p[i] / static_cast<double>(l);
    for (const auto& p : m.points) {
      const double d = p[i] - mu;
      var += d * d / static_cast<double>(l);
    }
    mean_var += var / static_cast<double>(dim);
  }
  const double denom = static_cast<double>(dim) * mean_var;
  m.gamma = denom > 0.0 ? 1.0 / denom : 1.0;
  m.gamma = std::max(m.gamma, 1e-6);

  // Dual: minimize 1/2 a^T K a subject to 0 <= a_i <= 1/(nu*l), sum a = 1.
  Matrix k(l, l);
  for (std::size_t i = 0; i < l; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < l; ++j) {
      const double v = rbf(m.points[i], m.points[j], m.gamma);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  const double cap = 1.0 / (nu * static_cast<double>(l));
  m.alpha.assign(l, 1.0 / static_cast<double>(l));
  std::vector<double> grad(l);  // (K a)_i
  for (std::size_t i = 0; i < l; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < l; ++j) s += k(i, j) * m.alpha[j];
    grad[i] = s;
  }

  double residual = 0.0;
  m.converged = false;
  for (int iter = 0; iter < kOcsvmMaxIter; ++iter) {
    // Most violating pair: raise the smallest-gradient coordinate that is
    // below the cap, lower the largest-gradient one that is above zero.
    std::size_t up = l, down = l;
    for (std::size_t i = 0; i < l; ++i) {
      if (m.alpha[i] < cap && (up == l || grad[i] < grad[up])) up = i;
      if (m.alpha[i] > 0.0 && (down == l || grad[i] > grad[down])) down = i;
    }
    residual = grad[down] - grad[up];
    if (residual <= kOcsvmTol) {
      m.converged = true;
      break;
    }
    const double room = std::min(cap - m.alpha[up], m.alpha[down]);
    const double curv = k(up, up) + k(down, down) - 2.0 * k(up, down);
    double step = curv > 0.0 ? residual / curv : room;
    step = std::min(step, room);
    m.alpha[up] += step;
    m.alpha[down] -= step;
    for (std::size_t i = 0; i < l; ++i) grad[i] += step * (k(i, up) - k(i, down));
  }
  m.kkt_residual = residual;

  // Offset from the free support vectors; fall back to all support vectors.
  double rho = 0.0;
  int free_count = 0;
  for (std::size_t i = 0; i < l; ++i) {
    if (m.alpha[i] > 1e-12 && m.alpha[i] < cap - 1e-12) {
      rho += grad[i];
      free_count += 1;
    }
  }
  if (free_count > 0) {
    m.rho = rho / free_count;
  } else {
    int support = 0;
    for (std::size_t i = 0; i < l; ++i) {
      if (m.alpha[i] > 1e-12) {
        m.rho += grad[i];
        support += 1;
      }
    }
    m.rho /= std::max(support, 1);
  }
  return m;
}

double ocsvm_decision(const OcsvmModel& m, const std::vector<double>& x) {
  if (x.size() != m.mean.size()) throw DomainError("ocsvm_decision: dimension mismatch");
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - m.mean[i]) / m.std[i];
  double s = 0.0;
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    if (m.alpha[i] == 0.0) continue;
    s += m.alpha[i] * rbf(m.points[i], z, m.gamma);
  }
  return s - m.rho;
}

OdModel fit_od(const Graph& g, std::uint64_t seed, const OdConfig& config) {
  if (g.num_edges() < 2) throw DomainError("od_detect needs at least two edges");
  OdModel m;
  m.config = config;
  const GcnModel gcn = train_node_classifier(g, derive_seed(seed, "gcn"));
  m.labels = predict_labels(gcn, g);
  m.btw = betweenness(g);

  std::vector<std::vector<double>> feats;
  feats.reserve(g.edges().size());
  for (const auto& e : g.edges())
    feats.push_back(
        od_edge_features(g, m.labels, m.btw, e).as_vector(config.include_betweenness));
  m.svm = fit_ocsvm(feats, config.nu, derive_seed(seed, "ocsvm"));
  return m;
}

EdgeScores od_score_pairs(const OdModel& m, const Graph& g,
                          const std::vector<NodePair>& targets) {
  EdgeScores out;
  out.detector = "od";
  for (const auto& t : targets) {
    const auto x =
        od_edge_features(g, m.labels, m.btw, t).as_vector(m.config.include_betweenness);
    out.scores[t] = -ocsvm_decision(m.svm, x);
  }
  return out;
}

EdgeScores od_pair_scores(const Graph& g, const std::vector<NodePair>& targets,
                          std::uint64_t seed, const OdConfig& config) {
  return od_score_pairs(fit_od(g, seed, config), g, targets);
}

EdgeScores od_detect(const Graph& g, std::uint64_t seed, const OdConfig& config) {
  return od_pair_scores(g, g.edges(), seed, config);
}

}  // namespace edog

#include "edog/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace edog {

Matrix normalized_adjacency(const Graph& g) {
  const int n = g.num_nodes();
  Matrix a(n, n);
  std::vector<double> dinv(n);
  for (int u = 0; u < n; ++u) dinv[u] = 1.0 / std::sqrt(g.degree(u) + 1.0);
  for (int u = 0; u < n; ++u) {
    a(u, u) = dinv[u] * dinv[u];
    for (int w : g.neighbors(u)) a(u, w) = dinv[u] * dinv[w];
  }
  return a;
}

NormAdj NormAdj::build(const Graph& g) {
  const int n = g.num_nodes();
  NormAdj adj;
  adj.rows.resize(n);
  std::vector<double> dinv(n);
  for (int u = 0; u < n; ++u) dinv[u] = 1.0 / std::sqrt(g.degree(u) + 1.0);
  for (int u = 0; u < n; ++u) {
    auto& row = adj.rows[u];
    row.reserve(g.degree(u) + 1);
    row.emplace_back(u, dinv[u] * dinv[u]);
    for (int w : g.neighbors(u)) row.emplace_back(w, dinv[u] * dinv[w]);
  }
  return adj;
}

Matrix NormAdj::apply(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  const std::size_t d = x.cols();
  for (std::size_t u = 0; u < rows.size(); ++u) {
    double* orow = out.data() + u * d;
    for (const auto& [w, c] : rows[u]) {
      const double* xrow = x.data() + static_cast<std::size_t>(w) * d;
      for (std::size_t i = 0; i < d; ++i) orow[i] += c * xrow[i];
    }
  }
  return out;
}

namespace {

Matrix relu(const Matrix& s) {
  Matrix h = s;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h.data()[i] < 0.0) h.data()[i] = 0.0;
  return h;
}

Matrix relu_backward(const Matrix& s, const Matrix& dh) {
  Matrix ds = dh;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (s.data()[i] <= 0.0) ds.data()[i] = 0.0;
  return ds;
}

}  // namespace

EmbedTrace gcn_embed(const NormAdj& adj, const Matrix& x, const Matrix& w1, const Matrix& w2) {
  EmbedTrace tr;
  tr.ax = adj.apply(x);
  tr.s1 = matmul(tr.ax, w1);
  tr.h1 = relu(tr.s1);
  tr.ah1 = adj.apply(tr.h1);
  tr.s2 = matmul(tr.ah1, w2);
  tr.h2 = relu(tr.s2);
  return tr;
}

Matrix gcn_forward(const GcnModel& m, const Graph& g) {
  if (g.feat_dim() != static_cast<int>(m.w1.rows()))
    throw DomainError("gcn_forward: feature dimension does not match the model");
  const NormAdj adj = NormAdj::build(g);
  const EmbedTrace tr = gcn_embed(adj, g.features(), m.w1, m.w2);
  Matrix logits = matmul(tr.h2, m.w_out);
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t u = 0; u < logits.rows(); ++u) {
    const auto probs = softmax(logits.row(u));
    for (std::size_t c = 0; c < probs.size(); ++c) p(u, c) = probs[c];
  }
  return p;
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, PrngStream& rng) {
  Matrix w(rows, cols);
  const double lim = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = (2.0 * rng.next_double() - 1.0) * lim;
  return w;
}

namespace detail {

void embed_backward(const NormAdj& adj, const EmbedTrace& tr, const Matrix& w2,
                    const Matrix& dh2, Matrix& dw1, Matrix& dw2) {
  const Matrix ds2 = relu_backward(tr.s2, dh2);
  dw2 += matmul(transpose(tr.ah1), ds2);
  const Matrix dah1 = matmul(ds2, transpose(w2));
  const Matrix dh1 = adj.apply(dah1);
  const Matrix ds1 = relu_backward(tr.s1, dh1);
  dw1 += matmul(transpose(tr.ax), ds1);
}

GcnGrads classifier_loss_and_grad(const Graph& g, const NormAdj& adj, const Matrix& w1,
                                  const Matrix& w2, const Matrix& wout) {
  const auto train = g.train_nodes();
  if (train.empty()) throw DomainError("gcn training requires a non-empty train set");
  for (int u : train)
    if (!g.has_label(u)) throw DomainError("train node without a label");

  const EmbedTrace tr = gcn_embed(adj, g.features(), w1, w2);
  const Matrix logits = matmul(tr.h2, wout);

  GcnGrads out;
  Matrix dlogits(logits.rows(), logits.cols());
  const double inv = 1.0 / static_cast<double>(train.size());
  for (int u : train) {
    const auto p = softmax(logits.row(u));
    out.loss += cross_entropy(p, g.label(u)) * inv;
    for (std::size_t c = 0; c < p.size(); ++c) dlogits(u, c) = p[c] * inv;
    dlogits(u, g.label(u)) -= inv;
  }

  out.dwout = matmul(transpose(tr.h2), dlogits);
  const Matrix dh2 = matmul(dlogits, transpose(wout));
  out.dw1 = Matrix(w1.rows(), w1.cols());
  out.dw2 = Matrix(w2.rows(), w2.cols());
  embed_backward(adj, tr, w2, dh2, out.dw1, out.dw2);
  return out;
}

}  // namespace detail

GcnModel train_node_classifier(const Graph& g, std::uint64_t seed, const GcnConfig& config) {
  if (g.train_nodes().empty()) throw DomainError("gcn training requires a non-empty train set");
  const int d = g.feat_dim();
  const int h = config.hidden;
  const int c = std::max(g.num_classes(), 2);

  PrngStream rng(seed);
  GcnModel m;
  m.config = config;
  m.seed = seed;
  auto r1 = rng.derive("w1");
  auto r2 = rng.derive("w2");
  auto r3 = rng.derive("w_out");
  m.w1 = glorot_uniform(d, h, r1);
  m.w2 = glorot_uniform(h, h, r2);
  m.w_out = glorot_uniform(h, c, r3);

  const NormAdj adj = NormAdj::build(g);
  AdamState st1(m.w1), st2(m.w2), st3(m.w_out);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto grads = detail::classifier_loss_and_grad(g, adj, m.w1, m.w2, m.w_out);
    adam_step(m.w1, grads.dw1, st1, config.lr);
    adam_step(m.w2, grads.dw2, st2, config.lr);
    adam_step(m.w_out, grads.dwout, st3, config.lr);
  }
  return m;
}

std::vector<int> predict_labels(const GcnModel& m, const Graph& g) {
  const Matrix p = gcn_forward(m, g);
  std::vector<int> labels(p.rows());
  for (std::size_t u = 0; u < p.rows(); ++u) {
    int best = 0;
    for (std::size_t c = 1; c < p.cols(); ++c)
      if (p(u, c) > p(u, best)) best = static_cast<int>(c);
    labels[u] = best;
  }
  return labels;
}

double target_loss(const GcnModel& m, const Graph& g, int v, int y) {
  g.check_node(v);
  if (y < 0 || y >= m.num_classes()) throw DomainError("target_loss: class id out of range");
  const Matrix p = gcn_forward(m, g);
  return cross_entropy(p.row(v), y);
}

std::vector<double> node_probs_local(const GcnModel& m, const Graph& g, int v) {
  g.check_node(v);
  if (g.feat_dim() != static_cast<int>(m.w1.rows()))
    throw DomainError("node_probs_local: feature dimension does not match the model");

  const std::size_t h = m.w1.cols();
  const auto coef = [&](int a, int b) {
    return 1.0 / std::sqrt((g.degree(a) + 1.0) * (g.degree(b) + 1.0));
  };
  // First layer only for v and its neighbors; everything else is unreachable
  // from the second-layer row at v.
  std::vector<int> ring{v};
  for (int w : g.neighbors(v)) ring.push_back(w);

  std::vector<double> ah1(h, 0.0);
  std::vector<double> ax(g.feat_dim());
  std::vector<double> h1(h);
  for (int w : ring) {
    std::fill(ax.begin(), ax.end(), 0.0);
    const auto xw = g.features().row(w);
    for (int i = 0; i < g.feat_dim(); ++i) ax[i] += coef(w, w) * xw[i];
    for (int z : g.neighbors(w)) {
      const double cz = coef(w, z);
      const auto xz = g.features().row(z);
      for (int i = 0; i < g.feat_dim(); ++i) ax[i] += cz * xz[i];
    }
    for (std::size_t j = 0; j < h; ++j) {
      double s = 0.0;
      for (int i = 0; i < g.feat_dim(); ++i) s += ax[i] * m.w1(i, j);
      h1[j] = s > 0.0 ? s : 0.0;
    }
    const double cw = coef(v, w);
    for (std::size_t j = 0; j < h; ++j) ah1[j] += cw * h1[j];
  }

  std::vector<double> h2(h);
  for (std::size_t j = 0; j < h; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < h; ++k) s += ah1[k] * m.w2(k, j);
    h2[j] = s > 0.0 ? s : 0.0;
  }
  std::vector<double> logits(m.w_out.cols());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    double s = 0.0;
    for (std::size_t k = 0; k < h; ++k) s += h2[k] * m.w_out(k, c);
    logits[c] = s;
  }
  return softmax(logits);
}

double target_loss_local(const GcnModel& m, const Graph& g, int v, int y) {
  if (y < 0 || y >= m.num_classes()) throw DomainError("target_loss: class id out of range");
  return cross_entropy(node_probs_local(m, g, v), y);
}

double train_loss(const GcnModel& m, const Graph& g) {
  const auto train = g.train_nodes();
  if (train.empty()) throw DomainError("train_loss requires a non-empty train set");
  const Matrix p = gcn_forward(m, g);
  double loss = 0.0;
  for (int u : train) loss += cross_entropy(p.row(u), g.label(u));
  return loss / static_cast<double>(train.size());
}

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  json data = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) data.push_back(m.data()[i]);
  j["data"] = std::move(data);
  return j;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto& data = j.at("data");
  if (data.size() != rows * cols) throw SchemaError("weight array size does not match its shape");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = data.at(i).get<double>();
  return m;
}

}  // namespace

void save_gcn_model(const GcnModel& m, const std::filesystem::path& path) {
  json j;
  j["kind"] = "gcn";
  j["hyper"] = {{"hidden", m.config.hidden},
                {"epochs", m.config.epochs},
                {"lr", m.config.lr},
                {"seed", m.seed}};
  j["w1"] = matrix_to_json(m.w1);
  j["w2"] = matrix_to_json(m.w2);
  j["w_out"] = matrix_to_json(m.w_out);
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write model file: " + path.string());
  out << j.dump(2) << "\n";
}

GcnModel load_gcn_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed model json: ") + e.what());
  }
  try {
    if (j.at("kind").get<std::string>() != "gcn") throw SchemaError("not a gcn model file");
    GcnModel m;
    const auto& hyper = j.at("hyper");
    m.config.hidden = hyper.at("hidden").get<int>();
    m.config.epochs = hyper.at("epochs").get<int>();
    m.config.lr = hyper.at("lr").get<double>();
    m.seed = hyper.at("seed").get<std::uint64_t>();
    m.w1 = matrix_from_json(j.at("w1"));
    m.w2 = matrix_from_json(j.at("w2"));
    m.w_out = matrix_from_json(j.at("w_out"));
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model json schema violation: ") + e.what());
  }
}

}  // namespace edog

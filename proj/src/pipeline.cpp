#include "edog/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace edog {

namespace {

using nlohmann::json;

std::uint64_t indexed_seed(std::uint64_t base, std::uint64_t index) {
  return PrngStream(base).derive(index).seed();
}

EdgeScores combine_edog(const Graph& g, const EdgeScores& lp_ggd, const EdgeScores& ggd,
                        const EdgeScores& od) {
  EdgeScores a = rank_normalize(lp_ggd);
  EdgeScores b = rank_normalize(ggd);
  EdgeScores c = rank_normalize(od);
  EdgeScores out;
  out.detector = "edog";
  for (const auto& [pair, sa] : a.scores) {
    double sb = b.scores.at(pair);
    double sc = c.scores.at(pair);
    bool high = g.degree(pair.u) + g.degree(pair.v) > kEdogDegreeGate;
    out.scores[pair] = high ? (sa + sb + sc) / 3.0 : (sa + sb) / 2.0;
  }
  return out;
}

}  // namespace

EdgeScores rank_normalize(const EdgeScores& scores) {
  if (scores.scores.empty()) throw DomainError("rank_normalize: no scores");
  EdgeScores out;
  out.detector = scores.detector;
  std::vector<std::pair<double, NodePair>> order;
  order.reserve(scores.scores.size());
  for (const auto& [pair, s] : scores.scores) order.emplace_back(s, pair);
  std::sort(order.begin(), order.end());
  const std::size_t n = order.size();
  if (n == 1) {
    out.scores[order[0].second] = 0.5;
    return out;
  }
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && order[j + 1].first == order[i].first) ++j;
    double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
    double value = (avg_rank - 1.0) / static_cast<double>(n - 1);
    for (std::size_t k = i; k <= j; ++k) out.scores[order[k].second] = value;
    i = j + 1;
  }
  return out;
}

EdgeScores ggd_detector_scores(const Graph& g, const std::vector<NodePair>& targets,
                               std::uint64_t seed) {
  GgdModel m = train_ggd(g, derive_seed(seed, "train"));
  return ggd_detect(m, g, targets, derive_seed(seed, "detect"));
}

EdgeScores edog_pair_scores(const Graph& g, const std::vector<NodePair>& targets,
                            std::uint64_t seed) {
  EdgeScores lpg = lp_filter_ggd_scores(g, targets, derive_seed(seed, "lp+ggd"));
  EdgeScores ggd = ggd_detector_scores(g, targets, derive_seed(seed, "ggd"));
  EdgeScores od = od_pair_scores(g, targets, derive_seed(seed, "od"));
  return combine_edog(g, lpg, ggd, od);
}

EdgeScores edog_detect(const Graph& g, std::uint64_t seed) {
  return edog_pair_scores(g, g.edges(), seed);
}

EdogScorer::EdogScorer(const Graph& g, std::uint64_t seed)
    : g_(g),
      lp_ggd_(fit_lp_filter_ggd(g, derive_seed(seed, "lp+ggd"))),
      ggd_(train_ggd(g, derive_seed(derive_seed(seed, "ggd"), "train"))),
      od_(fit_od(g, derive_seed(seed, "od"))),
      lp_ggd_detect_seed_(derive_seed(derive_seed(seed, "lp+ggd"), "detect")),
      ggd_detect_seed_(derive_seed(derive_seed(seed, "ggd"), "detect")) {}

EdgeScores EdogScorer::score(const std::vector<NodePair>& targets) const {
  EdgeScores lpg = ggd_detect(lp_ggd_, g_, targets, lp_ggd_detect_seed_);
  lpg.detector = "lp+ggd";
  EdgeScores ggd = ggd_detect(ggd_, g_, targets, ggd_detect_seed_);
  EdgeScores od = od_score_pairs(od_, g_, targets);
  return combine_edog(g_, lpg, ggd, od);
}

std::map<NodePair, double> EdogScorer::operator()(const Graph& g,
                                                  const std::vector<NodePair>& targets) const {
  (void)g;  // the models are fit on the construction graph
  return score(targets).scores;
}

EdgeScores detect_by_name(const Graph& g, const std::string& method, std::uint64_t seed,
                          double katz_beta) {
  if (method == "lp") {
    LpModel m = train_lp(g, seed);
    return lp_pair_scores(m, g, g.edges());
  }
  if (method == "ggd") return ggd_detector_scores(g, g.edges(), seed);
  if (method == "lp+ggd") return lp_filter_ggd(g, seed);
  if (method == "od") return od_detect(g, seed);
  if (method == "edog") return edog_detect(g, seed);
  if (method == "ald") return ald_detector(g, seed);
  if (method == "katz") return katz_detector_scores(g, katz_beta);
  if (method == "cn") return cn_detector_scores(g);
  if (method == "aa") return aa_detector_scores(g);
  throw DomainError("unknown detection method: " + method);
}

void save_scores(const EdgeScores& scores, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out << "u,v,score\n";
  char buf[64];
  for (const auto& [pair, s] : scores.scores) {
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    out << pair.u << ',' << pair.v << ',' << buf << '\n';
  }
}

namespace {

int parse_int_field(const std::string& s, int lineno) {
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw ParseError("scores line " + std::to_string(lineno) + ": bad integer '" + s + "'");
  }
  if (used != s.size())
    throw ParseError("scores line " + std::to_string(lineno) + ": bad integer '" + s + "'");
  return value;
}

double parse_double_field(const std::string& s, int lineno) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("scores line " + std::to_string(lineno) + ": bad number '" + s + "'");
  }
  if (used != s.size())
    throw ParseError("scores line " + std::to_string(lineno) + ": bad number '" + s + "'");
  return value;
}

}  // namespace

EdgeScores load_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty scores file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "u,v,score") throw ParseError(path.string() + ": expected header 'u,v,score'");
  EdgeScores out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw ParseError("scores line " + std::to_string(lineno) + ": expected u,v,score");
    int u = parse_int_field(line.substr(0, c1), lineno);
    int v = parse_int_field(line.substr(c1 + 1, c2 - c1 - 1), lineno);
    double s = parse_double_field(line.substr(c2 + 1), lineno);
    if (u < 0 || v < 0)
      throw SchemaError("scores line " + std::to_string(lineno) + ": negative node id");
    if (u == v) throw SchemaError("scores line " + std::to_string(lineno) + ": self-pair");
    NodePair pair(u, v);
    if (out.scores.count(pair))
      throw SchemaError("scores line " + std::to_string(lineno) + ": duplicate pair");
    out.scores[pair] = s;
  }
  return out;
}

namespace {

json config_to_json(const ExperimentConfig& c) {
  json dataset;
  if (!c.graph_file.empty()) {
    dataset["file"] = c.graph_file;
  } else {
    dataset["kind"] = c.gen_kind;
    dataset["n"] = c.n;
    if (c.gen_kind == "er")
      dataset["p"] = c.p;
    else
      dataset["m"] = c.m;
  }
  dataset["seed"] = c.dataset_seed;
  dataset["feature_dim"] = c.feature_dim;
  dataset["smooth_rounds"] = c.smooth_rounds;
  dataset["train_frac"] = c.train_frac;

  json attack;
  attack["profile"] = c.attack;
  attack["num_targets"] = c.num_targets;
  if (!c.target_degrees.empty()) attack["target_degrees"] = c.target_degrees;
  attack["min_target_degree"] = c.min_target_degree;
  attack["adaptive"] = c.adaptive;
  attack["retry_cap"] = c.retry_cap;

  json j;
  j["dataset"] = dataset;
  j["attack"] = attack;
  j["detectors"] = c.detectors;
  j["seed"] = c.seed;
  j["include_timing"] = c.include_timing;
  return j;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("config: top level must be an object");
  ExperimentConfig cfg;
  try {
    if (!j.contains("dataset") || !j.at("dataset").is_object())
      throw SchemaError("config: missing 'dataset' object");
    const json& d = j.at("dataset");
    if (d.contains("file")) {
      cfg.graph_file = d.at("file").get<std::string>();
    } else {
      cfg.gen_kind = d.value("kind", std::string("ba"));
      if (cfg.gen_kind != "er" && cfg.gen_kind != "ba")
        throw SchemaError("config: dataset.kind must be 'er' or 'ba'");
      if (!d.contains("n")) throw SchemaError("config: generated dataset needs 'n'");
      cfg.n = d.at("n").get<int>();
      cfg.p = d.value("p", 0.0);
      cfg.m = d.value("m", 1);
    }
    cfg.dataset_seed = d.value("seed", std::uint64_t{1});
    cfg.feature_dim = d.value("feature_dim", 20);
    cfg.smooth_rounds = d.value("smooth_rounds", 3);
    cfg.train_frac = d.value("train_frac", 0.1);

    if (!j.contains("attack") || !j.at("attack").is_object())
      throw SchemaError("config: missing 'attack' object");
    const json& a = j.at("attack");
    if (!a.contains("profile")) throw SchemaError("config: attack needs 'profile'");
    cfg.attack = a.at("profile").get<std::string>();
    cfg.num_targets = a.value("num_targets", 5);
    if (a.contains("target_degrees"))
      cfg.target_degrees = a.at("target_degrees").get<std::vector<int>>();
    cfg.min_target_degree = a.value("min_target_degree", 1);
    cfg.adaptive = a.value("adaptive", false);
    cfg.retry_cap = a.value("retry_cap", 30);

    if (j.contains("detectors")) cfg.detectors = j.at("detectors").get<std::vector<std::string>>();
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.include_timing = j.value("include_timing", false);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  try {
    attack_kind_from_name(cfg.attack);
  } catch (const DomainError& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  if (cfg.detectors.empty()) throw SchemaError("config: detector list is empty");
  if (cfg.retry_cap < 1) throw SchemaError("config: retry_cap must be >= 1");
  if (cfg.num_targets < 1 && cfg.target_degrees.empty())
    throw SchemaError("config: num_targets must be >= 1");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return experiment_config_from_json(buf.str());
}

Graph build_dataset(const ExperimentConfig& config) {
  if (!config.graph_file.empty()) {
    Graph g = load_graph(config.graph_file);
    if (g.feat_dim() == 0 || g.num_classes() == 0)
      throw DomainError("dataset file needs node features and labels");
    if (g.train_nodes().empty()) throw DomainError("dataset file needs a train mask");
    return g;
  }
  Graph g;
  if (config.gen_kind == "er") {
    double p = config.p > 0.0 ? config.p
                              : std::log(static_cast<double>(config.n)) / config.n;
    g = gen_erdos_renyi(config.n, p, config.dataset_seed);
  } else {
    g = gen_barabasi_albert(config.n, config.m, config.dataset_seed);
  }
  synth_annotate(g, config.feature_dim, config.smooth_rounds,
                 derive_seed(config.dataset_seed, "annotate"));
  assign_train_mask(g, config.train_frac, derive_seed(config.dataset_seed, "train_mask"));
  return g;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.config = config;
  const Graph g = build_dataset(config);
  const AttackKind kind = attack_kind_from_name(config.attack);
  const GcnModel gcn = train_node_classifier(g, derive_seed(config.seed, "gcn"));
  const std::uint64_t attack_base = derive_seed(config.seed, "attack");
  const std::uint64_t detect_base = derive_seed(config.seed, "detect");

  std::optional<EdogScorer> scorer;
  if (config.adaptive && kind != AttackKind::Meta)
    scorer.emplace(g, derive_seed(config.seed, "adaptive"));

  auto detect_and_record = [&](const AttackResult& res, int degree, int attempt) {
    TargetRecord rec;
    rec.attack = res;
    rec.degree = degree;
    Graph attacked = g;
    for (NodePair e : res.added_edges) attacked.add_edge(e.u, e.v);
    const std::uint64_t det_attempt = indexed_seed(detect_base, static_cast<std::uint64_t>(attempt));
    for (const std::string& name : config.detectors) {
      EdgeScores s = detect_by_name(attacked, name, derive_seed(det_attempt, name));
      rec.auc[name] = roc_auc(s, res.added_edges);
    }
    rep.targets.push_back(std::move(rec));
  };

  if (kind == AttackKind::Meta) {
    AttackResult res = meta_attack(g, gcn, indexed_seed(attack_base, 0));
    rep.attempts = 1;
    if (!res.added_edges.empty()) {
      detect_and_record(res, 0, 0);
    } else {
      rep.targets.push_back(TargetRecord{res, 0, {}});
    }
    if (!res.success) rep.warning = "meta attack did not raise the training misclassification rate";
  } else {
    const std::vector<int> predicted = predict_labels(gcn, g);
    std::vector<int> pool;
    for (int v = 0; v < g.num_nodes(); ++v)
      if (g.has_label(v) && predicted[static_cast<std::size_t>(v)] == g.label(v) &&
          g.degree(v) >= 1)
        pool.push_back(v);
    PrngStream(derive_seed(config.seed, "targets")).shuffle(pool);

    int attempt = 0;
    std::set<int> used;
    auto try_target = [&](int target) {
      const std::uint64_t atk_seed = indexed_seed(attack_base, static_cast<std::uint64_t>(attempt));
      ++attempt;
      AttackResult res;
      try {
        if (config.adaptive)
          res = adaptive_attack(g, gcn, target, kind, std::ref(*scorer), atk_seed);
        else
          res = greedy_target_attack(g, gcn, target, kind, atk_seed);
      } catch (const DomainError&) {
        return false;  // e.g. target misclassified under the localized forward
      }
      if (!res.success) return false;
      detect_and_record(res, g.degree(target), attempt - 1);
      used.insert(target);
      return true;
    };

    std::size_t requested = 0;
    int successes = 0;
    if (!config.target_degrees.empty()) {
      requested = config.target_degrees.size();
      for (int want : config.target_degrees) {
        if (attempt >= config.retry_cap) break;
        for (int target : pool) {
          if (attempt >= config.retry_cap) break;
          if (g.degree(target) != want || used.count(target)) continue;
          if (try_target(target)) {
            ++successes;
            break;
          }
        }
      }
    } else {
      requested = static_cast<std::size_t>(config.num_targets);
      for (int target : pool) {
        if (successes >= config.num_targets || attempt >= config.retry_cap) break;
        if (g.degree(target) < config.min_target_degree) continue;
        if (try_target(target)) ++successes;
      }
    }
    rep.attempts = attempt;
    if (static_cast<std::size_t>(successes) < requested)
      rep.warning = "only " + std::to_string(successes) + " of " + std::to_string(requested) +
                    " targets attacked successfully";
  }

  for (const std::string& name : config.detectors) {
    double sum = 0.0;
    int count = 0;
    for (const TargetRecord& rec : rep.targets) {
      auto it = rec.auc.find(name);
      if (it != rec.auc.end()) {
        sum += it->second;
        ++count;
      }
    }
    if (count > 0) rep.aggregate_auc[name] = sum / count;
  }

  rep.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::string report_to_json(const ExperimentReport& report) {
  json j;
  j["config"] = config_to_json(report.config);
  json targets = json::array();
  const bool meta = report.config.attack == "meta";
  for (const TargetRecord& rec : report.targets) {
    json t;
    t["target"] = rec.attack.target ? json(*rec.attack.target) : json(nullptr);
    t["degree"] = rec.degree;
    json added = json::array();
    for (NodePair e : rec.attack.added_edges) added.push_back({e.u, e.v});
    t["added_edges"] = added;
    t["success"] = rec.attack.success;
    if (meta) {
      t["pre_misclass"] = rec.attack.pre_misclass;
      t["post_misclass"] = rec.attack.post_misclass;
    } else {
      t["pre_label"] = rec.attack.pre_label;
      t["post_label"] = rec.attack.post_label;
    }
    t["seed"] = rec.attack.seed;
    t["auc"] = json(rec.auc);
    targets.push_back(std::move(t));
  }
  j["targets"] = targets;
  j["aggregate_auc"] = json(report.aggregate_auc);
  j["attempts"] = report.attempts;
  if (!report.warning.empty()) j["warning"] = report.warning;
  if (report.config.include_timing) j["wall_clock_seconds"] = report.wall_clock_seconds;
  return j.dump(2) + "\n";
}

void save_report(const ExperimentReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot open " + path.string() + " for writing");
  out << report_to_json(report);
}

RandomEdgeReport random_edge_experiment(const Graph& g, const std::vector<int>& counts,
                                        std::uint64_t seed,
                                        const std::vector<std::string>& detectors) {
  if (counts.empty()) throw DomainError("random_edge_experiment: no counts");
  for (int k : counts)
    if (k < 1) throw DomainError("random_edge_experiment: counts must be >= 1");
  RandomEdgeReport rep;
  rep.counts = counts;
  const std::uint64_t edges_base = derive_seed(seed, "edges");
  const std::uint64_t detect_base = derive_seed(seed, "detect");
  for (int k : counts) {
    PrngStream er = PrngStream(edges_base).derive(static_cast<std::uint64_t>(k));
    const std::vector<NodePair> added = sample_non_edges(g, static_cast<std::size_t>(k), er);
    Graph attacked = g;
    for (NodePair e : added) attacked.add_edge(e.u, e.v);
    const std::set<NodePair> added_set(added.begin(), added.end());
    const std::uint64_t det_k = indexed_seed(detect_base, static_cast<std::uint64_t>(k));
    for (const std::string& name : detectors) {
      EdgeScores s = detect_by_name(attacked, name, derive_seed(det_k, name));
      std::vector<NodePair> top = detail::top_suspicious(s, static_cast<std::size_t>(k));
      int missed = 0;
      for (NodePair e : top)
        if (!added_set.count(e)) ++missed;
      rep.ratios[name].push_back(static_cast<double>(missed) / static_cast<double>(k));
    }
  }
  for (const auto& [name, rs] : rep.ratios) {
    double sum = 0.0;
    for (double r : rs) sum += r;
    rep.mean_ratio[name] = sum / static_cast<double>(rs.size());
  }
  return rep;
}

std::string random_edge_report_to_json(const RandomEdgeReport& report) {
  json j;
  j["counts"] = report.counts;
  j["ratios"] = json(report.ratios);
  j["mean_ratio"] = json(report.mean_ratio);
  return j.dump(2) + "\n";
}

}  // namespace edog

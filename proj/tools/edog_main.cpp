#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edog/attack.hpp"
#include "edog/gcn.hpp"
#include "edog/graph.hpp"
#include "edog/metrics.hpp"
#include "edog/pipeline.hpp"

namespace {

using namespace edog;

std::uint64_t indexed_seed(std::uint64_t base, std::uint64_t index) {
  return PrngStream(base).derive(index).seed();
}

void cmd_gen(const std::string& kind, int n, double p, int m, std::uint64_t seed,
             int feature_dim, int smooth_rounds, double train_frac, bool raw,
             const std::string& out) {
  Graph g;
  if (raw) {
    if (kind == "er") {
      double pp = p > 0.0 ? p : std::log(static_cast<double>(n)) / n;
      g = gen_erdos_renyi(n, pp, seed);
    } else {
      g = gen_barabasi_albert(n, m, seed);
    }
  } else {
    ExperimentConfig cfg;
    cfg.gen_kind = kind;
    cfg.n = n;
    cfg.p = p;
    cfg.m = m;
    cfg.dataset_seed = seed;
    cfg.feature_dim = feature_dim;
    cfg.smooth_rounds = smooth_rounds;
    cfg.train_frac = train_frac;
    g = build_dataset(cfg);
  }
  save_graph(g, out);
}

void cmd_train(const std::string& graph_file, std::uint64_t seed, const std::string& out) {
  Graph g = load_graph(graph_file);
  GcnModel m = train_node_classifier(g, seed);
  save_gcn_model(m, out);
}

void cmd_attack(const std::string& graph_file, const std::string& model_file,
                const std::string& profile, int target, const std::vector<int>& by_degree,
                std::uint64_t seed, const std::string& out) {
  Graph g = load_graph(graph_file);
  GcnModel m = load_gcn_model(model_file);
  AttackKind kind = attack_kind_from_name(profile);
  std::vector<AttackResult> results;

  if (kind == AttackKind::Meta) {
    if (target >= 0 || !by_degree.empty())
      throw DomainError("the meta profile takes no target selection");
    results.push_back(meta_attack(g, m, seed));
  } else if (target >= 0) {
    if (!by_degree.empty())
      throw DomainError("pass either --target or --targets-by-degree, not both");
    results.push_back(greedy_target_attack(g, m, target, kind, seed));
  } else if (!by_degree.empty()) {
    std::vector<int> predicted = predict_labels(m, g);
    std::vector<int> pool;
    for (int v = 0; v < g.num_nodes(); ++v)
      if (g.has_label(v) && predicted[static_cast<std::size_t>(v)] == g.label(v))
        pool.push_back(v);
    PrngStream(derive_seed(seed, "targets")).shuffle(pool);
    std::uint64_t attack_base = derive_seed(seed, "attack");
    std::uint64_t attempt = 0;
    std::set<int> used;
    for (int want : by_degree) {
      bool found = false;
      for (int v : pool) {
        if (g.degree(v) != want || used.count(v)) continue;
        AttackResult res;
        try {
          res = greedy_target_attack(g, m, v, kind, indexed_seed(attack_base, attempt++));
        } catch (const DomainError&) {
          continue;
        }
        if (!res.success) continue;
        results.push_back(res);
        used.insert(v);
        found = true;
        break;
      }
      if (!found)
        std::cerr << "warning: no successful attack on a degree-" << want << " target\n";
    }
    if (results.empty()) throw DomainError("no target was attacked successfully");
  } else {
    throw DomainError("pass --target or --targets-by-degree");
  }
  save_attack_results(results, out);
}

void cmd_detect(const std::string& graph_file, const std::string& method, std::uint64_t seed,
                double beta, const std::string& out) {
  Graph g = load_graph(graph_file);
  EdgeScores scores = detect_by_name(g, method, seed, beta);
  save_scores(scores, out);
}

void cmd_eval(const std::string& scores_file, const std::string& attack_file) {
  EdgeScores scores = load_scores(scores_file);
  std::vector<AttackResult> results = load_attack_results(attack_file);
  std::vector<NodePair> malicious;
  for (const AttackResult& r : results)
    malicious.insert(malicious.end(), r.added_edges.begin(), r.added_edges.end());
  double auc = roc_auc(scores, malicious);
  std::printf("%.17g\n", auc);
}

void cmd_exp(const std::string& config_file, const std::string& out) {
  ExperimentConfig cfg = load_experiment_config(config_file);
  ExperimentReport rep = run_experiment(cfg);
  save_report(rep, out);
}

void cmd_random_edges(const std::string& graph_file, const std::vector<int>& counts,
                      std::uint64_t seed, const std::vector<std::string>& detectors,
                      const std::string& out) {
  Graph g = load_graph(graph_file);
  RandomEdgeReport rep = random_edge_experiment(g, counts, seed, detectors);
  std::string text = random_edge_report_to_json(rep);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw DomainError("cannot open " + out + " for writing");
    f << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EDoG: malicious edge detection for attacked graphs"};
  app.require_subcommand(1);

  // gen
  std::string gen_kind = "ba";
  int gen_n = 300;
  double gen_p = 0.0;
  int gen_m = 1;
  std::uint64_t gen_seed = 1;
  int gen_fdim = 20;
  int gen_rounds = 3;
  double gen_frac = 0.1;
  bool gen_raw = false;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic annotated graph");
  gen->add_option("--kind", gen_kind, "Generator: er or ba")
      ->check(CLI::IsMember({"er", "ba"}));
  gen->add_option("--n", gen_n, "Number of nodes")->check(CLI::PositiveNumber);
  gen->add_option("--p", gen_p, "Edge probability (er); defaults to ln(n)/n");
  gen->add_option("--m", gen_m, "Edges per new node (ba)")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Dataset seed");
  gen->add_option("--feature-dim", gen_fdim, "Synthetic feature dimension");
  gen->add_option("--smooth-rounds", gen_rounds, "Feature smoothing rounds");
  gen->add_option("--train-frac", gen_frac, "Training-node fraction");
  gen->add_flag("--raw", gen_raw, "Skip feature/label/train-mask annotation");
  gen->add_option("--out", gen_out, "Output graph JSON")->required();
  gen->callback([&] {
    cmd_gen(gen_kind, gen_n, gen_p, gen_m, gen_seed, gen_fdim, gen_rounds, gen_frac, gen_raw,
            gen_out);
  });

  // train
  std::string train_graph, train_out;
  std::uint64_t train_seed = 1;
  auto* train = app.add_subcommand("train", "Train the node classifier");
  train->add_option("--graph", train_graph, "Input graph JSON")->required();
  train->add_option("--seed", train_seed, "Training seed");
  train->add_option("--out", train_out, "Output model JSON")->required();
  train->callback([&] { cmd_train(train_graph, train_seed, train_out); });

  // attack
  std::string atk_graph, atk_model, atk_profile = "single", atk_out;
  int atk_target = -1;
  std::vector<int> atk_by_degree;
  std::uint64_t atk_seed = 1;
  auto* attack = app.add_subcommand("attack", "Run a greedy evasion attack");
  attack->add_option("--graph", atk_graph, "Input graph JSON")->required();
  attack->add_option("--model", atk_model, "Trained classifier JSON")->required();
  attack->add_option("--profile", atk_profile, "single, multi-direct, multi-indirect or meta")
      ->check(CLI::IsMember({"single", "multi-direct", "multi-indirect", "meta"}));
  attack->add_option("--target", atk_target, "Target node id");
  attack->add_option("--targets-by-degree", atk_by_degree,
                     "Comma-separated target degrees; one successful target each")
      ->delimiter(',');
  attack->add_option("--seed", atk_seed, "Attack seed");
  attack->add_option("--out", atk_out, "Output attack JSON")->required();
  attack->callback([&] {
    cmd_attack(atk_graph, atk_model, atk_profile, atk_target, atk_by_degree, atk_seed, atk_out);
  });

  // detect
  std::string det_graph, det_method = "edog", det_out;
  std::uint64_t det_seed = 1;
  double det_beta = kKatzBeta;
  auto* detect = app.add_subcommand("detect", "Score edges for maliciousness");
  detect->add_option("--graph", det_graph, "Input graph JSON")->required();
  detect->add_option("--method", det_method, "Detector name")
      ->check(CLI::IsMember({"lp", "ggd", "lp+ggd", "od", "edog", "ald", "katz", "cn", "aa"}));
  detect->add_option("--seed", det_seed, "Detection seed");
  detect->add_option("--beta", det_beta, "Katz damping factor");
  detect->add_option("--out", det_out, "Output scores CSV")->required();
  detect->callback([&] { cmd_detect(det_graph, det_method, det_seed, det_beta, det_out); });

  // eval
  std::string eval_scores, eval_attack;
  auto* eval = app.add_subcommand("eval", "AUC of scores against an attack's added edges");
  eval->add_option("--scores", eval_scores, "Scores CSV")->required();
  eval->add_option("--attack", eval_attack, "Attack result JSON")->required();
  eval->callback([&] { cmd_eval(eval_scores, eval_attack); });

  // exp
  std::string exp_config, exp_out;
  auto* exp = app.add_subcommand("exp", "Run a configured end-to-end experiment");
  exp->add_option("--config", exp_config, "Experiment config JSON")->required();
  exp->add_option("--out", exp_out, "Output report JSON")->required();
  exp->callback([&] { cmd_exp(exp_config, exp_out); });

  // random-edges
  std::string re_graph, re_out;
  std::vector<int> re_counts{1, 2, 4, 8, 16};
  std::vector<std::string> re_detectors{"edog", "ald", "katz"};
  std::uint64_t re_seed = 1;
  auto* re = app.add_subcommand("random-edges", "Random-edge distraction experiment");
  re->add_option("--graph", re_graph, "Input graph JSON")->required();
  re->add_option("--counts", re_counts, "Comma-separated edge counts")->delimiter(',');
  re->add_option("--detectors", re_detectors, "Comma-separated detector names")->delimiter(',');
  re->add_option("--seed", re_seed, "Experiment seed");
  re->add_option("--out", re_out, "Output report JSON (stdout when omitted)");
  re->callback([&] { cmd_random_edges(re_graph, re_counts, re_seed, re_detectors, re_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const edog::SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const edog::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

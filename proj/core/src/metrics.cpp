#include "curvgraph/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "curvgraph/errors.hpp"
#include "curvgraph/io.hpp"

namespace curvgraph {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("roc_auc: size mismatch");
  }
  std::int64_t n_pos = 0, n_neg = 0;
  for (int l : labels) (l != 0 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("roc_auc: both classes required");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  // Tie-averaged ranks; AUC from the Mann-Whitney statistic.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           scores[order[j + 1]] == scores[order[i]]) {
      ++j;
    }
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) +
                                   static_cast<double>(j + 1));
    for (std::size_t t = i; t <= j; ++t) {
      if (labels[order[t]] != 0) rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }
  const double u_stat =
      rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u_stat / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

F1Scores f1_scores(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("f1_scores: length mismatch");
  }
  if (truth.empty()) throw std::invalid_argument("f1_scores: empty input");
  std::set<int> classes(truth.begin(), truth.end());
  classes.insert(pred.begin(), pred.end());

  std::map<int, std::int64_t> tp, fp, fn;
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) {
      ++tp[pred[i]];
      ++correct;
    } else {
      ++fp[pred[i]];
      ++fn[truth[i]];
    }
  }
  F1Scores out;
  out.micro = static_cast<double>(correct) / static_cast<double>(pred.size());
  double macro_sum = 0.0;
  for (int c : classes) {
    const double denom =
        2.0 * tp[c] + fp[c] + fn[c];
    macro_sum += denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
  }
  out.macro = macro_sum / static_cast<double>(classes.size());
  return out;
}

double link_prediction_auc(const EmbeddingTable& disc_emb,
                           const DiscriminatorParams& disc, Curvature k,
                           std::span<const std::pair<int, int>> test_pos,
                           std::span<const std::pair<int, int>> test_neg) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(test_pos.size() + test_neg.size());
  labels.reserve(scores.capacity());
  for (const auto& [u, v] : test_pos) {
    scores.push_back(
        fermi_dirac_score<double>(disc_emb.row(u), disc_emb.row(v), disc, k));
    labels.push_back(1);
  }
  for (const auto& [u, v] : test_neg) {
    scores.push_back(
        fermi_dirac_score<double>(disc_emb.row(u), disc_emb.row(v), disc, k));
    labels.push_back(0);
  }
  return roc_auc(scores, labels);
}

namespace {

void finalize_stats(MetricsReport& report) {
  const auto n = static_cast<double>(report.run_values.size());
  double mean = 0.0;
  for (double v : report.run_values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : report.run_values) var += (v - mean) * (v - mean);
  report.mean = mean;
  report.stddev = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
}

}  // namespace

MetricsReport run_link_prediction(const Graph& g, const TrainingConfig& config,
                                  int n_runs, double test_ratio) {
  const auto start = std::chrono::steady_clock::now();
  MetricsReport report;
  report.task = "link_prediction";
  report.config_hash = config_hash(config);
  double kappa_sum = 0.0;
  for (int run = 0; run < n_runs; ++run) {
    const std::uint64_t run_seed = mix_seed(config.seed, 100 + run);
    const EdgeSplit split = split_edges(g, test_ratio, run_seed);
    const Graph train_graph = graph_from_edges(g, split.train_edges);
    TrainingConfig run_config = config;
    run_config.seed = run_seed;
    const TrainState state = train(train_graph, run_config);
    report.run_values.push_back(link_prediction_auc(
        state.disc_emb, state.disc, state.k, split.test_pos, split.test_neg));
    kappa_sum += state.k.kappa;
  }
  finalize_stats(report);
  report.auc = report.mean;
  report.global_kappa = kappa_sum / n_runs;
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

MetricsReport run_node_classification(const Graph& g,
                                      const TrainingConfig& config,
                                      int n_runs, double label_test_ratio) {
  if (!g.has_labels()) {
    throw GraphError("run_node_classification: graph has no labels");
  }
  const auto start = std::chrono::steady_clock::now();
  MetricsReport report;
  report.task = "node_classification";
  report.config_hash = config_hash(config);

  std::vector<int> labelled;
  for (int u = 0; u < g.num_nodes(); ++u) {
    if (g.labels()[u] >= 0) labelled.push_back(u);
  }
  double kappa_sum = 0.0;
  double micro_sum = 0.0, macro_sum = 0.0;
  for (int run = 0; run < n_runs; ++run) {
    const std::uint64_t run_seed = mix_seed(config.seed, 200 + run);
    TrainingConfig run_config = config;
    run_config.seed = run_seed;
    run_config.nc_joint = true;

    std::vector<int> shuffled = labelled;
    Rng rng(run_seed);
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1],
                shuffled[rng.uniform_int(static_cast<int>(i))]);
    }
    const auto n_test = static_cast<std::size_t>(
        std::llround(label_test_ratio * static_cast<double>(shuffled.size())));
    std::vector<int> test_nodes(shuffled.begin(), shuffled.begin() + n_test);
    std::vector<int> train_nodes(shuffled.begin() + n_test, shuffled.end());

    const TrainState state = train(g, run_config, {}, train_nodes);
    const Classification clf =
        classify_nodes(state.disc_emb, g.labels(), train_nodes,
                       LogisticRegConfig{}, state.k);
    std::vector<int> pred, truth;
    pred.reserve(test_nodes.size());
    truth.reserve(test_nodes.size());
    for (int u : test_nodes) {
      pred.push_back(clf.predicted[u]);
      truth.push_back(g.labels()[u]);
    }
    const F1Scores f1 = f1_scores(pred, truth);
    report.run_values.push_back(f1.micro);
    micro_sum += f1.micro;
    macro_sum += f1.macro;
    kappa_sum += state.k.kappa;
  }
  finalize_stats(report);
  report.micro_f1 = micro_sum / n_runs;
  report.macro_f1 = macro_sum / n_runs;
  report.global_kappa = kappa_sum / n_runs;
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

std::vector<SweepPoint> run_robustness_sweep(
    const Graph& g, const TrainingConfig& config,
    std::span<const double> ratios, AttackSpec::Mode mode, int n_runs,
    double test_fraction) {
  // One clean split shared by every ratio and run.
  const EdgeSplit split =
      split_edges(g, test_fraction, mix_seed(config.seed, 300));
  const Graph train_graph = graph_from_edges(g, split.train_edges);

  std::vector<SweepPoint> points;
  for (double ratio : ratios) {
    const auto start = std::chrono::steady_clock::now();
    SweepPoint point;
    point.ratio = ratio;
    point.report.task = "link_prediction";
    point.report.config_hash = config_hash(config);
    double kappa_sum = 0.0;
    for (int run = 0; run < n_runs; ++run) {
      const std::uint64_t run_seed = mix_seed(config.seed, 400 + run);
      Graph attacked =
          ratio > 0.0
              ? rand_attack(train_graph, AttackSpec{mode, ratio, run_seed})
              : graph_from_edges(train_graph, train_graph.edges());
      TrainingConfig run_config = config;
      run_config.seed = run_seed;
      const TrainState state = train(attacked, run_config);
      point.report.run_values.push_back(
          link_prediction_auc(state.disc_emb, state.disc, state.k,
                              split.test_pos, split.test_neg));
      kappa_sum += state.k.kappa;
    }
    finalize_stats(point.report);
    point.report.auc = point.report.mean;
    point.report.global_kappa = kappa_sum / n_runs;
    point.report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    points.push_back(std::move(point));
  }
  return points;
}

std::vector<SweepPoint> run_generalization_sweep(
    const Graph& g, const TrainingConfig& config,
    std::span<const double> train_ratios, int n_runs) {
  std::vector<SweepPoint> points;
  for (double train_ratio : train_ratios) {
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
      throw GraphError("run_generalization_sweep: train ratio outside (0, 1)");
    }
    const auto start = std::chrono::steady_clock::now();
    SweepPoint point;
    point.ratio = train_ratio;
    point.report.task = "link_prediction";
    point.report.config_hash = config_hash(config);
    double kappa_sum = 0.0;
    for (int run = 0; run < n_runs; ++run) {
      const std::uint64_t run_seed = mix_seed(config.seed, 500 + run);
      const EdgeSplit split = split_edges(g, 1.0 - train_ratio, run_seed);
      const Graph train_graph = graph_from_edges(g, split.train_edges);
      TrainingConfig run_config = config;
      run_config.seed = run_seed;
      const TrainState state = train(train_graph, run_config);
      point.report.run_values.push_back(
          link_prediction_auc(state.disc_emb, state.disc, state.k,
                              split.test_pos, split.test_neg));
      kappa_sum += state.k.kappa;
    }
    finalize_stats(point.report);
    point.report.auc = point.report.mean;
    point.report.global_kappa = kappa_sum / n_runs;
    point.report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    points.push_back(std::move(point));
  }
  return points;
}

}  // namespace curvgraph

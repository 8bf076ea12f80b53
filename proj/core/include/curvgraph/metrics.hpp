#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "curvgraph/graph.hpp"
#include "curvgraph/model.hpp"
#include "curvgraph/training.hpp"

namespace curvgraph {

// Probability that a random positive outscores a random negative, ties
// counted half; computed exactly via rank statistics.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
};

// Micro (pooled) and macro (unweighted per-class mean) F1 over single-label
// predictions. Classes are the union of values seen in either vector.
F1Scores f1_scores(std::span<const int> pred, std::span<const int> truth);

struct MetricsReport {
  std::string task;  // "link_prediction" or "node_classification"
  std::optional<double> auc;
  std::optional<double> micro_f1;
  std::optional<double> macro_f1;
  double mean = 0.0;
  double stddev = 0.0;
  double runtime_seconds = 0.0;
  double global_kappa = 0.0;
  std::string config_hash;
  std::vector<double> run_values;  // headline metric, one entry per run
};

// Fermi-Dirac scores of the labelled pair set against the discriminator
// embeddings, reduced to AUC.
double link_prediction_auc(const EmbeddingTable& disc_emb,
                           const DiscriminatorParams& disc, Curvature k,
                           std::span<const std::pair<int, int>> test_pos,
                           std::span<const std::pair<int, int>> test_neg);

// Split / train / score, repeated n_runs times with derived seeds;
// aggregates mean and sample standard deviation of the AUC.
MetricsReport run_link_prediction(const Graph& g, const TrainingConfig& config,
                                  int n_runs = 5, double test_ratio = 0.5);

// Joint-objective training on the full graph with a per-run label split,
// scored with the tangent-space classifier.
MetricsReport run_node_classification(const Graph& g,
                                      const TrainingConfig& config,
                                      int n_runs = 5,
                                      double label_test_ratio = 0.5);

struct SweepPoint {
  double ratio = 0.0;
  MetricsReport report;
};

// Robustness protocol: one fixed clean test split (test_fraction of the
// edges), then for each ratio perturb the training graph, retrain and score
// against the shared test set.
std::vector<SweepPoint> run_robustness_sweep(
    const Graph& g, const TrainingConfig& config,
    std::span<const double> ratios, AttackSpec::Mode mode, int n_runs = 5,
    double test_fraction = 0.10);

// Generalization protocol: vary the training edge ratio; each point uses a
// fresh split with test_ratio = 1 - train_ratio.
std::vector<SweepPoint> run_generalization_sweep(
    const Graph& g, const TrainingConfig& config,
    std::span<const double> train_ratios, int n_runs = 5);

}  // namespace curvgraph

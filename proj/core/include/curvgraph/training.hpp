#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "curvgraph/curvature.hpp"
#include "curvgraph/graph.hpp"
#include "curvgraph/model.hpp"

namespace curvgraph {

struct TrainingConfig {
  int epochs = 100;           // outer epochs
  int disc_iters = 10;        // discriminator inner iterations per epoch
  int gen_iters = 10;         // generator inner iterations per epoch
  int samples_per_node = 5;   // positives/negatives drawn per node
  int dim = 16;
  double sigma = 1.0;         // wrapped-normal noise scale
  double lambda = 1.0;        // regularizer weight in the generator loss
  double lr_gen = 0.01;
  double lr_disc = 0.01;
  int walk_length = 1;        // random-walk length for positives
  std::uint64_t seed = 1;
  std::optional<double> kappa_override;  // skip curvature estimation when set

  int batch_nodes = 0;        // nodes per inner iteration; 0 = all nodes
  double rho = 2.0;           // Fermi-Dirac decoder offset
  double tau = 1.0;           // Fermi-Dirac decoder temperature
  double alpha = 0.5;         // Ollivier-Ricci mass parameter
  double init_scale = 0.1;    // embedding init scale (before projection)
  bool train_sigma = false;   // optimize sigma through the reparameterization

  // Node-classification mode: adds a per-epoch classifier step on the given
  // label split, with the link-prediction objective kept as a regularizer
  // scaled by nc_lp_weight.
  bool nc_joint = false;
  double nc_lp_weight = 1.0;
  double lr_classifier = 0.5;
  double nc_l2 = 1e-4;

  void validate() const;
};

struct LossRecord {
  int epoch = 0;
  char phase = 'D';  // 'D', 'G' or 'C' (joint classifier step)
  int iter = 0;
  double loss = 0.0;
};

struct TrainState {
  int epoch = 0;
  Curvature k;
  bool kappa_estimated = false;
  EmbeddingTable gen_emb;
  EmbeddingTable disc_emb;
  GeneratorParams gen;
  DiscriminatorParams disc;
  RicciMap ricci;
  Rng rng;
  std::vector<LossRecord> history;
  std::vector<double> epoch_seconds;
  // Joint classifier head; empty unless nc_joint was on.
  std::vector<double> clf_weights;
  std::vector<int> clf_class_ids;
};

// Endpoints of `count` independent uniform random walks of length
// `walk_length` started at u.
std::vector<int> random_walk_positives(const Graph& g, int u, int count,
                                       int walk_length, Rng& rng);

// Uniform draws from V excluding u and its neighbors; empty when no valid
// candidate exists.
std::vector<int> random_negatives(const Graph& g, int u, int count, Rng& rng);

// Alternating optimization: estimate curvature (unless overridden), compute
// the Ricci map, then run `epochs` rounds of disc_iters discriminator steps
// followed by gen_iters generator steps. Deterministic per config + seed.
// A non-finite loss aborts with a diagnostic checkpoint in `run_dir` (when
// given) and a TrainingError.
TrainState train(const Graph& g, const TrainingConfig& config,
                 const std::filesystem::path& run_dir = {},
                 std::span<const int> clf_train_nodes = {});

struct GradientCheckReport {
  double max_rel_error = 0.0;
  int coords_checked = 0;
  bool pass = false;
};

// Compares the tape gradient of `loss_fn` against central finite differences
// on `n_coords` randomly chosen coordinates. `loss_fn` receives one autodiff
// leaf per parameter and must build the loss from them alone.
GradientCheckReport gradient_check(
    const std::function<ad::Var(std::span<const ad::Var>)>& loss_fn,
    std::span<const double> params, int n_coords, double step, double tol,
    std::uint64_t seed);

}  // namespace curvgraph

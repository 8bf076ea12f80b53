#include "curvgraph/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <iostream>
#include <set>
#include <unordered_map>

#include "curvgraph/errors.hpp"
#include "curvgraph/io.hpp"

namespace curvgraph {

void TrainingConfig::validate() const {
  if (epochs < 0) throw TrainingError("config: epochs must be >= 0");
  if (disc_iters < 1 || gen_iters < 1) {
    throw TrainingError("config: inner iteration counts must be >= 1");
  }
  if (samples_per_node < 1) throw TrainingError("config: samples_per_node < 1");
  if (dim < 1) throw TrainingError("config: dim < 1");
  if (!(lr_gen > 0.0) || !(lr_disc > 0.0)) {
    throw TrainingError("config: learning rates must be positive");
  }
  if (walk_length < 1) throw TrainingError("config: walk_length < 1");
  if (sigma < 0.0) throw TrainingError("config: sigma < 0");
  if (lambda < 0.0) throw TrainingError("config: lambda < 0");
  if (!(tau > 0.0)) throw TrainingError("config: tau must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw TrainingError("config: alpha outside [0, 1]");
  }
  if (batch_nodes < 0) throw TrainingError("config: batch_nodes < 0");
  if (train_sigma && !(sigma > 0.0)) {
    throw TrainingError("config: train_sigma requires sigma > 0");
  }
}

std::vector<int> random_walk_positives(const Graph& g, int u, int count,
                                       int walk_length, Rng& rng) {
  if (g.degree(u) == 0) {
    throw GraphError("random_walk_positives: isolated start node");
  }
  std::vector<int> endpoints;
  endpoints.reserve(count);
  for (int s = 0; s < count; ++s) {
    int cur = u;
    for (int step = 0; step < walk_length; ++step) {
      const auto nb = g.neighbors(cur);
      cur = nb[rng.uniform_int(static_cast<int>(nb.size()))];
    }
    endpoints.push_back(cur);
  }
  return endpoints;
}

std::vector<int> random_negatives(const Graph& g, int u, int count, Rng& rng) {
  const int n = g.num_nodes();
  if (n - 1 - g.degree(u) <= 0) return {};
  std::vector<int> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    const int w = rng.uniform_int(n);
    if (w == u || g.has_edge(u, w)) continue;
    out.push_back(w);
  }
  return out;
}

namespace {

using ad::Var;

// Per-iteration scratch that owns every tape leaf and remembers where to
// write gradients back.
class LeafRows {
 public:
  LeafRows(ad::Tape& tape, EmbeddingTable& table)
      : tape_(&tape), table_(&table) {}

  std::span<const Var> row(int u) {
    auto [it, inserted] = rows_.try_emplace(u);
    if (inserted) {
      const auto src = table_->row(u);
      it->second.reserve(src.size());
      for (double v : src) it->second.push_back(tape_->leaf(v));
    }
    return it->second;
  }

  // SGD step on every touched row, followed by domain projection.
  void apply_update(std::span<const double> adjoint, double lr) {
    for (const auto& [u, vars] : rows_) {
      auto dst = table_->mutable_row(u);
      for (std::size_t i = 0; i < vars.size(); ++i) {
        dst[i] -= lr * adjoint[vars[i].index()];
      }
      table_->project_row(u);
    }
  }

 private:
  ad::Tape* tape_;
  EmbeddingTable* table_;
  std::unordered_map<int, std::vector<Var>> rows_;
};

std::vector<Var> make_leaves(ad::Tape& tape, std::span<const double> values) {
  std::vector<Var> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(tape.leaf(v));
  return out;
}

std::vector<Var> make_consts(std::span<const double> values) {
  return {values.begin(), values.end()};
}

void apply_vector_update(std::span<double> dst, std::span<const Var> leaves,
                         std::span<const double> adjoint, double lr) {
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] -= lr * adjoint[leaves[i].index()];
  }
}

struct NodeSamples {
  int u = 0;
  std::vector<int> pos;
  std::vector<int> neg;
  Vec fake;                    // discriminator step: fakes are constants
  std::vector<double> eps;     // generator step: fixed noise draw
};

class Trainer {
 public:
  Trainer(const Graph& g, const TrainingConfig& cfg, TrainState& state,
          std::span<const int> clf_train_nodes)
      : graph_(g), cfg_(cfg), state_(state), clf_train_(clf_train_nodes) {
    batch_order_.resize(g.num_nodes());
    for (int i = 0; i < g.num_nodes(); ++i) batch_order_[i] = i;
  }

  void run_epoch(int epoch) {
    for (int it = 0; it < cfg_.disc_iters; ++it) {
      const double loss = discriminator_step();
      record(epoch, 'D', it, loss);
    }
    for (int it = 0; it < cfg_.gen_iters; ++it) {
      const double loss = generator_step();
      record(epoch, 'G', it, loss);
    }
    if (cfg_.nc_joint && !clf_train_.empty()) {
      record(epoch, 'C', 0, classifier_step());
    }
    if (skipped_isolated_ > 0 && !warned_isolated_) {
      std::cerr << "train: skipped " << skipped_isolated_
                << " isolated-node samples\n";
      warned_isolated_ = true;
    }
  }

 private:
  std::vector<int> pick_batch() {
    const int n = graph_.num_nodes();
    if (cfg_.batch_nodes == 0 || cfg_.batch_nodes >= n) return batch_order_;
    // Partial Fisher-Yates over a persistent permutation.
    for (int i = 0; i < cfg_.batch_nodes; ++i) {
      const int j = i + state_.rng.uniform_int(n - i);
      std::swap(batch_order_[i], batch_order_[j]);
    }
    return {batch_order_.begin(), batch_order_.begin() + cfg_.batch_nodes};
  }

  std::vector<NodeSamples> draw_samples(bool for_generator) {
    std::vector<NodeSamples> batch;
    for (int u : pick_batch()) {
      if (graph_.degree(u) == 0) {
        ++skipped_isolated_;
        continue;
      }
      NodeSamples s;
      s.u = u;
      if (!for_generator) {
        s.pos = random_walk_positives(graph_, u, cfg_.samples_per_node,
                                      cfg_.walk_length, state_.rng);
        s.neg = random_negatives(graph_, u, cfg_.samples_per_node, state_.rng);
        s.fake = generate_fake(u, state_.gen, state_.gen_emb, state_.rng,
                               state_.k);
      } else {
        s.eps = draw_standard_normal(cfg_.dim, state_.rng);
      }
      batch.push_back(std::move(s));
    }
    return batch;
  }

  double discriminator_step() {
    const auto batch = draw_samples(false);
    if (batch.empty()) throw TrainingError("train: no usable nodes in batch");

    tape_.clear();
    auto scope = tape_.activate();
    LeafRows disc_rows(tape_, state_.disc_emb);
    std::deque<std::vector<Var>> fake_store;
    std::vector<PointPairView<Var>> pos, neg, fake;
    for (const auto& s : batch) {
      const auto u_row = disc_rows.row(s.u);
      for (int v : s.pos) pos.push_back({u_row, disc_rows.row(v)});
      for (int v : s.neg) neg.push_back({u_row, disc_rows.row(v)});
      fake_store.push_back(make_consts(s.fake));
      fake.push_back({u_row, fake_store.back()});
    }
    const Var loss =
        discriminator_loss<Var>(pos, neg, fake, state_.disc, state_.k);
    const double scale = cfg_.nc_joint ? cfg_.nc_lp_weight : 1.0;
    check_finite(loss.value(), "discriminator");
    const auto adjoint = tape_.gradient(loss);
    // Loss terms are means over the batch; scaling row updates by the batch
    // size restores per-node step semantics for the embedding table.
    disc_rows.apply_update(adjoint,
                           cfg_.lr_disc * scale *
                               static_cast<double>(batch.size()));
    return loss.value();
  }

  double generator_step() {
    const auto batch = draw_samples(true);
    if (batch.empty()) throw TrainingError("train: no usable nodes in batch");

    tape_.clear();
    auto scope = tape_.activate();
    LeafRows gen_rows(tape_, state_.gen_emb);
    GeneratorParams& gp = state_.gen;
    const auto w1 = make_leaves(tape_, gp.w1);
    const auto b1 = make_leaves(tape_, gp.b1);
    const auto w2 = make_leaves(tape_, gp.w2);
    const auto b2 = make_leaves(tape_, gp.b2);
    Var log_sigma;
    Var sigma_var(gp.sigma);
    if (cfg_.train_sigma) {
      log_sigma = tape_.leaf(std::log(gp.sigma));
      sigma_var = ad::exp(log_sigma);
    }

    std::deque<std::vector<Var>> store;
    std::vector<PointPairView<Var>> fake_pairs;
    std::vector<Var> reg_terms;
    auto row_fn = [&](int v) { return gen_rows.row(v); };
    for (const auto& s : batch) {
      const auto mu = gen_rows.row(s.u);
      store.push_back(wrapped_normal_push<Var>(mu, sigma_var, s.eps, state_.k));
      const auto& z_noise = store.back();
      store.push_back(mobius_mlp<Var>(mu, z_noise, w1, b1, w2, b2, cfg_.dim,
                                      gp.hidden, state_.k));
      const auto& fake_point = store.back();
      store.push_back(make_consts(state_.disc_emb.row(s.u)));
      fake_pairs.push_back({store.back(), fake_point});
      reg_terms.push_back(ricci_regularizer<Var>(s.u, fake_point, row_fn,
                                                 graph_, state_.k));
    }
    const Var loss = generator_loss<Var>(fake_pairs, reg_terms, gp.lambda,
                                         state_.disc, state_.k);
    check_finite(loss.value(), "generator");
    const double scale = cfg_.nc_joint ? cfg_.nc_lp_weight : 1.0;
    const auto adjoint = tape_.gradient(loss);
    const double lr = cfg_.lr_gen * scale;
    // Embedding rows see ~1/batch of the mean-loss terms, shared MLP weights
    // see all of them; scale only the rows back up.
    gen_rows.apply_update(adjoint, lr * static_cast<double>(batch.size()));
    apply_vector_update(gp.w1, w1, adjoint, lr);
    apply_vector_update(gp.b1, b1, adjoint, lr);
    apply_vector_update(gp.w2, w2, adjoint, lr);
    apply_vector_update(gp.b2, b2, adjoint, lr);
    if (cfg_.train_sigma) {
      const double new_log = std::log(gp.sigma) -
                             lr * adjoint[log_sigma.index()];
      gp.sigma = std::exp(new_log);
    }
    return loss.value();
  }

  // Joint node-classification step: softmax regression on tangent features of
  // the discriminator embeddings; gradients reach both the head weights and
  // the embedding rows.
  double classifier_step() {
    const auto labels = graph_.labels();
    if (labels.empty()) {
      throw TrainingError("train: nc_joint requires node labels");
    }
    if (state_.clf_class_ids.empty()) {
      std::set<int> classes;
      for (int u : clf_train_) {
        if (labels[u] >= 0) classes.insert(labels[u]);
      }
      if (classes.size() < 2) {
        throw TrainingError("train: classifier training set covers < 2 classes");
      }
      state_.clf_class_ids.assign(classes.begin(), classes.end());
      state_.clf_weights.assign(
          classes.size() * static_cast<std::size_t>(cfg_.dim + 1), 0.0);
    }
    const int c = static_cast<int>(state_.clf_class_ids.size());
    const int fdim = cfg_.dim + 1;

    tape_.clear();
    auto scope = tape_.activate();
    LeafRows disc_rows(tape_, state_.disc_emb);
    const auto w = make_leaves(tape_, state_.clf_weights);
    const Vec origin(cfg_.dim, 0.0);
    const std::vector<Var> origin_vars(origin.begin(), origin.end());

    Var total(0.0);
    for (int u : clf_train_) {
      const auto feats = geometry::log_map<Var>(
          origin_vars, disc_rows.row(u), state_.k);
      std::vector<Var> logits(c);
      double max_val = -1e300;
      for (int j = 0; j < c; ++j) {
        Var acc = w[j * fdim + cfg_.dim];  // bias
        for (int i = 0; i < cfg_.dim; ++i) {
          acc = acc + w[j * fdim + i] * feats[i];
        }
        logits[j] = acc;
        max_val = std::max(max_val, acc.value());
      }
      Var z(0.0);
      for (int j = 0; j < c; ++j) z = z + ad::exp(logits[j] - Var(max_val));
      const int target = static_cast<int>(
          std::lower_bound(state_.clf_class_ids.begin(),
                           state_.clf_class_ids.end(), labels[u]) -
          state_.clf_class_ids.begin());
      total = total + (ad::log(z) + Var(max_val) - logits[target]);
    }
    Var loss = total / Var(static_cast<double>(clf_train_.size()));
    if (cfg_.nc_l2 > 0.0) {
      Var penalty(0.0);
      for (int j = 0; j < c; ++j) {
        for (int i = 0; i < cfg_.dim; ++i) {
          penalty = penalty + w[j * fdim + i] * w[j * fdim + i];
        }
      }
      loss = loss + Var(0.5 * cfg_.nc_l2) * penalty;
    }
    check_finite(loss.value(), "classifier");
    const auto adjoint = tape_.gradient(loss);
    disc_rows.apply_update(adjoint,
                           cfg_.lr_classifier *
                               static_cast<double>(clf_train_.size()));
    apply_vector_update(state_.clf_weights, w, adjoint, cfg_.lr_classifier);
    return loss.value();
  }

  void check_finite(double loss, const char* phase) {
    if (std::isfinite(loss)) return;
    throw TrainingError(std::string("train: non-finite ") + phase + " loss");
  }

  void record(int epoch, char phase, int iter, double loss) {
    state_.history.push_back(LossRecord{epoch, phase, iter, loss});
  }

 private:
  const Graph& graph_;
  const TrainingConfig& cfg_;
  TrainState& state_;
  std::span<const int> clf_train_;
  ad::Tape tape_;
  std::vector<int> batch_order_;
  std::int64_t skipped_isolated_ = 0;
  bool warned_isolated_ = false;
};

}  // namespace

TrainState train(const Graph& g, const TrainingConfig& config,
                 const std::filesystem::path& run_dir,
                 std::span<const int> clf_train_nodes) {
  config.validate();
  if (g.num_edges() == 0) throw GraphError("train: graph has no edges");

  TrainState state;
  HopMetric metric(g);
  if (config.kappa_override.has_value()) {
    state.k = Curvature{*config.kappa_override};
    state.kappa_estimated = false;
  } else {
    const auto est = estimate_global_curvature(
        g, config.samples_per_node, mix_seed(config.seed, 1), metric);
    state.k = Curvature{est.kappa};
    state.kappa_estimated = true;
  }
  state.ricci = compute_ricci_map(g, config.alpha, metric);

  Rng init_rng(mix_seed(config.seed, 2));
  state.gen_emb = EmbeddingTable(EmbeddingTable::Role::kGenerator,
                                 g.num_nodes(), config.dim, state.k);
  state.disc_emb = EmbeddingTable(EmbeddingTable::Role::kDiscriminator,
                                  g.num_nodes(), config.dim, state.k);
  state.gen_emb.init_random(config.init_scale, init_rng);
  state.disc_emb.init_random(config.init_scale, init_rng);
  state.gen = GeneratorParams(config.dim, 2 * config.dim, config.sigma,
                              config.lambda);
  state.gen.init_random(init_rng);
  state.disc = DiscriminatorParams{config.rho, config.tau};
  state.rng = Rng(mix_seed(config.seed, 3));

  Trainer trainer(g, config, state, clf_train_nodes);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    try {
      trainer.run_epoch(epoch);
    } catch (const TrainingError&) {
      if (!run_dir.empty()) {
        std::filesystem::create_directories(run_dir);
        save_checkpoint(state, run_dir / "diverged-checkpoint.bin");
      }
      throw;
    }
    state.epoch = epoch + 1;
    state.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count());
  }
  return state;
}

GradientCheckReport gradient_check(
    const std::function<ad::Var(std::span<const ad::Var>)>& loss_fn,
    std::span<const double> params, int n_coords, double step, double tol,
    std::uint64_t seed) {
  const int n = static_cast<int>(params.size());
  std::vector<double> analytic(n);
  {
    ad::Tape tape;
    auto scope = tape.activate();
    std::vector<ad::Var> leaves;
    leaves.reserve(n);
    for (double p : params) leaves.push_back(tape.leaf(p));
    const ad::Var loss = loss_fn(leaves);
    if (!std::isfinite(loss.value())) {
      throw TrainingError("gradient_check: loss not finite at params");
    }
    const auto adjoint = tape.gradient(loss);
    for (int i = 0; i < n; ++i) analytic[i] = adjoint[leaves[i].index()];
  }

  auto eval_at = [&](std::span<const double> p) {
    ad::Tape tape;
    auto scope = tape.activate();
    std::vector<ad::Var> leaves;
    leaves.reserve(p.size());
    for (double v : p) leaves.push_back(tape.leaf(v));
    return loss_fn(leaves).value();
  };

  std::vector<int> coords(n);
  for (int i = 0; i < n; ++i) coords[i] = i;
  Rng rng(seed);
  for (int i = n; i > 1; --i) {
    std::swap(coords[i - 1], coords[rng.uniform_int(i)]);
  }
  const int checked = std::min(n_coords, n);

  GradientCheckReport report;
  report.coords_checked = checked;
  std::vector<double> shifted(params.begin(), params.end());
  for (int t = 0; t < checked; ++t) {
    const int i = coords[t];
    const double saved = shifted[i];
    shifted[i] = saved + step;
    const double f_plus = eval_at(shifted);
    shifted[i] = saved - step;
    const double f_minus = eval_at(shifted);
    shifted[i] = saved;
    const double fd = (f_plus - f_minus) / (2.0 * step);
    const double denom =
        std::max({std::abs(fd), std::abs(analytic[i]), 1e-8});
    report.max_rel_error =
        std::max(report.max_rel_error, std::abs(fd - analytic[i]) / denom);
  }
  report.pass = report.max_rel_error <= tol;
  return report;
}

}  // namespace curvgraph

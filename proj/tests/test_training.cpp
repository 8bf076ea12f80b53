#include <doctest.h>

#include <cmath>
#include <deque>
#include <map>
#include <vector>

#include "curvgraph/metrics.hpp"
#include "curvgraph/training.hpp"

using namespace curvgraph;
namespace geo = curvgraph::geometry;

namespace {

Graph p3() {
  Graph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  return g;
}

Graph star(int leaves) {
  Graph g(leaves + 1);
  for (int i = 1; i <= leaves; ++i) g.add_edge(0, i);
  return g;
}

// Two disjoint cliques of size `m` joined by a single edge (0 -- m).
Graph two_cliques(int m) {
  Graph g(2 * m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      g.add_edge(i, j);
      g.add_edge(m + i, m + j);
    }
  }
  g.add_edge(0, m);
  return g;
}

}  // namespace

TEST_CASE("random walk positives") {
  const Graph g = p3();
  Rng rng(1);
  SUBCASE("length-one walks land on neighbors") {
    const auto pos = random_walk_positives(g, 1, 5, 1, rng);
    CHECK(pos.size() == 5);
    for (int v : pos) CHECK((v == 0 || v == 2));
  }
  SUBCASE("empirical law is the uniform neighbor distribution") {
    const int n = 10000;
    int zeros = 0;
    const auto pos = random_walk_positives(g, 1, n, 1, rng);
    for (int v : pos) zeros += v == 0 ? 1 : 0;
    // 3 sigma of Binomial(n, 1/2).
    CHECK(std::abs(zeros - n / 2) < 3.0 * std::sqrt(n * 0.25));
  }
  SUBCASE("longer walks stay within the graph") {
    const auto pos = random_walk_positives(g, 0, 20, 3, rng);
    for (int v : pos) CHECK((v >= 0 && v < 3));
  }
  SUBCASE("isolated start node throws") {
    Graph lone(2);
    CHECK_THROWS_AS((void)random_walk_positives(lone, 0, 1, 1, rng),
                    GraphError);
  }
}

TEST_CASE("random negatives") {
  Rng rng(2);
  SUBCASE("star center has no candidates") {
    const Graph g = star(6);
    CHECK(random_negatives(g, 0, 4, rng).empty());
  }
  SUBCASE("path leaf excludes itself and its neighbor") {
    const Graph g = p3();
    const auto neg = random_negatives(g, 0, 50, rng);
    CHECK(neg.size() == 50);
    for (int v : neg) CHECK(v == 2);
  }
  SUBCASE("uniform over the valid candidates") {
    Graph g(12);
    for (int i = 1; i < 4; ++i) g.add_edge(0, i);  // candidates: 4..11
    const int n = 10000;
    std::map<int, int> counts;
    const auto neg = random_negatives(g, 0, n, rng);
    for (int v : neg) ++counts[v];
    CHECK(counts.size() == 8);
    const double expected = n / 8.0;
    double chi2 = 0.0;
    for (const auto& [v, c] : counts) {
      CHECK(v >= 4);
      chi2 += (c - expected) * (c - expected) / expected;
    }
    CHECK(chi2 < 18.475);  // chi-squared df=7 at p = 0.99
  }
}

namespace {

TrainingConfig small_config() {
  TrainingConfig cfg;
  cfg.epochs = 2;
  cfg.disc_iters = 3;
  cfg.gen_iters = 3;
  cfg.samples_per_node = 2;
  cfg.dim = 4;
  cfg.sigma = 0.4;
  cfg.lambda = 1.0;
  cfg.lr_gen = 0.02;
  cfg.lr_disc = 0.02;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("train bookkeeping") {
  const Graph g = two_cliques(6);
  SUBCASE("zero epochs returns the initialized state untouched") {
    TrainingConfig cfg = small_config();
    cfg.epochs = 0;
    const TrainState state = train(g, cfg);
    CHECK(state.epoch == 0);
    CHECK(state.history.empty());
    CHECK(state.gen_emb.num_nodes() == g.num_nodes());
    CHECK(state.ricci.values.size() == static_cast<std::size_t>(g.num_edges()));
  }
  SUBCASE("loss history length is epochs * (disc .. gen iters)") {
    const TrainingConfig cfg = small_config();
    const TrainState state = train(g, cfg);
    CHECK(state.history.size() ==
          static_cast<std::size_t>(cfg.epochs *
                                   (cfg.disc_iters + cfg.gen_iters)));
    int idx = 0;
    for (int e = 0; e < cfg.epochs; ++e) {
      for (int i = 0; i < cfg.disc_iters; ++i, ++idx) {
        CHECK(state.history[idx].phase == 'D');
        CHECK(state.history[idx].epoch == e);
        CHECK(state.history[idx].iter == i);
      }
      for (int i = 0; i < cfg.gen_iters; ++i, ++idx) {
        CHECK(state.history[idx].phase == 'G');
      }
    }
  }
  SUBCASE("kappa override skips estimation") {
    TrainingConfig cfg = small_config();
    cfg.epochs = 0;
    cfg.kappa_override = -1.5;
    const TrainState state = train(g, cfg);
    CHECK(state.k.kappa == -1.5);
    CHECK_FALSE(state.kappa_estimated);
  }
  SUBCASE("batch_nodes limits the nodes per iteration deterministically") {
    TrainingConfig cfg = small_config();
    cfg.batch_nodes = 4;
    const TrainState a = train(g, cfg);
    const TrainState b = train(g, cfg);
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      CHECK(a.history[i].loss == b.history[i].loss);
    }
  }
}

TEST_CASE("training is bit-reproducible under config + seed") {
  const Graph g = two_cliques(5);
  const TrainingConfig cfg = small_config();
  const TrainState a = train(g, cfg);
  const TrainState b = train(g, cfg);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].loss == b.history[i].loss);
  }
  CHECK(a.gen_emb.data == b.gen_emb.data);
  CHECK(a.disc_emb.data == b.disc_emb.data);
  CHECK(a.gen.w1 == b.gen.w1);
  CHECK(a.rng == b.rng);
}

TEST_CASE("two-clique separability and learning signal") {
  const Graph g = two_cliques(10);
  TrainingConfig cfg;
  cfg.epochs = 200;
  cfg.disc_iters = 10;
  cfg.gen_iters = 10;
  cfg.samples_per_node = 3;
  cfg.dim = 8;
  cfg.sigma = 0.3;
  cfg.lambda = 1.0;
  cfg.lr_gen = 0.05;
  cfg.lr_disc = 0.05;
  cfg.seed = 5;
  const TrainState state = train(g, cfg);

  SUBCASE("discriminator prefers intra-clique pairs") {
    double intra = 0.0, cross = 0.0;
    int n_intra = 0, n_cross = 0;
    for (int u = 0; u < g.num_nodes(); ++u) {
      for (int v = u + 1; v < g.num_nodes(); ++v) {
        const double s = fermi_dirac_score<double>(
            state.disc_emb.row(u), state.disc_emb.row(v), state.disc, state.k);
        if ((u < 10) == (v < 10)) {
          intra += s;
          ++n_intra;
        } else {
          cross += s;
          ++n_cross;
        }
      }
    }
    CHECK(intra / n_intra > cross / n_cross);
  }

  SUBCASE("final discriminator loss is below the initial one") {
    double first = 0.0, last = 0.0;
    int n_first = 0, n_last = 0;
    for (const auto& rec : state.history) {
      if (rec.phase != 'D') continue;
      if (rec.epoch == 0) {
        first += rec.loss;
        ++n_first;
      }
      if (rec.epoch == cfg.epochs - 1) {
        last += rec.loss;
        ++n_last;
      }
    }
    CHECK(last / n_last < first / n_first);
  }

  SUBCASE("all embeddings stay in the domain") {
    for (int u = 0; u < g.num_nodes(); ++u) {
      CHECK(geo::in_domain(state.gen_emb.row(u), state.k));
      CHECK(geo::in_domain(state.disc_emb.row(u), state.k));
    }
  }
}

TEST_CASE("gradient check on a quadratic is exact to rounding") {
  const std::vector<double> params = {0.3, -1.2, 0.8, 2.0};
  const auto report = gradient_check(
      [](std::span<const ad::Var> x) {
        ad::Var acc(0.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
          acc = acc + ad::Var(static_cast<double>(i + 1)) * x[i] * x[i];
        }
        return acc;
      },
      params, 4, 1e-5, 1e-8, 1);
  CHECK(report.pass);
  CHECK(report.max_rel_error < 1e-8);
}

namespace {

// Fixed sample plan for the full-loss gradient checks.
struct SamplePlan {
  std::vector<int> nodes;
  std::vector<std::vector<int>> pos, neg;
  std::vector<Vec> fakes;                 // for the discriminator loss
  std::vector<std::vector<double>> eps;   // for the generator loss
};

SamplePlan make_plan(const Graph& g, const TrainState& state, int n_s,
                     std::uint64_t seed) {
  SamplePlan plan;
  Rng rng(seed);
  for (int u = 0; u < g.num_nodes(); ++u) {
    if (g.degree(u) == 0) continue;
    plan.nodes.push_back(u);
    plan.pos.push_back(random_walk_positives(g, u, n_s, 1, rng));
    plan.neg.push_back(random_negatives(g, u, n_s, rng));
    Rng fake_rng(mix_seed(seed, 7000 + u));
    plan.fakes.push_back(
        generate_fake(u, state.gen, state.gen_emb, fake_rng, state.k));
    plan.eps.push_back(draw_standard_normal(state.gen.dim, rng));
  }
  return plan;
}

}  // namespace

TEST_CASE("full discriminator loss gradient matches finite differences") {
  const Graph g = two_cliques(4);
  TrainingConfig cfg = small_config();
  cfg.epochs = 1;
  const TrainState state = train(g, cfg);
  const SamplePlan plan = make_plan(g, state, 2, 99);
  const int dim = state.disc_emb.dim;

  auto loss_fn = [&](std::span<const ad::Var> leaves) {
    auto row = [&](int u) {
      return leaves.subspan(static_cast<std::size_t>(u) * dim, dim);
    };
    std::vector<PointPairView<ad::Var>> pos, neg, fake;
    std::deque<std::vector<ad::Var>> store;
    for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
      const int u = plan.nodes[i];
      for (int v : plan.pos[i]) pos.push_back({row(u), row(v)});
      for (int v : plan.neg[i]) neg.push_back({row(u), row(v)});
      store.emplace_back(plan.fakes[i].begin(), plan.fakes[i].end());
      fake.push_back({row(u), store.back()});
    }
    return discriminator_loss<ad::Var>(pos, neg, fake, state.disc, state.k);
  };

  const auto report =
      gradient_check(loss_fn, state.disc_emb.data, 100, 1e-5, 1e-4, 3);
  INFO("max rel error ", report.max_rel_error);
  CHECK(report.pass);
}

TEST_CASE("full generator loss gradient matches finite differences") {
  const Graph g = two_cliques(4);
  TrainingConfig cfg = small_config();
  cfg.epochs = 1;
  const TrainState state = train(g, cfg);
  const SamplePlan plan = make_plan(g, state, 2, 17);
  const int dim = state.gen.dim;
  const int hidden = state.gen.hidden;

  // Parameter vector: gen embeddings, then w1, b1, w2, b2, then sigma.
  std::vector<double> params(state.gen_emb.data);
  params.insert(params.end(), state.gen.w1.begin(), state.gen.w1.end());
  params.insert(params.end(), state.gen.b1.begin(), state.gen.b1.end());
  params.insert(params.end(), state.gen.w2.begin(), state.gen.w2.end());
  params.insert(params.end(), state.gen.b2.begin(), state.gen.b2.end());
  params.push_back(state.gen.sigma);

  const std::size_t emb_n = state.gen_emb.data.size();
  const std::size_t w1_n = state.gen.w1.size();
  const std::size_t b1_n = state.gen.b1.size();
  const std::size_t w2_n = state.gen.w2.size();
  const std::size_t b2_n = state.gen.b2.size();

  auto loss_fn = [&](std::span<const ad::Var> leaves) {
    std::size_t off = 0;
    auto emb = leaves.subspan(off, emb_n);
    off += emb_n;
    auto w1 = leaves.subspan(off, w1_n);
    off += w1_n;
    auto b1 = leaves.subspan(off, b1_n);
    off += b1_n;
    auto w2 = leaves.subspan(off, w2_n);
    off += w2_n;
    auto b2 = leaves.subspan(off, b2_n);
    off += b2_n;
    const ad::Var sigma = leaves[off];

    auto row = [&](int u) {
      return emb.subspan(static_cast<std::size_t>(u) * dim, dim);
    };
    std::deque<std::vector<ad::Var>> store;
    std::vector<PointPairView<ad::Var>> fake_pairs;
    std::vector<ad::Var> regs;
    for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
      const int u = plan.nodes[i];
      store.push_back(
          wrapped_normal_push<ad::Var>(row(u), sigma, plan.eps[i], state.k));
      const auto& z_noise = store.back();
      store.push_back(mobius_mlp<ad::Var>(row(u), z_noise, w1, b1, w2, b2,
                                          dim, hidden, state.k));
      const auto& fake_point = store.back();
      store.emplace_back(state.disc_emb.row(u).begin(),
                         state.disc_emb.row(u).end());
      fake_pairs.push_back({store.back(), fake_point});
      regs.push_back(
          ricci_regularizer<ad::Var>(u, fake_point, row, g, state.k));
    }
    return generator_loss<ad::Var>(fake_pairs, regs, state.gen.lambda,
                                   state.disc, state.k);
  };

  const auto report = gradient_check(loss_fn, params, 120, 1e-5, 1e-4, 5);
  INFO("max rel error ", report.max_rel_error);
  CHECK(report.pass);
}

TEST_CASE("nc_joint training records classifier steps and fits a head") {
  Graph g = two_cliques(8);
  std::vector<int> labels(g.num_nodes());
  for (int u = 0; u < g.num_nodes(); ++u) labels[u] = u < 8 ? 0 : 1;
  g.set_labels(labels);

  TrainingConfig cfg = small_config();
  cfg.epochs = 4;
  cfg.nc_joint = true;
  std::vector<int> train_nodes;
  for (int u = 0; u < g.num_nodes(); u += 2) train_nodes.push_back(u);

  const TrainState state = train(g, cfg, {}, train_nodes);
  int c_steps = 0;
  for (const auto& rec : state.history) c_steps += rec.phase == 'C' ? 1 : 0;
  CHECK(c_steps == cfg.epochs);
  CHECK(state.clf_class_ids.size() == 2);
  CHECK(state.clf_weights.size() == 2 * static_cast<std::size_t>(cfg.dim + 1));
}

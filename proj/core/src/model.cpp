#include "curvgraph/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "curvgraph/errors.hpp"

namespace curvgraph {

EmbeddingTable::EmbeddingTable(Role role, int num_nodes, int dim, Curvature k)
    : role(role),
      dim(dim),
      k(k),
      data(static_cast<std::size_t>(num_nodes) * dim, 0.0) {}

void EmbeddingTable::init_random(double scale, Rng& rng) {
  for (double& v : data) v = scale * rng.normal();
  project_all();
}

void EmbeddingTable::project_row(int u) {
  auto r = mutable_row(u);
  const Vec projected = geometry::project_to_domain<double>(
      std::span<const double>(r.data(), r.size()), k);
  std::copy(projected.begin(), projected.end(), r.begin());
}

void EmbeddingTable::project_all() {
  for (int u = 0; u < num_nodes(); ++u) project_row(u);
}

GeneratorParams::GeneratorParams(int dim, int hidden, double sigma,
                                 double lambda)
    : dim(dim),
      hidden(hidden),
      w1(static_cast<std::size_t>(hidden) * dim, 0.0),
      b1(hidden, 0.0),
      w2(static_cast<std::size_t>(dim) * hidden, 0.0),
      b2(dim, 0.0),
      sigma(sigma),
      lambda(lambda) {}

void GeneratorParams::init_random(Rng& rng) {
  const double s1 = std::sqrt(2.0 / (dim + hidden));
  for (double& w : w1) w = s1 * rng.normal();
  for (double& w : w2) w = s1 * rng.normal();
  std::fill(b1.begin(), b1.end(), 0.0);
  std::fill(b2.begin(), b2.end(), 0.0);
}

Vec mobius_mlp(std::span<const double> u, std::span<const double> z_noise,
               const GeneratorParams& gen, Curvature k) {
  return mobius_mlp<double>(u, z_noise, gen.w1, gen.b1, gen.w2, gen.b2,
                            gen.dim, gen.hidden, k);
}

Vec generate_fake(int u, const GeneratorParams& gen, const EmbeddingTable& emb,
                  Rng& rng, Curvature k) {
  const auto eps = draw_standard_normal(gen.dim, rng);
  const Vec noisy =
      wrapped_normal_push<double>(emb.row(u), gen.sigma, eps, k);
  return mobius_mlp(emb.row(u), noisy, gen, k);
}

Classification classify_nodes(const EmbeddingTable& emb,
                              std::span<const int> labels,
                              std::span<const int> train_nodes,
                              const LogisticRegConfig& cfg, Curvature k) {
  const int n = emb.num_nodes();
  const int d = emb.dim;

  std::set<int> class_set;
  for (int u : train_nodes) {
    if (labels[u] >= 0) class_set.insert(labels[u]);
  }
  if (class_set.size() < 2) {
    throw TrainingError("classify_nodes: training set covers < 2 classes");
  }
  std::vector<int> class_ids(class_set.begin(), class_set.end());
  const int c = static_cast<int>(class_ids.size());
  auto column_of = [&](int label) {
    return static_cast<int>(std::lower_bound(class_ids.begin(),
                                             class_ids.end(), label) -
                            class_ids.begin());
  };

  // Tangent features at the origin, plus a bias column.
  const Vec origin(d, 0.0);
  const int fdim = d + 1;
  std::vector<double> features(static_cast<std::size_t>(n) * fdim);
  for (int u = 0; u < n; ++u) {
    const Vec f = geometry::log_map<double>(origin, emb.row(u), k);
    for (int i = 0; i < d; ++i) features[u * fdim + i] = f[i];
    features[u * fdim + d] = 1.0;
  }

  // Full-batch softmax regression with momentum; W starts at zero so the fit
  // is deterministic.
  std::vector<double> w(static_cast<std::size_t>(c) * fdim, 0.0);
  std::vector<double> velocity(w.size(), 0.0);
  std::vector<double> grad(w.size());
  std::vector<double> logits(c), probs(c);
  const double inv_m = 1.0 / static_cast<double>(train_nodes.size());

  for (int it = 0; it < cfg.iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (int u : train_nodes) {
      const double* x = &features[static_cast<std::size_t>(u) * fdim];
      double max_logit = -1e300;
      for (int j = 0; j < c; ++j) {
        double acc = 0.0;
        for (int i = 0; i < fdim; ++i) acc += w[j * fdim + i] * x[i];
        logits[j] = acc;
        max_logit = std::max(max_logit, acc);
      }
      double z = 0.0;
      for (int j = 0; j < c; ++j) {
        probs[j] = std::exp(logits[j] - max_logit);
        z += probs[j];
      }
      const int target = column_of(labels[u]);
      for (int j = 0; j < c; ++j) {
        const double delta = probs[j] / z - (j == target ? 1.0 : 0.0);
        for (int i = 0; i < fdim; ++i) grad[j * fdim + i] += delta * x[i];
      }
    }
    for (int j = 0; j < c; ++j) {
      for (int i = 0; i < fdim; ++i) {
        double g = grad[j * fdim + i] * inv_m;
        if (i < d) g += cfg.l2 * w[j * fdim + i];
        velocity[j * fdim + i] =
            cfg.momentum * velocity[j * fdim + i] - cfg.learning_rate * g;
        w[j * fdim + i] += velocity[j * fdim + i];
      }
    }
  }

  Classification result;
  result.class_ids = class_ids;
  result.predicted.resize(n);
  result.scores.resize(static_cast<std::size_t>(n) * c);
  for (int u = 0; u < n; ++u) {
    const double* x = &features[static_cast<std::size_t>(u) * fdim];
    double max_logit = -1e300;
    for (int j = 0; j < c; ++j) {
      double acc = 0.0;
      for (int i = 0; i < fdim; ++i) acc += w[j * fdim + i] * x[i];
      logits[j] = acc;
      max_logit = std::max(max_logit, acc);
    }
    double z = 0.0;
    for (int j = 0; j < c; ++j) {
      probs[j] = std::exp(logits[j] - max_logit);
      z += probs[j];
    }
    int best = 0;
    for (int j = 0; j < c; ++j) {
      result.scores[static_cast<std::size_t>(u) * c + j] = probs[j] / z;
      if (probs[j] > probs[best]) best = j;
    }
    result.predicted[u] = class_ids[best];
  }
  return result;
}

}  // namespace curvgraph

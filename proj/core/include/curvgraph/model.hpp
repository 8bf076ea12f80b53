#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "curvgraph/errors.hpp"
#include "curvgraph/geometry.hpp"
#include "curvgraph/graph.hpp"
#include "curvgraph/rng.hpp"
#include "curvgraph/wrapped_normal.hpp"

namespace curvgraph {

// One manifold point per node. Rows are stored unconstrained and projected
// back into the domain after every optimizer update.
struct EmbeddingTable {
  enum class Role { kGenerator, kDiscriminator };

  EmbeddingTable() = default;
  EmbeddingTable(Role role, int num_nodes, int dim, Curvature k);

  int num_nodes() const { return dim == 0 ? 0 : static_cast<int>(data.size()) / dim; }
  std::span<const double> row(int u) const {
    return {data.data() + static_cast<std::size_t>(u) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<double> mutable_row(int u) {
    return {data.data() + static_cast<std::size_t>(u) * dim,
            static_cast<std::size_t>(dim)};
  }
  void init_random(double scale, Rng& rng);
  void project_row(int u);
  void project_all();

  Role role = Role::kGenerator;
  int dim = 0;
  Curvature k;
  std::vector<double> data;
};

// Euclidean core of the generator: two affine layers with a tanh in between,
// applied in the tangent space at the anchor node. Weights are row-major
// [out][in].
struct GeneratorParams {
  int dim = 0;
  int hidden = 0;
  std::vector<double> w1, b1, w2, b2;
  double sigma = 1.0;   // wrapped-normal noise scale
  double lambda = 1.0;  // weight of the local-structure regularizer

  GeneratorParams() = default;
  GeneratorParams(int dim, int hidden, double sigma, double lambda);
  void init_random(Rng& rng);
  std::size_t num_weights() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
  }
};

struct DiscriminatorParams {
  double rho = 2.0;
  double tau = 1.0;
};

// Applies the tangent-space MLP anchored at u: exp_u(f(log_u(z_noise))).
// The weight spans follow GeneratorParams layout; passing them as the scalar
// type keeps the whole path differentiable when S is the autodiff variable.
template <class S>
std::vector<S> mobius_mlp(std::span<const S> u, std::span<const S> z_noise,
                          std::span<const S> w1, std::span<const S> b1,
                          std::span<const S> w2, std::span<const S> b2,
                          int dim, int hidden, Curvature k) {
  const std::vector<S> t = geometry::log_map<S>(u, z_noise, k);
  std::vector<S> h(hidden);
  using std::tanh;
  for (int o = 0; o < hidden; ++o) {
    S acc = b1[o];
    for (int i = 0; i < dim; ++i) acc = acc + w1[o * dim + i] * t[i];
    h[o] = tanh(acc);
  }
  std::vector<S> out(dim);
  for (int o = 0; o < dim; ++o) {
    S acc = b2[o];
    for (int i = 0; i < hidden; ++i) acc = acc + w2[o * hidden + i] * h[i];
    out[o] = acc;
  }
  return geometry::project_to_domain<S>(geometry::exp_map<S>(u, out, k), k);
}

Vec mobius_mlp(std::span<const double> u, std::span<const double> z_noise,
               const GeneratorParams& gen, Curvature k);

// Wrapped-normal perturbation of emb[u] pushed through the Mobius MLP.
Vec generate_fake(int u, const GeneratorParams& gen, const EmbeddingTable& emb,
                  Rng& rng, Curvature k);

// Fermi-Dirac link decoder: 1 / (exp((d^2 - rho)/tau) + 1), computed through
// a saturating logistic so extreme distances cannot overflow.
template <class S>
S fermi_dirac_score(std::span<const S> a, std::span<const S> b,
                    const DiscriminatorParams& dp, Curvature k) {
  const S d = geometry::distance<S>(a, b, k);
  const S arg = (d * d - S(dp.rho)) / S(dp.tau);
  using std::exp;
  if (geometry::scalar_value(arg) > 0.0) {
    const S e = exp(-arg);
    return e / (S(1.0) + e);
  }
  return S(1.0) / (S(1.0) + exp(arg));
}

template <class S>
struct PointPairView {
  std::span<const S> a;
  std::span<const S> b;
};

inline constexpr double kProbClamp = 1e-7;

template <class S>
S clamp_prob(const S& p) {
  if constexpr (std::is_same_v<S, ad::Var>) {
    return ad::clamp(p, kProbClamp, 1.0 - kProbClamp);
  } else {
    return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  }
}

// Discriminator objective: mean(-log D) over positive pairs plus
// mean(-log(1 - D)) over sampled negatives and over generated fakes.
template <class S>
S discriminator_loss(std::span<const PointPairView<S>> pos,
                     std::span<const PointPairView<S>> neg,
                     std::span<const PointPairView<S>> fake,
                     const DiscriminatorParams& dp, Curvature k) {
  if (pos.empty() && neg.empty()) {
    throw TrainingError("discriminator_loss: no positive or negative pairs");
  }
  using std::log;
  auto mean_term = [&](std::span<const PointPairView<S>> pairs,
                       bool positive) -> S {
    if (pairs.empty()) return S(0.0);
    S acc(0.0);
    for (const auto& pr : pairs) {
      const S p = clamp_prob(fermi_dirac_score<S>(pr.a, pr.b, dp, k));
      acc = acc + (positive ? -log(p) : -log(S(1.0) - p));
    }
    return acc / S(static_cast<double>(pairs.size()));
  };
  return mean_term(pos, true) + mean_term(neg, false) + mean_term(fake, false);
}

// Generator objective: mean log(1 - D(u, u_fake)) plus lambda * |sum of the
// per-node regularizer terms| (the 2-norm of a scalar sum).
template <class S>
S generator_loss(std::span<const PointPairView<S>> fake,
                 std::span<const S> reg_terms, double lambda,
                 const DiscriminatorParams& dp, Curvature k) {
  if (fake.empty()) throw TrainingError("generator_loss: no fake pairs");
  using std::abs;
  using std::log;
  S adversarial(0.0);
  for (const auto& pr : fake) {
    const S p = clamp_prob(fermi_dirac_score<S>(pr.a, pr.b, dp, k));
    adversarial = adversarial + log(S(1.0) - p);
  }
  adversarial = adversarial / S(static_cast<double>(fake.size()));
  if (lambda == 0.0 || reg_terms.empty()) return adversarial;
  S reg_sum(0.0);
  for (const S& r : reg_terms) reg_sum = reg_sum + r;
  return adversarial + S(lambda) * abs(reg_sum);
}

// -- node classification ------------------------------------------------------

struct LogisticRegConfig {
  int iterations = 400;
  double learning_rate = 0.5;
  double momentum = 0.9;
  double l2 = 1e-4;  // bias column is not penalized
};

struct Classification {
  std::vector<int> predicted;   // one entry per node
  std::vector<double> scores;   // num_nodes x num_classes, row-major
  std::vector<int> class_ids;   // column -> original label value
};

// Maps every embedding to the tangent space at the origin, fits multinomial
// logistic regression on the train nodes by gradient descent, and scores all
// nodes. Throws when the training set covers fewer than two classes.
Classification classify_nodes(const EmbeddingTable& emb,
                              std::span<const int> labels,
                              std::span<const int> train_nodes,
                              const LogisticRegConfig& cfg, Curvature k);

}  // namespace curvgraph

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "curvgraph/geometry.hpp"
#include "curvgraph/graph.hpp"

namespace curvgraph {

// Unit-weight shortest-path (hop) distances with one lazily built BFS row per
// source node. Rows are memoized; prefetch with precompute_all() before
// fanning out to parallel readers.
class HopMetric {
 public:
  static constexpr std::uint16_t kUnreachable = 0xffff;

  explicit HopMetric(const Graph& g);

  // Hop count, or -1 when v is unreachable from u.
  int distance(int u, int v) const;
  std::span<const std::uint16_t> row(int u) const;
  void precompute_all();

 private:
  void build_row(int u) const;

  const Graph* graph_;
  mutable std::vector<std::vector<std::uint16_t>> rows_;
};

// Triangle defect xi(m; a,b;c) with m in the midpoint role:
//   [d(a,m)^2 + d(b,c)^2/4 - (d(a,b)^2 + d(a,c)^2)/2] / (2 d(a,m)).
// Zero in flat metrics (the Euclidean median identity), positive where
// geodesic triangles are fatter, negative where they are thinner.
// Throws DomainError when d(a,m) = 0 or any pair is unreachable; callers
// discard such samples.
double xi_triangle(int m, int a, int b, int c, const HopMetric& metric);

struct CurvatureEstimate {
  double kappa = 0.0;
  int samples_per_node = 0;
  std::uint64_t seed = 0;
};

// Per-node sampling estimate of the global sectional curvature: for every
// node m with degree >= 2, draw `samples_per_node` triples (b, c distinct
// neighbors of m, a uniform over the remaining nodes) and average the
// triangle defects, then average over nodes. Deterministic per seed; each
// node consumes its own derived stream, so the estimate does not depend on
// the node visiting order.
CurvatureEstimate estimate_global_curvature(const Graph& g,
                                            int samples_per_node,
                                            std::uint64_t seed);

// Variant reusing an existing hop-distance cache.
CurvatureEstimate estimate_global_curvature(const Graph& g,
                                            int samples_per_node,
                                            std::uint64_t seed,
                                            const HopMetric& metric);

// Same estimator over an arbitrary metric (used for post-training analysis
// with embedding distances). `metric(u, v)` must return a finite nonnegative
// distance or a negative value for "unreachable".
CurvatureEstimate estimate_global_curvature(
    const Graph& g, int samples_per_node, std::uint64_t seed,
    const std::function<double(int, int)>& metric);

// Probability mass alpha on the center node and (1 - alpha)/deg on each
// neighbor.
struct MassDistribution {
  std::vector<int> support;
  std::vector<double> weights;
  double alpha = 0.0;
};

MassDistribution mass_distribution(const Graph& g, int x, double alpha);

// Exact 1-Wasserstein distance between two small discrete distributions under
// the hop metric, solved as a min-cost flow (successive shortest paths with
// potentials) after cancelling shared mass.
double wasserstein_distance(const MassDistribution& mu,
                            const MassDistribution& nu,
                            const HopMetric& metric);

// Ollivier-Ricci curvature of an edge: 1 - W(m_x, m_y) / d(x, y).
double ollivier_ricci(const Graph& g, int x, int y, double alpha,
                      const HopMetric& metric);

// Per-edge curvature values aligned with Graph::edges().
struct RicciMap {
  std::vector<double> values;
  double alpha = 0.5;
};

RicciMap compute_ricci_map(const Graph& g, double alpha,
                           const HopMetric& metric);

void write_ricci_tsv(const Graph& g, const RicciMap& map,
                     const std::filesystem::path& path);

// Local-structure regularizer for a generated stand-in of node u, under the
// assumption that it inherits u's one-hop mass distribution (the transport
// factors then cancel and only embedding-distance ratios remain):
//   (1/|N(u)|) sum_v (1 - d_emb(u_fake, v) / d_emb(u, v)).
// Differentiable in u_fake and in the embedding rows. Neighbors at embedding
// distance zero from u are skipped; if every neighbor is skipped the term is
// zero and *all_skipped is set when provided.
template <class S, class RowFn>
S ricci_regularizer(int u, std::span<const S> u_fake, const RowFn& row,
                    const Graph& g, Curvature k, bool* all_skipped = nullptr) {
  const auto neighbors = g.neighbors(u);
  if (neighbors.empty()) {
    throw GraphError("ricci_regularizer: node has no neighbors");
  }
  std::span<const S> u_row = row(u);
  S acc(0.0);
  int used = 0;
  for (int v : neighbors) {
    std::span<const S> v_row = row(v);
    const S d_real = geometry::distance<S>(u_row, v_row, k);
    if (geometry::scalar_value(d_real) == 0.0) continue;
    const S d_fake = geometry::distance<S>(u_fake, v_row, k);
    acc = acc + (S(1.0) - d_fake / d_real);
    ++used;
  }
  if (all_skipped != nullptr) *all_skipped = used == 0;
  if (used == 0) return S(0.0);
  return acc / S(static_cast<double>(used));
}

}  // namespace curvgraph

#include "curvgraph/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "curvgraph/errors.hpp"
#include "curvgraph/rng.hpp"

namespace curvgraph {

HopMetric::HopMetric(const Graph& g) : graph_(&g), rows_(g.num_nodes()) {}

void HopMetric::build_row(int u) const {
  auto& row = rows_[u];
  row.assign(graph_->num_nodes(), kUnreachable);
  row[u] = 0;
  std::deque<int> queue{u};
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    const std::uint16_t next = static_cast<std::uint16_t>(row[cur] + 1);
    for (int nb : graph_->neighbors(cur)) {
      if (row[nb] != kUnreachable) continue;
      row[nb] = next;
      queue.push_back(nb);
    }
  }
}

std::span<const std::uint16_t> HopMetric::row(int u) const {
  if (rows_[u].empty()) build_row(u);
  return rows_[u];
}

int HopMetric::distance(int u, int v) const {
  const std::uint16_t d = row(u)[v];
  return d == kUnreachable ? -1 : static_cast<int>(d);
}

void HopMetric::precompute_all() {
  for (int u = 0; u < graph_->num_nodes(); ++u) row(u);
}

namespace {

double xi_from_distances(double d_am, double d_bc, double d_ab, double d_ac) {
  const double numerator =
      d_am * d_am + d_bc * d_bc / 4.0 - (d_ab * d_ab + d_ac * d_ac) / 2.0;
  return numerator / (2.0 * d_am);
}

}  // namespace

double xi_triangle(int m, int a, int b, int c, const HopMetric& metric) {
  const int d_am = metric.distance(a, m);
  const int d_bc = metric.distance(b, c);
  const int d_ab = metric.distance(a, b);
  const int d_ac = metric.distance(a, c);
  if (d_am < 0 || d_bc < 0 || d_ab < 0 || d_ac < 0) {
    throw DomainError("xi_triangle: unreachable node pair");
  }
  if (d_am == 0) throw DomainError("xi_triangle: d(a, m) = 0");
  return xi_from_distances(d_am, d_bc, d_ab, d_ac);
}

namespace {

// Shared estimator body; metric returns a negative value for unreachable
// pairs, which discards the sample.
CurvatureEstimate estimate_impl(const Graph& g, int samples_per_node,
                                std::uint64_t seed,
                                const std::function<double(int, int)>& metric) {
  if (samples_per_node < 1) {
    throw EstimationError("estimate_global_curvature: samples_per_node < 1");
  }
  const int n = g.num_nodes();
  double node_sum = 0.0;
  int nodes_used = 0;
  for (int m = 0; m < n; ++m) {
    const auto neighbors = g.neighbors(m);
    const int deg = static_cast<int>(neighbors.size());
    if (deg < 2 || n - 3 < 1) continue;
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(m)));
    double acc = 0.0;
    int got = 0;
    for (int t = 0; t < samples_per_node; ++t) {
      const int bi = rng.uniform_int(deg);
      int cj = rng.uniform_int(deg - 1);
      if (cj >= bi) ++cj;
      const int b = neighbors[bi];
      const int c = neighbors[cj];
      int a;
      do {
        a = rng.uniform_int(n);
      } while (a == m || a == b || a == c);
      const double d_am = metric(a, m);
      const double d_bc = metric(b, c);
      const double d_ab = metric(a, b);
      const double d_ac = metric(a, c);
      if (d_am <= 0.0 || d_bc < 0.0 || d_ab < 0.0 || d_ac < 0.0) continue;
      acc += xi_from_distances(d_am, d_bc, d_ab, d_ac);
      ++got;
    }
    if (got > 0) {
      node_sum += acc / got;
      ++nodes_used;
    }
  }
  if (nodes_used == 0) {
    throw EstimationError(
        "estimate_global_curvature: no node produced a valid sample");
  }
  return CurvatureEstimate{node_sum / nodes_used, samples_per_node, seed};
}

}  // namespace

CurvatureEstimate estimate_global_curvature(const Graph& g,
                                            int samples_per_node,
                                            std::uint64_t seed) {
  HopMetric metric(g);
  return estimate_global_curvature(g, samples_per_node, seed, metric);
}

CurvatureEstimate estimate_global_curvature(const Graph& g,
                                            int samples_per_node,
                                            std::uint64_t seed,
                                            const HopMetric& metric) {
  return estimate_impl(g, samples_per_node, seed, [&](int u, int v) {
    return static_cast<double>(metric.distance(u, v));
  });
}

CurvatureEstimate estimate_global_curvature(
    const Graph& g, int samples_per_node, std::uint64_t seed,
    const std::function<double(int, int)>& metric) {
  return estimate_impl(g, samples_per_node, seed, metric);
}

MassDistribution mass_distribution(const Graph& g, int x, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw GraphError("mass_distribution: alpha outside [0, 1]");
  }
  const auto neighbors = g.neighbors(x);
  if (neighbors.empty()) {
    throw GraphError("mass_distribution: isolated node");
  }
  MassDistribution m;
  m.alpha = alpha;
  m.support.reserve(neighbors.size() + 1);
  m.weights.reserve(neighbors.size() + 1);
  m.support.push_back(x);
  m.weights.push_back(alpha);
  const double share = (1.0 - alpha) / static_cast<double>(neighbors.size());
  for (int v : neighbors) {
    m.support.push_back(v);
    m.weights.push_back(share);
  }
  return m;
}

namespace {

constexpr double kMassTol = 1e-12;

// Min-cost flow on a dense bipartite transportation instance, successive
// shortest paths with Johnson potentials. Supplies, demands and costs are
// small, so the O(V^2) Dijkstra is plenty.
double solve_transport(std::vector<double> supply, std::vector<double> demand,
                       const std::vector<double>& cost) {
  const int a = static_cast<int>(supply.size());
  const int b = static_cast<int>(demand.size());
  const int nodes = a + b;
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<double> flow(static_cast<std::size_t>(a) * b, 0.0);
  std::vector<double> potential(nodes, 0.0);
  std::vector<double> dist(nodes);
  std::vector<int> parent(nodes);
  std::vector<char> visited(nodes);

  double total_cost = 0.0;
  const int max_rounds = 64 * (nodes + 1);
  for (int round = 0;; ++round) {
    double remaining = 0.0;
    for (double s : supply) remaining += s;
    if (remaining < kMassTol) break;
    if (round >= max_rounds) {
      throw EstimationError("wasserstein: flow failed to converge");
    }

    std::fill(dist.begin(), dist.end(), inf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(visited.begin(), visited.end(), 0);
    for (int i = 0; i < a; ++i) {
      if (supply[i] > kMassTol) dist[i] = 0.0;
    }
    for (int step = 0; step < nodes; ++step) {
      int u = -1;
      for (int v = 0; v < nodes; ++v) {
        if (!visited[v] && dist[v] < inf && (u < 0 || dist[v] < dist[u])) {
          u = v;
        }
      }
      if (u < 0) break;
      visited[u] = 1;
      if (u < a) {
        for (int j = 0; j < b; ++j) {
          const double rc = std::max(
              0.0, cost[u * b + j] + potential[u] - potential[a + j]);
          if (dist[u] + rc < dist[a + j]) {
            dist[a + j] = dist[u] + rc;
            parent[a + j] = u;
          }
        }
      } else {
        const int j = u - a;
        for (int i = 0; i < a; ++i) {
          if (flow[i * b + j] <= kMassTol) continue;
          const double rc = std::max(
              0.0, -cost[i * b + j] + potential[a + j] - potential[i]);
          if (dist[u] + rc < dist[i]) {
            dist[i] = dist[u] + rc;
            parent[i] = a + j;
          }
        }
      }
    }

    int target = -1;
    for (int j = 0; j < b; ++j) {
      if (demand[j] > kMassTol && dist[a + j] < inf &&
          (target < 0 || dist[a + j] < dist[a + target])) {
        target = j;
      }
    }
    if (target < 0) {
      throw EstimationError("wasserstein: infeasible marginals");
    }

    // Path from the target sink back to an originating source; entries
    // alternate sink, source, sink, ... ending at a source with parent -1.
    std::vector<int> path{a + target};
    while (parent[path.back()] >= 0) path.push_back(parent[path.back()]);
    const int source = path.back();

    double bottleneck = std::min(demand[target], supply[source]);
    for (std::size_t t = path.size() - 1; t > 0; --t) {
      const int from = path[t];
      const int to = path[t - 1];
      if (from >= a) {  // backward arc sink -> source, limited by its flow
        bottleneck = std::min(bottleneck, flow[to * b + (from - a)]);
      }
    }
    for (std::size_t t = path.size() - 1; t > 0; --t) {
      const int from = path[t];
      const int to = path[t - 1];
      if (from < a) {
        flow[from * b + (to - a)] += bottleneck;
        total_cost += bottleneck * cost[from * b + (to - a)];
      } else {
        flow[to * b + (from - a)] -= bottleneck;
        total_cost -= bottleneck * cost[to * b + (from - a)];
      }
    }

    supply[source] -= bottleneck;
    demand[target] -= bottleneck;
    if (supply[source] < kMassTol) supply[source] = 0.0;
    if (demand[target] < kMassTol) demand[target] = 0.0;

    const double reach_cap = dist[a + target];
    for (int v = 0; v < nodes; ++v) {
      potential[v] += dist[v] < inf ? dist[v] : reach_cap;
    }
  }
  return total_cost;
}

void check_normalized(const MassDistribution& m, const char* name) {
  double total = 0.0;
  for (double w : m.weights) {
    if (w < -kMassTol) throw GraphError("wasserstein: negative mass weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw GraphError(std::string("wasserstein: ") + name +
                     " is not normalized");
  }
}

}  // namespace

double wasserstein_distance(const MassDistribution& mu,
                            const MassDistribution& nu,
                            const HopMetric& metric) {
  check_normalized(mu, "mu");
  check_normalized(nu, "nu");

  // Shared mass never needs to move under a metric ground cost; cancel it.
  std::unordered_map<int, double> residual_mu, residual_nu;
  for (std::size_t i = 0; i < mu.support.size(); ++i) {
    residual_mu[mu.support[i]] += mu.weights[i];
  }
  for (std::size_t i = 0; i < nu.support.size(); ++i) {
    residual_nu[nu.support[i]] += nu.weights[i];
  }
  for (auto& [node, w] : residual_mu) {
    auto it = residual_nu.find(node);
    if (it == residual_nu.end()) continue;
    const double common = std::min(w, it->second);
    w -= common;
    it->second -= common;
  }

  std::vector<int> src_nodes, dst_nodes;
  std::vector<double> supply, demand;
  for (int node : mu.support) {
    const double w = residual_mu[node];
    if (w > kMassTol) {
      src_nodes.push_back(node);
      supply.push_back(w);
      residual_mu[node] = 0.0;
    }
  }
  for (int node : nu.support) {
    const double w = residual_nu[node];
    if (w > kMassTol) {
      dst_nodes.push_back(node);
      demand.push_back(w);
      residual_nu[node] = 0.0;
    }
  }
  if (supply.empty() || demand.empty()) return 0.0;

  const int a = static_cast<int>(src_nodes.size());
  const int b = static_cast<int>(dst_nodes.size());
  std::vector<double> cost(static_cast<std::size_t>(a) * b);
  for (int i = 0; i < a; ++i) {
    for (int j = 0; j < b; ++j) {
      const int d = metric.distance(src_nodes[i], dst_nodes[j]);
      if (d < 0) {
        throw EstimationError("wasserstein: supports span disconnected parts");
      }
      cost[i * b + j] = static_cast<double>(d);
    }
  }
  return solve_transport(std::move(supply), std::move(demand), cost);
}

double ollivier_ricci(const Graph& g, int x, int y, double alpha,
                      const HopMetric& metric) {
  if (!g.has_edge(x, y)) throw GraphError("ollivier_ricci: (x, y) not an edge");
  const MassDistribution mx = mass_distribution(g, x, alpha);
  const MassDistribution my = mass_distribution(g, y, alpha);
  const double d = static_cast<double>(metric.distance(x, y));
  return 1.0 - wasserstein_distance(mx, my, metric) / d;
}

RicciMap compute_ricci_map(const Graph& g, double alpha,
                           const HopMetric& metric) {
  RicciMap map;
  map.alpha = alpha;
  map.values.reserve(g.edges().size());
  for (const auto& [u, v] : g.edges()) {
    map.values.push_back(ollivier_ricci(g, u, v, alpha, metric));
  }
  return map;
}

void write_ricci_tsv(const Graph& g, const RicciMap& map,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("write_ricci_tsv: cannot open " + path.string());
  out.precision(17);
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    const auto& [u, v] = g.edges()[i];
    out << u << '\t' << v << '\t' << map.values[i] << '\n';
  }
}

}  // namespace curvgraph

#include "curvgraph/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "curvgraph/errors.hpp"

namespace curvgraph {

Graph::Graph(int num_nodes) : n_(num_nodes), adjacency_(num_nodes) {
  if (num_nodes < 0) throw GraphError("graph: negative node count");
}

std::uint64_t Graph::edge_key(int u, int v) const {
  const auto [lo, hi] = std::minmax(u, v);
  return static_cast<std::uint64_t>(lo) * static_cast<std::uint64_t>(n_) +
         static_cast<std::uint64_t>(hi);
}

bool Graph::add_edge(int u, int v) {
  if (u < 0 || v < 0 || u >= n_ || v >= n_) {
    throw GraphError("add_edge: node id out of range");
  }
  if (u == v) return false;
  if (!edge_keys_.insert(edge_key(u, v)).second) return false;
  adjacency_[u].push_back(v);
  adjacency_[v].push_back(u);
  edges_.emplace_back(std::min(u, v), std::max(u, v));
  return true;
}

bool Graph::has_edge(int u, int v) const {
  if (u == v || u < 0 || v < 0 || u >= n_ || v >= n_) return false;
  return edge_keys_.contains(edge_key(u, v));
}

int Graph::degree(int u) const {
  return static_cast<int>(adjacency_[u].size());
}

std::span<const int> Graph::neighbors(int u) const { return adjacency_[u]; }

void Graph::set_labels(std::vector<int> labels) {
  if (static_cast<int>(labels.size()) != n_) {
    throw GraphError("set_labels: size mismatch");
  }
  labels_ = std::move(labels);
}

Graph generate_sbm(int n, int blocks, double p_intra, double q_inter,
                   std::uint64_t seed) {
  if (blocks <= 0 || n % blocks != 0) {
    throw GraphError("generate_sbm: n must be divisible by blocks");
  }
  for (double prob : {p_intra, q_inter}) {
    if (!(prob >= 0.0 && prob <= 1.0)) {
      throw GraphError("generate_sbm: probability outside [0, 1]");
    }
  }
  Graph g(n);
  const int per_block = n / blocks;
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i / per_block;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double prob = labels[i] == labels[j] ? p_intra : q_inter;
      if (rng.u01() < prob) g.add_edge(i, j);
    }
  }
  g.set_labels(std::move(labels));
  return g;
}

Graph generate_ba(int n, int m_min, int m_max, std::uint64_t seed) {
  if (m_min < 1 || m_max < m_min) throw GraphError("generate_ba: bad m range");
  const int seed_nodes = m_max + 1;
  if (n <= seed_nodes) throw GraphError("generate_ba: n too small");
  Graph g(n);
  // Endpoint pool: every edge contributes both endpoints, so a uniform draw
  // from the pool is degree-proportional.
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(2 * n) *
               static_cast<std::size_t>((m_min + m_max) / 2 + 1));
  for (int u = 0; u < seed_nodes; ++u) {
    for (int v = u + 1; v < seed_nodes; ++v) {
      g.add_edge(u, v);
      pool.push_back(u);
      pool.push_back(v);
    }
  }
  Rng rng(seed);
  std::vector<int> chosen;
  for (int u = seed_nodes; u < n; ++u) {
    const int m = m_min + rng.uniform_int(m_max - m_min + 1);
    chosen.clear();
    int attempts = 0;
    while (static_cast<int>(chosen.size()) < m) {
      int target = pool[rng.uniform_int(static_cast<int>(pool.size()))];
      if (std::find(chosen.begin(), chosen.end(), target) != chosen.end()) {
        if (++attempts > 64 * m) {
          // Degenerate mass concentration; fall back to the first unchosen
          // node in pool order to stay deterministic.
          for (int cand : pool) {
            if (std::find(chosen.begin(), chosen.end(), cand) ==
                chosen.end()) {
              target = cand;
              break;
            }
          }
        } else {
          continue;
        }
      }
      chosen.push_back(target);
    }
    for (int target : chosen) {
      g.add_edge(u, target);
      pool.push_back(u);
      pool.push_back(target);
    }
  }
  return g;
}

Graph generate_ws(int n, int k, double beta, std::uint64_t seed) {
  if (k <= 0 || k % 2 != 0 || k >= n) {
    throw GraphError("generate_ws: k must be even and < n");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw GraphError("generate_ws: beta outside [0, 1]");
  }
  // Build the lattice edge list first, then rewire in place; the graph is
  // materialized at the end so membership checks see the evolving edge set.
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k / 2));
  std::unordered_set<std::uint64_t> keys;
  auto key = [n](int u, int v) {
    const auto [lo, hi] = std::minmax(u, v);
    return static_cast<std::uint64_t>(lo) * static_cast<std::uint64_t>(n) + hi;
  };
  for (int j = 1; j <= k / 2; ++j) {
    for (int u = 0; u < n; ++u) {
      const int v = (u + j) % n;
      edges.emplace_back(u, v);
      keys.insert(key(u, v));
    }
  }
  Rng rng(seed);
  for (auto& [u, v] : edges) {
    if (rng.u01() >= beta) continue;
    // Rewire the far endpoint; skip when u is already connected to everyone.
    int tries = 0;
    while (tries++ < 16 * n) {
      const int w = rng.uniform_int(n);
      if (w == u || keys.contains(key(u, w))) continue;
      keys.erase(key(u, v));
      keys.insert(key(u, w));
      v = w;
      break;
    }
  }
  Graph g(n);
  for (const auto& [u, v] : edges) g.add_edge(u, v);
  return g;
}

Graph load_edge_list(const std::filesystem::path& path, LoadStats* stats,
                     int min_nodes) {
  std::ifstream in(path);
  if (!in) throw GraphError("load_edge_list: cannot open " + path.string());
  std::vector<std::pair<int, int>> raw;
  std::string line;
  long line_no = 0;
  int max_id = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long long u, v;
    if (!(ls >> u)) continue;  // blank or comment-only line
    if (!(ls >> v)) {
      throw ParseError(path.string(), line_no, "expected `src dst`");
    }
    long long extra;
    if (ls >> extra) {
      // Tolerate a trailing weight column but nothing further.
      if (ls >> extra) {
        throw ParseError(path.string(), line_no, "too many columns");
      }
    }
    if (u < 0 || v < 0) {
      throw ParseError(path.string(), line_no, "negative node id");
    }
    raw.emplace_back(static_cast<int>(u), static_cast<int>(v));
    max_id = std::max({max_id, static_cast<int>(u), static_cast<int>(v)});
  }
  Graph g(std::max(max_id + 1, min_nodes));
  LoadStats local;
  for (const auto& [u, v] : raw) {
    if (u == v) {
      ++local.dropped_self_loops;
    } else if (!g.add_edge(u, v)) {
      ++local.dropped_duplicates;
    }
  }
  if (stats != nullptr) *stats = local;
  return g;
}

std::vector<int> load_labels(const std::filesystem::path& path,
                             int num_nodes) {
  std::ifstream in(path);
  if (!in) throw GraphError("load_labels: cannot open " + path.string());
  std::vector<int> labels(num_nodes, -1);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long long node, label;
    if (!(ls >> node)) continue;
    if (!(ls >> label)) {
      throw ParseError(path.string(), line_no, "expected `node_id label`");
    }
    if (node < 0 || node >= num_nodes) {
      throw ParseError(path.string(), line_no, "node id out of range");
    }
    labels[static_cast<int>(node)] = static_cast<int>(label);
  }
  return labels;
}

void write_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("write_edge_list: cannot open " + path.string());
  for (const auto& [u, v] : g.edges()) out << u << '\t' << v << '\n';
}

void write_labels(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("write_labels: cannot open " + path.string());
  const auto labels = g.labels();
  for (int u = 0; u < g.num_nodes(); ++u) {
    out << u << '\t' << labels[u] << '\n';
  }
}

EdgeSplit split_edges(const Graph& g, double test_ratio, std::uint64_t seed) {
  if (g.num_edges() < 2) throw GraphError("split_edges: need >= 2 edges");
  if (!(test_ratio >= 0.0 && test_ratio < 1.0)) {
    throw GraphError("split_edges: test_ratio outside [0, 1)");
  }
  const auto n_test = static_cast<std::int64_t>(
      std::llround(test_ratio * static_cast<double>(g.num_edges())));
  const auto n = static_cast<std::int64_t>(g.num_nodes());
  const std::int64_t non_edges = n * (n - 1) / 2 - g.num_edges();
  if (non_edges < n_test) throw GraphError("split_edges: not enough non-edges");

  EdgeSplit split;
  split.ratio = test_ratio;
  split.seed = seed;
  Rng rng(seed);

  std::vector<std::pair<int, int>> shuffled = g.edges();
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[rng.uniform_int(static_cast<int>(i))]);
  }
  split.test_pos.assign(shuffled.begin(), shuffled.begin() + n_test);
  split.train_edges.assign(shuffled.begin() + n_test, shuffled.end());

  std::unordered_set<std::uint64_t> taken;
  while (static_cast<std::int64_t>(split.test_neg.size()) < n_test) {
    const int u = rng.uniform_int(g.num_nodes());
    const int v = rng.uniform_int(g.num_nodes());
    if (u == v || g.has_edge(u, v)) continue;
    const auto [lo, hi] = std::minmax(u, v);
    const auto key = static_cast<std::uint64_t>(lo) *
                         static_cast<std::uint64_t>(g.num_nodes()) +
                     static_cast<std::uint64_t>(hi);
    if (!taken.insert(key).second) continue;
    split.test_neg.emplace_back(lo, hi);
  }
  return split;
}

Graph graph_from_edges(const Graph& like,
                       std::span<const std::pair<int, int>> edges) {
  Graph g(like.num_nodes());
  for (const auto& [u, v] : edges) g.add_edge(u, v);
  if (like.has_labels()) {
    g.set_labels(std::vector<int>(like.labels().begin(), like.labels().end()));
  }
  return g;
}

Graph rand_attack(const Graph& g, const AttackSpec& spec) {
  if (!(spec.ratio > 0.0 && spec.ratio < 1.0)) {
    throw GraphError("rand_attack: ratio outside (0, 1)");
  }
  const auto count = static_cast<std::int64_t>(
      std::llround(spec.ratio * static_cast<double>(g.num_edges())));
  if (count < 1) throw GraphError("rand_attack: ratio selects no edges");
  Rng rng(spec.seed);
  if (spec.mode == AttackSpec::Mode::kRemove) {
    std::vector<std::pair<int, int>> shuffled = g.edges();
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1],
                shuffled[rng.uniform_int(static_cast<int>(i))]);
    }
    shuffled.resize(shuffled.size() - static_cast<std::size_t>(count));
    return graph_from_edges(g, shuffled);
  }
  const auto n = static_cast<std::int64_t>(g.num_nodes());
  if (n * (n - 1) / 2 - g.num_edges() < count) {
    throw GraphError("rand_attack: not enough non-edges to add");
  }
  Graph out = graph_from_edges(g, g.edges());
  std::int64_t added = 0;
  while (added < count) {
    const int u = rng.uniform_int(out.num_nodes());
    const int v = rng.uniform_int(out.num_nodes());
    if (u == v || out.has_edge(u, v)) continue;
    out.add_edge(u, v);
    ++added;
  }
  return out;
}

}  // namespace curvgraph

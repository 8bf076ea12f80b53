#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "curvgraph/rng.hpp"

namespace curvgraph {

// Simple undirected graph: no self-loops, no duplicate edges, node ids in
// [0, n). Adjacency lists keep insertion order, edges are stored canonically
// as (min, max) pairs in insertion order, so everything downstream is
// deterministic.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int num_nodes);

  int num_nodes() const { return n_; }
  std::int64_t num_edges() const {
    return static_cast<std::int64_t>(edges_.size());
  }

  // Returns false (and leaves the graph unchanged) for self-loops and
  // duplicates; throws for out-of-range ids.
  bool add_edge(int u, int v);
  bool has_edge(int u, int v) const;

  int degree(int u) const;
  std::span<const int> neighbors(int u) const;
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  bool has_labels() const { return !labels_.empty(); }
  std::span<const int> labels() const { return labels_; }
  void set_labels(std::vector<int> labels);

 private:
  std::uint64_t edge_key(int u, int v) const;

  int n_ = 0;
  std::vector<std::vector<int>> adjacency_;
  std::vector<std::pair<int, int>> edges_;
  std::unordered_set<std::uint64_t> edge_keys_;
  std::vector<int> labels_;
};

// -- synthetic generators -----------------------------------------------------

// Stochastic block model with equally sized blocks; block index becomes the
// node label. `n` must be divisible by `blocks`.
Graph generate_sbm(int n, int blocks, double p_intra, double q_inter,
                   std::uint64_t seed);

// Preferential attachment where each arriving node draws its edge count
// uniformly from [m_min, m_max]. The seed graph is a clique on m_max + 1
// nodes so every draw is satisfiable.
Graph generate_ba(int n, int m_min, int m_max, std::uint64_t seed);

// Ring lattice with k neighbors per node (k/2 per side), each edge rewired
// with probability beta. Rewiring never changes the edge count.
Graph generate_ws(int n, int k, double beta, std::uint64_t seed);

// -- file ingestion -----------------------------------------------------------

struct LoadStats {
  std::int64_t dropped_self_loops = 0;
  std::int64_t dropped_duplicates = 0;
};

// Parses whitespace-separated `src dst` lines; `#` starts a comment. Node
// count is max id + 1 (or `min_nodes` if larger). Self-loops and duplicate
// edges are dropped and counted.
Graph load_edge_list(const std::filesystem::path& path,
                     LoadStats* stats = nullptr, int min_nodes = 0);

// Parses `node_id label` lines into a dense label vector (-1 = unlabeled).
std::vector<int> load_labels(const std::filesystem::path& path, int num_nodes);

void write_edge_list(const Graph& g, const std::filesystem::path& path);
void write_labels(const Graph& g, const std::filesystem::path& path);

// -- splits and attacks ---------------------------------------------------

struct EdgeSplit {
  std::vector<std::pair<int, int>> train_edges;
  std::vector<std::pair<int, int>> test_pos;
  std::vector<std::pair<int, int>> test_neg;
  double ratio = 0.0;
  std::uint64_t seed = 0;
};

// Moves round(test_ratio * |E|) uniformly chosen edges into the test set and
// pairs them with an equal number of uniformly sampled non-edges.
EdgeSplit split_edges(const Graph& g, double test_ratio, std::uint64_t seed);

// Rebuilds a graph (same node count, labels carried over) from an edge list.
Graph graph_from_edges(const Graph& like, std::span<const std::pair<int, int>> edges);

struct AttackSpec {
  enum class Mode { kAdd, kRemove };
  Mode mode = Mode::kRemove;
  double ratio = 0.0;
  std::uint64_t seed = 0;
};

// Random edge perturbation: inserts or deletes round(ratio * |E|) edges
// chosen uniformly. The input graph is left untouched.
Graph rand_attack(const Graph& g, const AttackSpec& spec);

}  // namespace curvgraph

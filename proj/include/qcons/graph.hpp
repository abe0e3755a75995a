#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace qcons {

using NodeId = int;

struct Edge {
  NodeId u;  // u < v
  NodeId v;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected, simple, connected graph on nodes 0..n-1.
///
/// Construction validates every invariant; a Graph value that exists is always
/// simple and connected with n > 1. Edges are kept sorted and neighbor lists
/// ascending so iteration order is deterministic.
class Graph {
 public:
  /// Throws InvalidArgument for self-loops, duplicates, out-of-range ids or
  /// n < 2, and ConnectivityFailure when the edge set is disconnected.
  static Graph from_edges(int n, std::span<const std::pair<NodeId, NodeId>> edges);

  int size() const noexcept { return static_cast<int>(adjacency_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const NodeId> neighbors(NodeId i) const { return adjacency_.at(i); }
  int degree(NodeId i) const { return static_cast<int>(adjacency_.at(i).size()); }
  bool has_edge(NodeId i, NodeId j) const;

  friend bool operator==(const Graph& a, const Graph& b) { return a.edges_ == b.edges_ && a.size() == b.size(); }

 private:
  Graph() = default;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
};

/// True when BFS from node 0 reaches every node of the edge set.
bool is_connected(int n, std::span<const std::pair<NodeId, NodeId>> edges);

inline constexpr int kDefaultRetryBudget = 1000;

struct GeometricLayout {
  std::vector<std::array<double, 2>> positions;
  double radius = 0.0;
};

/// R = sqrt(c * ln(n) / n).
double connectivity_radius(int n, double c);

/// Each candidate pair kept independently with probability p; redrawn with a
/// derived seed until connected. ConnectivityFailure after `max_attempts`.
Graph erdos_renyi(int n, double p, std::uint64_t seed, int max_attempts = kDefaultRetryBudget);

/// n uniform points on the unit square, linked when distance <= R with
/// R = connectivity_radius(n, c).
std::pair<Graph, GeometricLayout> random_geometric(int n, double c, std::uint64_t seed,
                                                   int max_attempts = kDefaultRetryBudget);
std::pair<Graph, GeometricLayout> random_geometric_radius(int n, double radius, std::uint64_t seed,
                                                          int max_attempts = kDefaultRetryBudget);

Graph path_graph(int n);
Graph complete_graph(int n);
/// K_{left,right}; regular when left == right.
Graph complete_bipartite_regular(int n_left, int n_right);

/// Header "n m", then one "u v" pair per line.
void write_edge_list(std::ostream& os, const Graph& g);
Graph read_edge_list(std::istream& is);

}  // namespace qcons

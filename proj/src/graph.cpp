#include "qcons/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "qcons/error.hpp"
#include "qcons/rng.hpp"

namespace qcons {

namespace {

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

void require_size(int n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "graph needs at least 2 nodes, got " + std::to_string(n));
}

}  // namespace

bool is_connected(int n, std::span<const std::pair<NodeId, NodeId>> edges) {
  if (n <= 0) return false;
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) return false;
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<char> seen(n, 0);
  std::vector<NodeId> frontier{0};
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const NodeId u = frontier.back();
    frontier.pop_back();
    for (NodeId v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        frontier.push_back(v);
      }
    }
  }
  return reached == n;
}

Graph Graph::from_edges(int n, std::span<const std::pair<NodeId, NodeId>> edges) {
  require_size(n);
  Graph g;
  g.adjacency_.resize(n);
  g.edges_.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw Error(ErrorCode::InvalidArgument,
                  "edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    }
    if (a == b) throw Error(ErrorCode::InvalidArgument, "self-loop at node " + std::to_string(a));
    g.edges_.push_back(Edge{std::min(a, b), std::max(a, b)});
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  if (auto dup = std::adjacent_find(g.edges_.begin(), g.edges_.end()); dup != g.edges_.end()) {
    throw Error(ErrorCode::InvalidArgument,
                "duplicate edge (" + std::to_string(dup->u) + "," + std::to_string(dup->v) + ")");
  }
  for (const auto& e : g.edges_) {
    g.adjacency_[e.u].push_back(e.v);
    g.adjacency_[e.v].push_back(e.u);
  }
  for (auto& row : g.adjacency_) std::sort(row.begin(), row.end());
  if (!is_connected(n, edges)) throw Error(ErrorCode::ConnectivityFailure, "graph is not connected");
  return g;
}

bool Graph::has_edge(NodeId i, NodeId j) const {
  if (i < 0 || i >= size()) return false;
  const auto& row = adjacency_[i];
  return std::binary_search(row.begin(), row.end(), j);
}

double connectivity_radius(int n, double c) {
  return std::sqrt(c * std::log(static_cast<double>(n)) / static_cast<double>(n));
}

Graph erdos_renyi(int n, double p, std::uint64_t seed, int max_attempts) {
  require_size(n);
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::ParameterOutOfRange, "ER probability must be in (0, 1]");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Rng rng(attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    EdgeList edges;
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = i + 1; j < n; ++j) {
        if (rng.bernoulli(p)) edges.emplace_back(i, j);
      }
    }
    if (is_connected(n, edges)) return Graph::from_edges(n, edges);
  }
  throw Error(ErrorCode::ConnectivityFailure,
              "no connected ER(" + std::to_string(n) + ", p) sample after " + std::to_string(max_attempts) +
                  " attempts");
}

std::pair<Graph, GeometricLayout> random_geometric_radius(int n, double radius, std::uint64_t seed,
                                                          int max_attempts) {
  require_size(n);
  if (!(radius > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "RGG radius must be positive");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Rng rng(attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    GeometricLayout layout;
    layout.radius = radius;
    layout.positions.resize(n);
    for (auto& pos : layout.positions) {
      pos[0] = rng.uniform01();
      pos[1] = rng.uniform01();
    }
    EdgeList edges;
    const double r2 = radius * radius;
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = i + 1; j < n; ++j) {
        const double dx = layout.positions[i][0] - layout.positions[j][0];
        const double dy = layout.positions[i][1] - layout.positions[j][1];
        if (dx * dx + dy * dy <= r2) edges.emplace_back(i, j);
      }
    }
    if (is_connected(n, edges)) return {Graph::from_edges(n, edges), std::move(layout)};
  }
  throw Error(ErrorCode::ConnectivityFailure,
              "no connected RGG sample after " + std::to_string(max_attempts) + " attempts");
}

std::pair<Graph, GeometricLayout> random_geometric(int n, double c, std::uint64_t seed, int max_attempts) {
  require_size(n);
  if (!(c > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "RGG constant c must be positive");
  return random_geometric_radius(n, connectivity_radius(n, c), seed, max_attempts);
}

Graph path_graph(int n) {
  require_size(n);
  EdgeList edges;
  for (NodeId i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph::from_edges(n, edges);
}

Graph complete_graph(int n) {
  require_size(n);
  EdgeList edges;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  }
  return Graph::from_edges(n, edges);
}

Graph complete_bipartite_regular(int n_left, int n_right) {
  if (n_left < 1 || n_right < 1) throw Error(ErrorCode::InvalidArgument, "bipartite sides must be non-empty");
  EdgeList edges;
  for (NodeId i = 0; i < n_left; ++i) {
    for (NodeId j = 0; j < n_right; ++j) edges.emplace_back(i, n_left + j);
  }
  return Graph::from_edges(n_left + n_right, edges);
}

void write_edge_list(std::ostream& os, const Graph& g) {
  os << g.size() << ' ' << g.edges().size() << '\n';
  for (const auto& e : g.edges()) os << e.u << ' ' << e.v << '\n';
}

Graph read_edge_list(std::istream& is) {
  std::string line;
  auto next_line = [&](std::string& out) {
    while (std::getline(is, out)) {
      const auto pos = out.find_first_not_of(" \t\r");
      if (pos == std::string::npos || out[pos] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line(line)) throw Error(ErrorCode::ParseError, "edge list: missing 'n m' header");
  long n = 0;
  long m = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> n >> m) || n < 0 || m < 0) throw Error(ErrorCode::ParseError, "edge list: bad header '" + line + "'");
  }
  EdgeList edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long k = 0; k < m; ++k) {
    if (!next_line(line)) throw Error(ErrorCode::ParseError, "edge list: expected " + std::to_string(m) + " edges");
    std::istringstream ls(line);
    long u = 0;
    long v = 0;
    std::string extra;
    if (!(ls >> u >> v) || (ls >> extra)) throw Error(ErrorCode::ParseError, "edge list: bad edge line '" + line + "'");
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  if (next_line(line)) throw Error(ErrorCode::ParseError, "edge list: trailing content '" + line + "'");
  return Graph::from_edges(static_cast<int>(n), edges);
}

}  // namespace qcons

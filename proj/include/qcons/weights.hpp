#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qcons/graph.hpp"
#include "qcons/numeric.hpp"

namespace qcons {

struct WeightEntry {
  NodeId col;
  Rational value;
};

/// n x n rational matrix stored as a diagonal plus sorted off-diagonal rows.
///
/// Storage does not enforce symmetry or stochasticity: explicit matrices read
/// from disk may break either, and validate_assumption1 reports it.
class WeightMatrix {
 public:
  struct Triplet {
    NodeId row;
    NodeId col;
    Rational value;
  };

  /// Zero entries are dropped. Duplicate (row, col) pairs are an error.
  static WeightMatrix from_triplets(int n, std::span<const Triplet> entries);

  int size() const noexcept { return static_cast<int>(diag_.size()); }
  const Rational& diag(NodeId i) const { return diag_.at(i); }
  /// Non-zero off-diagonal entries of row i, ascending by column.
  std::span<const WeightEntry> row(NodeId i) const { return rows_.at(i); }
  Rational at(NodeId i, NodeId j) const;

  /// Sum over j != i of w_ij.
  Rational off_diagonal_sum(NodeId i) const;
  Rational row_sum(NodeId i) const;
  Rational column_sum(NodeId j) const;

  std::vector<Triplet> triplets() const;

  friend bool operator==(const WeightMatrix& a, const WeightMatrix& b);

 private:
  std::vector<Rational> diag_;
  std::vector<std::vector<WeightEntry>> rows_;
};

/// w_ij = 1/(max(d_i, d_j) + 1) on edges, w_ii = 1 - sum.
WeightMatrix metropolis(const Graph& g);

/// w_ij = 1/(C (max(d_i, d_j) + 1)); ParameterOutOfRange when C < 2.
WeightMatrix modified_metropolis(const Graph& g, const Rational& C);

/// [[w, 1-w], [1-w, w]] on two nodes, 0 < w < 1.
WeightMatrix two_node_cyclic(const Rational& w);

/// Self-weight w on every node of a d-regular graph, (1-w)/d on each edge.
/// On K2 this is two_node_cyclic; on regular bipartite graphs it reproduces
/// the large-cycle construction.
WeightMatrix uniform_self_weight(const Graph& g, const Rational& w);

enum class AssumptionRule { Symmetry, DoublyStochastic, DominantDiagonal, Sparsity, Rationality };

const char* to_string(AssumptionRule rule) noexcept;

struct AssumptionViolation {
  AssumptionRule rule;
  NodeId i;   // row (or node)
  NodeId j;   // column, -1 for node-level rules
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionViolation> violations;
  bool satisfied() const noexcept { return violations.empty(); }
  std::string summary() const;
};

/// Exact check of the four weight conditions: symmetric doubly stochastic
/// with non-negative entries, w_ii > 1/2, zero off the edge set, and every
/// edge weight a rational in (0, 1).
AssumptionReport validate_assumption1(const WeightMatrix& w, const Graph& g);

/// True when every entry is non-negative and every row sums to exactly 1.
bool is_row_stochastic(const WeightMatrix& w);
/// True when every column sums to exactly 1.
bool is_column_stochastic(const WeightMatrix& w);

/// First line "n", then one "i j p/q" line per stored entry (diagonal lines
/// have i == j). Round-trips exactly.
void write_weights(std::ostream& os, const WeightMatrix& w);
WeightMatrix read_weights(std::istream& is);

}  // namespace qcons

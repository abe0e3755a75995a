#include "qcons/weights.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "qcons/error.hpp"

namespace qcons {

WeightMatrix WeightMatrix::from_triplets(int n, std::span<const Triplet> entries) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "weight matrix dimension must be positive");
  WeightMatrix w;
  w.diag_.assign(static_cast<std::size_t>(n), Rational(0));
  w.rows_.resize(static_cast<std::size_t>(n));
  std::vector<char> diag_seen(static_cast<std::size_t>(n), 0);
  for (const auto& t : entries) {
    if (t.row < 0 || t.col < 0 || t.row >= n || t.col >= n) {
      throw Error(ErrorCode::InvalidArgument,
                  "weight entry (" + std::to_string(t.row) + "," + std::to_string(t.col) + ") out of range");
    }
    if (t.row == t.col) {
      if (diag_seen[t.row]) throw Error(ErrorCode::InvalidArgument, "duplicate diagonal entry " + std::to_string(t.row));
      diag_seen[t.row] = 1;
      w.diag_[t.row] = t.value;
    } else if (t.value.sign() != 0) {
      w.rows_[t.row].push_back(WeightEntry{t.col, t.value});
    }
  }
  for (std::size_t i = 0; i < w.rows_.size(); ++i) {
    auto& row = w.rows_[i];
    std::sort(row.begin(), row.end(), [](const WeightEntry& a, const WeightEntry& b) { return a.col < b.col; });
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (row[k].col == row[k - 1].col) {
        throw Error(ErrorCode::InvalidArgument,
                    "duplicate weight entry (" + std::to_string(i) + "," + std::to_string(row[k].col) + ")");
      }
    }
  }
  return w;
}

Rational WeightMatrix::at(NodeId i, NodeId j) const {
  if (i == j) return diag(i);
  const auto& r = rows_.at(i);
  auto it = std::lower_bound(r.begin(), r.end(), j, [](const WeightEntry& e, NodeId c) { return e.col < c; });
  if (it != r.end() && it->col == j) return it->value;
  return Rational(0);
}

Rational WeightMatrix::off_diagonal_sum(NodeId i) const {
  Rational s;
  for (const auto& e : rows_.at(i)) s += e.value;
  return s;
}

Rational WeightMatrix::row_sum(NodeId i) const { return diag(i) + off_diagonal_sum(i); }

Rational WeightMatrix::column_sum(NodeId j) const {
  Rational s = diag(j);
  for (int i = 0; i < size(); ++i) {
    if (i != j) s += at(i, j);
  }
  return s;
}

std::vector<WeightMatrix::Triplet> WeightMatrix::triplets() const {
  std::vector<Triplet> out;
  for (int i = 0; i < size(); ++i) {
    out.push_back(Triplet{i, i, diag_[i]});
    for (const auto& e : rows_[i]) out.push_back(Triplet{i, e.col, e.value});
  }
  return out;
}

bool operator==(const WeightMatrix& a, const WeightMatrix& b) {
  if (a.diag_ != b.diag_ || a.rows_.size() != b.rows_.size()) return false;
  for (std::size_t i = 0; i < a.rows_.size(); ++i) {
    const auto& ra = a.rows_[i];
    const auto& rb = b.rows_[i];
    if (ra.size() != rb.size()) return false;
    for (std::size_t k = 0; k < ra.size(); ++k) {
      if (ra[k].col != rb[k].col || ra[k].value != rb[k].value) return false;
    }
  }
  return true;
}

namespace {

WeightMatrix metropolis_scaled(const Graph& g, const Rational& C) {
  std::vector<WeightMatrix::Triplet> entries;
  std::vector<Rational> off(static_cast<std::size_t>(g.size()));
  for (const auto& e : g.edges()) {
    const Rational w = Rational(1) / (C * Rational(std::max(g.degree(e.u), g.degree(e.v)) + 1));
    entries.push_back({e.u, e.v, w});
    entries.push_back({e.v, e.u, w});
    off[e.u] += w;
    off[e.v] += w;
  }
  for (int i = 0; i < g.size(); ++i) entries.push_back({i, i, Rational(1) - off[i]});
  return WeightMatrix::from_triplets(g.size(), entries);
}

}  // namespace

WeightMatrix metropolis(const Graph& g) { return metropolis_scaled(g, Rational(1)); }

WeightMatrix modified_metropolis(const Graph& g, const Rational& C) {
  if (C < Rational(2)) throw Error(ErrorCode::ParameterOutOfRange, "modified Metropolis needs C >= 2, got " + C.str());
  return metropolis_scaled(g, C);
}

WeightMatrix two_node_cyclic(const Rational& w) {
  if (w.sign() <= 0 || w >= Rational(1)) {
    throw Error(ErrorCode::ParameterOutOfRange, "two-node self weight must be in (0, 1), got " + w.str());
  }
  const Rational off = Rational(1) - w;
  const std::vector<WeightMatrix::Triplet> entries{{0, 0, w}, {1, 1, w}, {0, 1, off}, {1, 0, off}};
  return WeightMatrix::from_triplets(2, entries);
}

WeightMatrix uniform_self_weight(const Graph& g, const Rational& w) {
  if (w.sign() <= 0 || w >= Rational(1)) {
    throw Error(ErrorCode::ParameterOutOfRange, "self weight must be in (0, 1), got " + w.str());
  }
  const int d = g.degree(0);
  for (int i = 1; i < g.size(); ++i) {
    if (g.degree(i) != d) throw Error(ErrorCode::InvalidArgument, "uniform self weight needs a regular graph");
  }
  const Rational off = (Rational(1) - w) / Rational(d);
  std::vector<WeightMatrix::Triplet> entries;
  for (const auto& e : g.edges()) {
    entries.push_back({e.u, e.v, off});
    entries.push_back({e.v, e.u, off});
  }
  for (int i = 0; i < g.size(); ++i) entries.push_back({i, i, w});
  return WeightMatrix::from_triplets(g.size(), entries);
}

const char* to_string(AssumptionRule rule) noexcept {
  switch (rule) {
    case AssumptionRule::Symmetry: return "Symmetry";
    case AssumptionRule::DoublyStochastic: return "DoublyStochastic";
    case AssumptionRule::DominantDiagonal: return "DominantDiagonal";
    case AssumptionRule::Sparsity: return "Sparsity";
    case AssumptionRule::Rationality: return "Rationality";
  }
  return "Unknown";
}

std::string AssumptionReport::summary() const {
  if (violations.empty()) return "assumption satisfied";
  std::ostringstream os;
  for (const auto& v : violations) {
    os << to_string(v.rule) << " at (" << v.i;
    if (v.j >= 0) os << "," << v.j;
    os << "): " << v.detail << '\n';
  }
  return os.str();
}

AssumptionReport validate_assumption1(const WeightMatrix& w, const Graph& g) {
  AssumptionReport report;
  auto add = [&](AssumptionRule rule, NodeId i, NodeId j, std::string detail) {
    report.violations.push_back(AssumptionViolation{rule, i, j, std::move(detail)});
  };
  if (w.size() != g.size()) {
    add(AssumptionRule::Sparsity, -1, -1,
        "dimension " + std::to_string(w.size()) + " does not match graph size " + std::to_string(g.size()));
    return report;
  }
  const int n = w.size();
  const Rational one(1);
  const Rational half(1, 2);
  std::vector<Rational> column_sums(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    column_sums[i] += w.diag(i);
    for (const auto& e : w.row(i)) column_sums[e.col] += e.value;
  }
  for (int i = 0; i < n; ++i) {
    if (w.diag(i).sign() < 0) add(AssumptionRule::DoublyStochastic, i, i, "negative entry " + w.diag(i).str());
    for (const auto& e : w.row(i)) {
      const NodeId j = e.col;
      if (e.value.sign() < 0) add(AssumptionRule::DoublyStochastic, i, j, "negative entry " + e.value.str());
      if (w.at(j, i) != e.value) {
        add(AssumptionRule::Symmetry, i, j, e.value.str() + " != " + w.at(j, i).str());
      }
      if (!g.has_edge(i, j)) {
        add(AssumptionRule::Sparsity, i, j, "non-zero weight " + e.value.str() + " on a non-edge");
      }
    }
    if (const Rational rs = w.row_sum(i); rs != one) {
      add(AssumptionRule::DoublyStochastic, i, -1, "row sum " + rs.str());
    }
    if (column_sums[i] != one) {
      add(AssumptionRule::DoublyStochastic, i, -1, "column sum " + column_sums[i].str());
    }
    if (w.diag(i) <= half) add(AssumptionRule::DominantDiagonal, i, i, "w_ii = " + w.diag(i).str() + " <= 1/2");
    for (NodeId j : g.neighbors(i)) {
      const Rational wij = w.at(i, j);
      if (wij.sign() <= 0 || wij >= one) {
        add(AssumptionRule::Rationality, i, j, "edge weight " + wij.str() + " not in (0, 1)");
      }
    }
  }
  return report;
}

bool is_row_stochastic(const WeightMatrix& w) {
  for (int i = 0; i < w.size(); ++i) {
    if (w.diag(i).sign() < 0) return false;
    for (const auto& e : w.row(i)) {
      if (e.value.sign() < 0) return false;
    }
    if (w.row_sum(i) != Rational(1)) return false;
  }
  return true;
}

bool is_column_stochastic(const WeightMatrix& w) {
  std::vector<Rational> sums(static_cast<std::size_t>(w.size()));
  for (int i = 0; i < w.size(); ++i) {
    sums[i] += w.diag(i);
    for (const auto& e : w.row(i)) sums[e.col] += e.value;
  }
  return std::all_of(sums.begin(), sums.end(), [](const Rational& s) { return s == Rational(1); });
}

void write_weights(std::ostream& os, const WeightMatrix& w) {
  os << w.size() << '\n';
  for (const auto& t : w.triplets()) os << t.row << ' ' << t.col << ' ' << t.value.str() << '\n';
}

WeightMatrix read_weights(std::istream& is) {
  std::string line;
  long n = -1;
  std::vector<WeightMatrix::Triplet> entries;
  while (std::getline(is, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    std::istringstream ls(line);
    if (n < 0) {
      std::string extra;
      if (!(ls >> n) || n < 1 || (ls >> extra)) throw Error(ErrorCode::ParseError, "weights: bad header '" + line + "'");
      continue;
    }
    long i = 0;
    long j = 0;
    std::string value;
    std::string extra;
    if (!(ls >> i >> j >> value) || (ls >> extra)) throw Error(ErrorCode::ParseError, "weights: bad line '" + line + "'");
    entries.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), Rational::parse(value)});
  }
  if (n < 0) throw Error(ErrorCode::ParseError, "weights: missing dimension header");
  return WeightMatrix::from_triplets(static_cast<int>(n), entries);
}

}  // namespace qcons
